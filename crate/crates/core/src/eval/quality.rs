use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stage_rng;

/// Cross-validated kNN classification accuracy of a 2-D layout, in percent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub mean_accuracy: f64,
    pub fold_accuracy: Vec<f64>,
    pub k: usize,
    pub folds: usize,
    pub seed: Option<u64>,
}

/// Fold index for every sample. Within each class the members are shuffled
/// and dealt round-robin, continuing the deal across classes so fold sizes
/// differ by at most one.
pub fn stratified_folds(labels: &[usize], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
    }
    if labels.len() < folds {
        return Err(Error::Config(format!("{} samples cannot fill {folds} folds", labels.len())));
    }
    let classes = labels.iter().max().map_or(0, |&c| c + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &c) in labels.iter().enumerate() {
        members[c].push(i);
    }
    if members.iter().any(|m| !m.is_empty() && m.len() < folds) {
        log::warn!("some classes have fewer members than folds; stratification is approximate");
    }
    let mut rng = stage_rng(seed, "cv-folds");
    let mut fold_of = vec![0; labels.len()];
    let mut deal = 0;
    for class in &mut members {
        class.shuffle(&mut rng);
        for &i in class.iter() {
            fold_of[i] = deal % folds;
            deal += 1;
        }
    }
    Ok(fold_of)
}

/// Stratified `folds`-fold kNN accuracy with a seeded split.
pub fn knn_accuracy(z: &[[f64; 2]], labels: &[usize], k: usize, folds: usize, seed: u64) -> Result<QualityReport> {
    if z.len() < k + 1 {
        return Err(Error::Config(format!("need more than k={k} points, got {}", z.len())));
    }
    let fold_of = stratified_folds(labels, folds, seed)?;
    let mut r = knn_accuracy_with_folds(z, labels, &fold_of, k)?;
    r.seed = Some(seed);
    Ok(r)
}

/// kNN accuracy over an explicit fold assignment. Each test point takes a
/// majority vote over its k nearest training points; ties go to the label
/// with the smaller summed distance, then to the smaller label.
pub fn knn_accuracy_with_folds(z: &[[f64; 2]], labels: &[usize], fold_of: &[usize], k: usize) -> Result<QualityReport> {
    let n = z.len();
    if labels.len() != n || fold_of.len() != n {
        return Err(Error::InvalidData(format!(
            "layout has {n} points, labels {}, folds {}",
            labels.len(),
            fold_of.len()
        )));
    }
    if k == 0 {
        return Err(Error::Config("k must be positive".into()));
    }
    if z.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(Error::InvalidData("layout has non-finite coordinates".into()));
    }
    let folds = fold_of.iter().max().map_or(0, |&f| f + 1);
    let classes = labels.iter().max().map_or(0, |&c| c + 1);
    let mut fold_accuracy = Vec::with_capacity(folds);
    for f in 0..folds {
        let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != f).collect();
        let test: Vec<usize> = (0..n).filter(|&i| fold_of[i] == f).collect();
        if test.is_empty() {
            continue;
        }
        if train.len() < k {
            return Err(Error::Config(format!("fold {f} has {} training points, fewer than k={k}", train.len())));
        }
        let correct: usize = test
            .par_iter()
            .map(|&i| {
                let mut cand: Vec<(f64, usize)> = train
                    .iter()
                    .map(|&j| {
                        let dx = z[i][0] - z[j][0];
                        let dy = z[i][1] - z[j][1];
                        ((dx * dx + dy * dy).sqrt(), j)
                    })
                    .collect();
                let by = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
                if cand.len() > k {
                    cand.select_nth_unstable_by(k - 1, by);
                    cand.truncate(k);
                }
                let mut votes = vec![(0usize, 0.0f64); classes];
                for &(d, j) in &cand {
                    votes[labels[j]].0 += 1;
                    votes[labels[j]].1 += d;
                }
                let pred = (0..classes)
                    .filter(|&c| votes[c].0 > 0)
                    .min_by(|&a, &b| {
                        votes[b].0.cmp(&votes[a].0).then(votes[a].1.total_cmp(&votes[b].1)).then(a.cmp(&b))
                    })
                    .expect("k >= 1 neighbours");
                usize::from(pred == labels[i])
            })
            .sum();
        fold_accuracy.push(100.0 * correct as f64 / test.len() as f64);
    }
    let mean_accuracy = fold_accuracy.iter().sum::<f64>() / fold_accuracy.len() as f64;
    Ok(QualityReport { mean_accuracy, fold_accuracy, k, folds, seed: None })
}
