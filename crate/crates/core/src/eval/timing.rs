use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::pipeline::{run_fastumap, FastUmapConfig, FastUmapOutput, StageTimings};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    if v.len() % 2 == 1 {
        v[h]
    } else {
        0.5 * (v[h - 1] + v[h])
    }
}

/// Per-stage medians over repeated runs of the same configuration.
pub fn median_timings(runs: &[StageTimings]) -> Result<StageTimings> {
    let first = runs.first().ok_or_else(|| Error::Config("no timing runs".into()))?;
    let pick = |f: fn(&StageTimings) -> f64| median(runs.iter().map(f).collect());
    Ok(StageTimings {
        graph_s: pick(|t| t.graph_s),
        spectral_s: pick(|t| t.spectral_s),
        sgd_s: pick(|t| t.sgd_s),
        total_s: pick(|t| t.total_s),
        ..*first
    })
}

/// Run the pipeline `repeats` times on already preprocessed data and report
/// per-stage medians together with the output of the last run.
pub fn timed_run(x: &DataMatrix, cfg: &FastUmapConfig, repeats: usize) -> Result<(FastUmapOutput, StageTimings)> {
    if repeats == 0 {
        return Err(Error::Config("repeats must be positive".into()));
    }
    let mut runs = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats {
        let out = run_fastumap(x, cfg)?;
        runs.push(out.timings);
        last = Some(out);
    }
    Ok((last.expect("repeats > 0"), median_timings(&runs)?))
}
