//! Dataset loading and the shared preprocessing applied before every run:
//! per-column min-max scaling, then PCA when the trigger fires.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

#[derive(Clone, Debug)]
pub struct RawDataset {
    pub name: String,
    pub features: DataMatrix,
    /// Factor-encoded class labels in `0..C`.
    pub labels: Option<Vec<usize>>,
    /// Original label strings, indexed by code.
    pub label_names: Vec<String>,
}

impl RawDataset {
    pub fn new(name: impl Into<String>, features: DataMatrix, labels: Option<Vec<usize>>) -> Result<Self> {
        let ds = Self {
            name: name.into(),
            features,
            label_names: Vec::new(),
            labels,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    fn validate(&self) -> Result<()> {
        if self.n() < 2 {
            return Err(Error::InvalidData(format!("need at least 2 samples, got {}", self.n())));
        }
        if self.dim() < 1 {
            return Err(Error::InvalidData("need at least one feature column".into()));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.n() {
                return Err(Error::InvalidData(format!(
                    "{} labels for {} samples",
                    labels.len(),
                    self.n()
                )));
            }
        }
        if let Some(pos) = self.features.as_slice().iter().position(|v| !v.is_finite()) {
            let (i, j) = (pos / self.dim(), pos % self.dim());
            return Err(Error::InvalidData(format!("non-finite value at row {i}, column {j}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataFormat {
    Csv,
    BinaryMatrix,
}

impl DataFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("f32") | Some("bin") => DataFormat::BinaryMatrix,
            _ => DataFormat::Csv,
        }
    }
}

/// Sidecar describing a raw little-endian f32 row-major matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BinarySidecar {
    pub rows: usize,
    pub cols: usize,
    /// Label file, one label per line, relative to the sidecar's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<String>,
}

pub fn sidecar_path(data: &Path) -> PathBuf {
    data.with_extension("json")
}

pub fn load_dataset(path: &Path, format: DataFormat, label_col: Option<&str>) -> Result<RawDataset> {
    match format {
        DataFormat::Csv => load_csv(path, label_col),
        DataFormat::BinaryMatrix => load_binary(path),
    }
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string()
}

/// Headered CSV. With `label_col` set, that column is factor-encoded as the
/// class label and every other column must be numeric.
pub fn load_csv(path: &Path, label_col: Option<&str>) -> Result<RawDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::InvalidData(format!("{}: {other:?}", path.display())),
        })?;
    let headers = reader.headers()?.clone();
    let label_idx = match label_col {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::InvalidData(format!("no column named {name:?} in {}", path.display())))?,
        ),
        None => None,
    };
    let ncols = headers.len() - usize::from(label_idx.is_some());

    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    for (r, record) in reader.records().enumerate() {
        // header is line 1
        let line = r + 2;
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                path: path.into(),
                row: line,
                column: format!("{} fields", record.len()),
                reason: format!("expected {} fields", headers.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            if Some(j) == label_idx {
                raw_labels.push(cell.trim().to_string());
                continue;
            }
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                path: path.into(),
                row: line,
                column: headers[j].to_string(),
                reason: format!("non-numeric value {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: path.into(),
                    row: line,
                    column: headers[j].to_string(),
                    reason: format!("non-finite value {cell:?}"),
                });
            }
            values.push(v);
        }
    }
    let rows = values.len() / ncols.max(1);
    let features = DataMatrix::new(rows, ncols, values)?;
    let (labels, label_names) = if label_idx.is_some() {
        let (codes, names) = factor_encode(&raw_labels);
        (Some(codes), names)
    } else {
        (None, Vec::new())
    };
    let mut ds = RawDataset::new(dataset_name(path), features, labels)?;
    ds.label_names = label_names;
    Ok(ds)
}

/// Raw `.f32` row-major matrix with a JSON sidecar next to it.
pub fn load_binary(path: &Path) -> Result<RawDataset> {
    let side_path = sidecar_path(path);
    let side_text = fs::read_to_string(&side_path).map_err(|e| Error::io(&side_path, e))?;
    let side: BinarySidecar = serde_json::from_str(&side_text)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected = side.rows * side.cols * 4;
    if bytes.len() != expected {
        return Err(Error::InvalidData(format!(
            "{}: {} bytes, sidecar declares {}x{} f32 ({expected} bytes)",
            path.display(),
            bytes.len(),
            side.rows,
            side.cols
        )));
    }
    let mut values = Vec::with_capacity(side.rows * side.cols);
    for (pos, chunk) in bytes.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        if !v.is_finite() {
            return Err(Error::Parse {
                path: path.into(),
                row: pos / side.cols,
                column: (pos % side.cols).to_string(),
                reason: format!("non-finite value {v}"),
            });
        }
        values.push(f64::from(v));
    }
    let features = DataMatrix::new(side.rows, side.cols, values)?;

    let (labels, label_names) = match &side.labels {
        Some(rel) => {
            let lpath = side_path.parent().unwrap_or(Path::new(".")).join(rel);
            let text = fs::read_to_string(&lpath).map_err(|e| Error::io(&lpath, e))?;
            let raw: Vec<String> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect();
            let (codes, names) = factor_encode(&raw);
            (Some(codes), names)
        }
        None => (None, Vec::new()),
    };
    let mut ds = RawDataset::new(dataset_name(path), features, labels)?;
    ds.label_names = label_names;
    Ok(ds)
}

/// Write `features` as `.f32` plus sidecar (labels optional).
pub fn write_binary(path: &Path, features: &DataMatrix, labels: Option<&[usize]>) -> Result<()> {
    let mut bytes = Vec::with_capacity(features.as_slice().len() * 4);
    for &v in features.as_slice() {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let label_rel = labels.map(|ls| {
        let stem = dataset_name(path);
        let lname = format!("{stem}_labels.txt");
        let lpath = path.with_file_name(&lname);
        let text: String = ls.iter().map(|l| format!("{l}\n")).collect();
        (lname, lpath, text)
    });
    if let Some((_, lpath, text)) = &label_rel {
        fs::write(lpath, text).map_err(|e| Error::io(lpath, e))?;
    }
    let side = BinarySidecar {
        rows: features.nrows(),
        cols: features.ncols(),
        labels: label_rel.map(|(name, _, _)| name),
    };
    let side_path = sidecar_path(path);
    fs::write(&side_path, serde_json::to_string(&side)?).map_err(|e| Error::io(&side_path, e))
}

/// Codes follow sorted label order: numeric when every label parses as a
/// number, lexicographic otherwise.
fn factor_encode(raw: &[String]) -> (Vec<usize>, Vec<String>) {
    let numeric: Option<Vec<f64>> = raw.iter().map(|s| s.parse::<f64>().ok()).collect();
    let mut names: Vec<String> = raw.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if numeric.is_some() {
        names.sort_by(|a, b| {
            let (x, y) = (a.parse::<f64>().unwrap(), b.parse::<f64>().unwrap());
            x.total_cmp(&y)
        });
    }
    let codes = raw
        .iter()
        .map(|s| names.iter().position(|n| n == s).unwrap())
        .collect();
    (codes, names)
}

/// Map each column onto [0, 1]; constant columns become all zeros.
pub fn minmax_normalize(x: &DataMatrix) -> DataMatrix {
    let (n, d) = (x.nrows(), x.ncols());
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for row in x.rows_iter() {
        for j in 0..d {
            lo[j] = lo[j].min(row[j]);
            hi[j] = hi[j].max(row[j]);
        }
    }
    let mut out = DataMatrix::zeros(n, d);
    for i in 0..n {
        let src = x.row(i);
        let dst = out.row_mut(i);
        for j in 0..d {
            let span = hi[j] - lo[j];
            dst[j] = if span > 0.0 { (src[j] - lo[j]) / span } else { 0.0 };
        }
    }
    out
}

/// Fitted principal axes.
#[derive(Clone, Debug)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// One component per row, `target x D`, unit norm.
    pub components: DataMatrix,
    pub explained_variance: Vec<f64>,
}

impl Pca {
    pub fn fit(x: &DataMatrix, target: usize) -> Result<Self> {
        let (n, d) = (x.nrows(), x.ncols());
        if n < 2 {
            return Err(Error::InvalidData("PCA needs at least 2 samples".into()));
        }
        if target == 0 {
            return Err(Error::Config("PCA target dimension must be positive".into()));
        }
        let mean: Vec<f64> = (0..d)
            .map(|j| x.rows_iter().map(|r| r[j]).sum::<f64>() / n as f64)
            .collect();
        let centered = DMatrix::from_fn(n, d, |i, j| x.get(i, j) - mean[j]);
        let cov = (centered.transpose() * &centered) / (n as f64 - 1.0);
        let eig = SymmetricEigen::new(cov);

        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let keep = target.min(d);
        let mut components = DataMatrix::zeros(keep, d);
        let mut explained_variance = Vec::with_capacity(keep);
        for (c, &idx) in order.iter().take(keep).enumerate() {
            let v = eig.eigenvectors.column(idx);
            let pivot = (0..d)
                .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
                .unwrap();
            let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
            for (j, dst) in components.row_mut(c).iter_mut().enumerate() {
                *dst = sign * v[j];
            }
            explained_variance.push(eig.eigenvalues[idx].max(0.0));
        }
        Ok(Self {
            mean,
            components,
            explained_variance,
        })
    }

    pub fn transform(&self, x: &DataMatrix) -> DataMatrix {
        let k = self.components.nrows();
        let mut out = DataMatrix::zeros(x.nrows(), k);
        for i in 0..x.nrows() {
            let row = x.row(i);
            let dst = out.row_mut(i);
            for (c, o) in dst.iter_mut().enumerate() {
                *o = self
                    .components
                    .row(c)
                    .iter()
                    .zip(row.iter().zip(&self.mean))
                    .map(|(w, (v, m))| w * (v - m))
                    .sum();
            }
        }
        out
    }
}

/// Project onto the top `target` principal components. When the data has at
/// most `target` columns it is returned unchanged.
pub fn pca_reduce(x: &DataMatrix, target: usize) -> Result<DataMatrix> {
    if x.nrows() < 2 {
        return Err(Error::InvalidData("PCA needs at least 2 samples".into()));
    }
    if target == 0 {
        return Err(Error::Config("PCA target dimension must be positive".into()));
    }
    if x.ncols() <= target {
        return Ok(x.clone());
    }
    Ok(Pca::fit(x, target)?.transform(x))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct PreprocessConfig {
    pub pca_target: usize,
    pub trigger_dim: usize,
    pub trigger_n: usize,
    pub seed: u64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            pca_target: 50,
            trigger_dim: 50,
            trigger_n: 5000,
            seed: 42,
        }
    }
}

/// Min-max normalized (and possibly PCA-reduced) samples ready for embedding.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub data: DataMatrix,
    pub labels: Option<Vec<usize>>,
    pub original_dim: usize,
    pub pca_applied: bool,
}

impl Prepared {
    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }
}

pub fn preprocess(ds: &RawDataset, cfg: &PreprocessConfig) -> Result<Prepared> {
    if cfg.pca_target == 0 || cfg.trigger_dim == 0 || cfg.trigger_n == 0 {
        return Err(Error::Config("preprocessing fields must be positive".into()));
    }
    let normalized = minmax_normalize(&ds.features);
    let triggered = ds.dim() > cfg.trigger_dim || ds.n() > cfg.trigger_n;
    let (data, pca_applied) = if triggered && ds.dim() > cfg.trigger_dim {
        (pca_reduce(&normalized, cfg.pca_target)?, true)
    } else {
        (normalized, false)
    };
    Ok(Prepared {
        data,
        labels: ds.labels.clone(),
        original_dim: ds.dim(),
        pca_applied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_with_label_column() {
        let f = write_tmp("a,b,label\n1,2,x\n3,4,y\n5,6,x\n");
        let ds = load_csv(f.path(), Some("label")).unwrap();
        assert_eq!((ds.n(), ds.dim()), (3, 2));
        assert_eq!(ds.labels.as_deref(), Some(&[0, 1, 0][..]));
        assert_eq!(ds.features.row(2), &[5.0, 6.0]);
    }

    #[test]
    fn csv_text_in_feature_cell_names_cell() {
        let f = write_tmp("a,b,label\n1,2,0\n3,oops,1\n");
        let err = load_csv(f.path(), Some("label")).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 3);
                assert_eq!(column, "b");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn csv_rejects_nan() {
        let f = write_tmp("a,b\n1,NaN\n2,3\n");
        assert!(matches!(load_csv(f.path(), None), Err(Error::Parse { .. })));
    }

    #[test]
    fn numeric_labels_encode_in_numeric_order() {
        let f = write_tmp("a,label\n1,10\n2,9\n3,10\n");
        let ds = load_csv(f.path(), Some("label")).unwrap();
        assert_eq!(ds.labels.unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn binary_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.f32");
        let x = DataMatrix::from_rows(&[[1.0, 2.0], [3.5, -4.0], [0.0, 1.0]]).unwrap();
        write_binary(&path, &x, Some(&[0, 1, 1])).unwrap();
        let ds = load_binary(&path).unwrap();
        assert_eq!(ds.features, x);
        assert_eq!(ds.labels.unwrap(), vec![0, 1, 1]);
    }

    #[test]
    fn minmax_examples() {
        let x = DataMatrix::from_rows(&[[2.0, 5.0, 0.0], [4.0, 5.0, 0.25], [6.0, 5.0, 1.0]]).unwrap();
        let y = minmax_normalize(&x);
        assert_eq!(y.column(0), vec![0.0, 0.5, 1.0]);
        assert_eq!(y.column(1), vec![0.0, 0.0, 0.0]);
        assert_eq!(y.column(2), vec![0.0, 0.25, 1.0]);
    }

    #[test]
    fn pca_rank_one() {
        // X = u v^T plus a constant offset; one direction carries all variance.
        let u: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin() + 0.1 * i as f64).collect();
        let v = [0.3, -1.2, 0.5, 2.0];
        let rows: Vec<Vec<f64>> = u.iter().map(|ui| v.iter().map(|vj| ui * vj + 1.0).collect()).collect();
        let x = DataMatrix::from_rows(&rows).unwrap();
        let pca = Pca::fit(&x, 2).unwrap();
        assert!(pca.explained_variance[1] <= 1e-10 * pca.explained_variance[0]);

        // Oracle: dense eigendecomposition of the covariance, computed directly.
        let n = x.nrows() as f64;
        let mean: Vec<f64> = (0..4).map(|j| x.column(j).iter().sum::<f64>() / n).collect();
        let cov = DMatrix::from_fn(4, 4, |a, b| {
            (0..x.nrows()).map(|i| (x.get(i, a) - mean[a]) * (x.get(i, b) - mean[b])).sum::<f64>() / (n - 1.0)
        });
        let top = SymmetricEigen::new(cov).eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
        assert!((top - pca.explained_variance[0]).abs() <= 1e-9 * top);
    }

    #[test]
    fn pca_noop_below_target() {
        let x = DataMatrix::from_rows(&[[0.1, 0.2], [0.3, 0.9], [0.5, 0.4]]).unwrap();
        assert_eq!(pca_reduce(&x, 50).unwrap(), x);
    }

    #[test]
    fn pca_needs_two_rows() {
        let x = DataMatrix::from_rows(&[[0.1, 0.2, 0.3]]).unwrap();
        assert!(pca_reduce(&x, 1).is_err());
    }

    fn synthetic(n: usize, d: usize) -> RawDataset {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..d).map(|j| ((i * 31 + j * 17) % 97) as f64 + 0.01 * j as f64).collect())
            .collect();
        RawDataset::new("syn", DataMatrix::from_rows(&rows).unwrap(), None).unwrap()
    }

    #[test]
    fn preprocess_trigger_rules() {
        let cfg = PreprocessConfig::default();
        // small and low-dimensional: untouched dimension
        let p = preprocess(&synthetic(178, 13), &cfg).unwrap();
        assert_eq!((p.dim(), p.pca_applied), (13, false));
        // wide: 57 -> 50
        let p = preprocess(&synthetic(300, 57), &cfg).unwrap();
        assert_eq!((p.dim(), p.pca_applied), (50, true));
        // many samples, narrow: trigger fires but PCA is a no-op
        let p = preprocess(&synthetic(5200, 9), &cfg).unwrap();
        assert_eq!((p.dim(), p.pca_applied), (9, false));
    }
}
