use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;

/// Symmetric m x m sparse matrix in CSR form.
#[derive(Clone, Debug, PartialEq)]
pub struct SymCsr {
    pub dim: usize,
    pub indptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SymCsr {
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, p: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[p]..self.indptr[p + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        let (c, v) = self.row(p);
        c.binary_search(&q).map_or(0.0, |j| v[j])
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(p, out)| {
            let (c, v) = self.row(p);
            *out = c.iter().zip(v).map(|(&q, &w)| w * x[q]).sum();
        });
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.dim]; self.dim];
        for (p, row) in d.iter_mut().enumerate() {
            let (c, v) = self.row(p);
            for (&q, &w) in c.iter().zip(v) {
                row[q] = w;
            }
        }
        d
    }

    /// Principal submatrix on `keep` (ascending indices), re-indexed.
    pub fn restrict(&self, keep: &[usize]) -> SymCsr {
        let mut map = vec![usize::MAX; self.dim];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut indptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for &p in keep {
            let (c, v) = self.row(p);
            for (&q, &w) in c.iter().zip(v) {
                if map[q] != usize::MAX {
                    cols.push(map[q]);
                    vals.push(w);
                }
            }
            indptr.push(cols.len());
        }
        SymCsr {
            dim: keep.len(),
            indptr,
            cols,
            vals,
        }
    }
}

/// Landmark affinity W = B^T D_x^-1 B with its degree vectors.
#[derive(Clone, Debug)]
pub struct LandmarkAffinity {
    pub w: SymCsr,
    /// Row sums of B.
    pub dx: Vec<f64>,
    /// Row sums of W.
    pub dl: Vec<f64>,
}

impl LandmarkAffinity {
    pub fn m(&self) -> usize {
        self.w.dim
    }

    /// Normalized operator y = D_l^-1/2 W D_l^-1/2 x. Landmarks with zero
    /// degree map to zero.
    pub fn apply_normalized(&self, x: &[f64], y: &mut [f64]) {
        let inv_sqrt: Vec<f64> = self.dl.iter().map(|&d| if d > 0.0 { d.sqrt().recip() } else { 0.0 }).collect();
        let scaled: Vec<f64> = x.iter().zip(&inv_sqrt).map(|(v, s)| v * s).collect();
        self.w.matvec(&scaled, y);
        for (v, s) in y.iter_mut().zip(&inv_sqrt) {
            *v *= s;
        }
    }

    /// Unit-norm trivial eigenvector D_l^1/2 1 of the normalized operator.
    pub fn trivial_vector(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.dl.iter().map(|d| d.max(0.0).sqrt()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut v {
            *x /= norm;
        }
        v
    }

    /// Connected components of the landmark graph among landmarks with
    /// positive degree, largest first (ties by smallest member).
    pub fn components(&self) -> Vec<Vec<usize>> {
        let m = self.m();
        let mut seen = vec![false; m];
        let mut comps = Vec::new();
        for start in 0..m {
            if seen[start] || self.dl[start] <= 0.0 {
                continue;
            }
            let mut stack = vec![start];
            let mut comp = Vec::new();
            seen[start] = true;
            while let Some(p) = stack.pop() {
                comp.push(p);
                let (c, v) = self.w.row(p);
                for (&q, &w) in c.iter().zip(v) {
                    if w > 0.0 && !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        comps
    }
}

/// W = B^T diag(B 1)^-1 B accumulated landmark by landmark (O(n k^2)).
pub fn landmark_affinity(b: &BipartiteGraph) -> Result<LandmarkAffinity> {
    let (n, m) = (b.n(), b.m());
    let dx = b.row_sums();
    if let Some(i) = dx.iter().position(|&d| d <= 0.0) {
        return Err(Error::IsolatedSample { sample: i });
    }

    // column view of B: for each slot, (sample, weight) in sample order
    let mut col_ptr = vec![0usize; m + 1];
    for (_, p, _) in b.iter() {
        col_ptr[p + 1] += 1;
    }
    for p in 0..m {
        col_ptr[p + 1] += col_ptr[p];
    }
    let mut fill = col_ptr.clone();
    let mut col_rows = vec![0usize; b.nnz()];
    let mut col_vals = vec![0.0; b.nnz()];
    for i in 0..n {
        let (s, w) = b.row(i);
        for (&p, &v) in s.iter().zip(w) {
            col_rows[fill[p]] = i;
            col_vals[fill[p]] = v;
            fill[p] += 1;
        }
    }

    let rows: Vec<(Vec<usize>, Vec<f64>)> = (0..m)
        .into_par_iter()
        .map_init(
            || (vec![0.0f64; m], vec![false; m], Vec::<usize>::new()),
            |(acc, mark, touched), p| {
                for e in col_ptr[p]..col_ptr[p + 1] {
                    let (i, bip) = (col_rows[e], col_vals[e]);
                    let (s, w) = b.row(i);
                    for (&q, &biq) in s.iter().zip(w) {
                        if !mark[q] {
                            mark[q] = true;
                            touched.push(q);
                        }
                        acc[q] += bip * biq / dx[i];
                    }
                }
                touched.sort_unstable();
                let cols = touched.clone();
                let vals: Vec<f64> = touched.iter().map(|&q| acc[q]).collect();
                for &q in touched.iter() {
                    acc[q] = 0.0;
                    mark[q] = false;
                }
                touched.clear();
                (cols, vals)
            },
        )
        .collect();

    let mut indptr = Vec::with_capacity(m + 1);
    indptr.push(0);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    for (c, v) in rows {
        cols.extend(c);
        vals.extend(v);
        indptr.push(cols.len());
    }
    let w = SymCsr {
        dim: m,
        indptr,
        cols,
        vals,
    };
    let dl = (0..m).map(|p| w.row(p).1.iter().sum()).collect();
    Ok(LandmarkAffinity { w, dx, dl })
}
