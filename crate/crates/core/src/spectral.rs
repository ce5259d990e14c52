//! Symmetric eigenanalysis and the mode-counting functions built on it.
//!
//! For a symmetric matrix `A` and period `T` the thresholds
//! `4 k^2 pi^2 / T^2` (k = 0, 1, 2, ...) split the spectrum. `j_k(A, T)` counts
//! eigenvalues (with multiplicity) strictly above threshold `k`; an eigenvalue
//! sitting on a threshold is a resonance.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("matrix data has {got} entries, expected {n}x{n}")]
    Shape { n: usize, got: usize },
    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },
    #[error("matrix entry [{i}][{j}] is not finite")]
    NonFinite { i: usize, j: usize },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("eigenvalue {eigenvalue} is resonant with mode {k} (threshold {threshold})")]
    Resonant {
        k: u32,
        eigenvalue: f64,
        threshold: f64,
    },
    #[error("period must be positive and finite, got {0}")]
    BadPeriod(f64),
    #[error("cannot parse matrix entry {token:?}: {reason}")]
    Parse { token: String, reason: String },
}

/// Relative tolerances; each is scaled by `1 + ||A||_F` of the matrix at hand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Eigenvalues closer than this are merged into one cluster.
    pub cluster: f64,
    /// Eigenvalues closer than this to a threshold count as resonant.
    pub resonance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            cluster: 1e-9,
            resonance: 1e-8,
        }
    }
}

/// Dense real symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self, SpectralError> {
        if data.len() != n * n {
            return Err(SpectralError::Shape { n, got: data.len() });
        }
        let mut max_abs: f64 = 0.0;
        for (idx, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(SpectralError::NonFinite {
                    i: idx / n,
                    j: idx % n,
                });
            }
            max_abs = max_abs.max(v.abs());
        }
        let tol = 1e-12 * (1.0 + max_abs);
        for i in 0..n {
            for j in (i + 1)..n {
                let gap = (data[i * n + j] - data[j * n + i]).abs();
                if gap > tol {
                    return Err(SpectralError::NotSymmetric { i, j, gap });
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, SpectralError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(SpectralError::Shape {
                    n,
                    got: n * row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(n, data)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, 1.0)
    }

    pub fn scalar(n: usize, c: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = c;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// `Q diag(d) Q^T` for a column-major orthogonal `q`.
    pub fn from_eigen(q: &[f64], d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = (0..n).map(|k| q[k * n + i] * d[k] * q[k * n + j]).sum();
            }
        }
        m.symmetrize();
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `alpha * self + beta * other`.
    pub fn lin_comb(&self, alpha: f64, other: &SymMatrix, beta: f64) -> SymMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        SymMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        }
    }

    /// Adds `c` to every diagonal entry.
    pub fn shifted(&self, c: f64) -> SymMatrix {
        let mut m = self.clone();
        for i in 0..self.n {
            m.data[i * self.n + i] += c;
        }
        m
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = v;
                self.data[j * n + i] = v;
            }
        }
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = SpectralError;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, SpectralError> {
        SymMatrix::from_rows(&rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.rows()
    }
}

/// Parses a matrix entry such as `"7/2"` or `"1-1/(2*sqrt(2))"`.
pub fn parse_entry(token: &str) -> Result<f64, SpectralError> {
    let v = meval::eval_str(token).map_err(|e| SpectralError::Parse {
        token: token.to_string(),
        reason: e.to_string(),
    })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SpectralError::Parse {
            token: token.to_string(),
            reason: "value is not finite".into(),
        })
    }
}

/// One matrix entry as it appears in input files: a number or an expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixEntry {
    Number(f64),
    Expr(String),
}

impl MatrixEntry {
    pub fn value(&self) -> Result<f64, SpectralError> {
        match self {
            MatrixEntry::Number(v) => Ok(*v),
            MatrixEntry::Expr(s) => parse_entry(s),
        }
    }
}

pub fn matrix_from_entries(rows: &[Vec<MatrixEntry>]) -> Result<SymMatrix, SpectralError> {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(MatrixEntry::value).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    SymMatrix::from_rows(&rows)
}

/// Threshold `4 k^2 pi^2 / T^2`.
pub fn mode_threshold(k: u32, period: f64) -> f64 {
    let w = 2.0 * PI * f64::from(k) / period;
    w * w
}

/// Eigen-decomposition with eigenvalues merged into clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    /// Cluster representatives, ascending.
    pub eigenvalues: Vec<f64>,
    /// Multiplicity of each cluster; sums to `n`.
    pub multiplicities: Vec<usize>,
    /// All `n` eigenvalues, ascending.
    pub raw_eigenvalues: Vec<f64>,
    /// Column-major orthogonal matrix; column `i` belongs to `raw_eigenvalues[i]`.
    pub eigenbasis: Vec<f64>,
    pub cluster_tol: f64,
    pub resonance_tol: f64,
    pub n: usize,
}

/// Mode resonances of `A` for period `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub resonant_ks: BTreeSet<u32>,
    pub matched_eigenvalues: BTreeMap<u32, f64>,
    pub k_cutoff: u32,
    pub tol_res: f64,
}

impl ResonanceReport {
    /// Resonant modes `k >= 1`.
    pub fn positive_modes(&self) -> BTreeSet<u32> {
        self.resonant_ks.iter().copied().filter(|&k| k >= 1).collect()
    }

    pub fn singular(&self) -> bool {
        self.resonant_ks.contains(&0)
    }
}

/// Morse index with a flag for eigenvalues too close to zero to classify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorseIndex {
    pub count: usize,
    pub degenerate: bool,
}

pub fn eigen_sym(a: &SymMatrix) -> Result<SpectralData, SpectralError> {
    eigen_sym_with(a, Tolerances::default())
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops to
/// `1e-13 (1 + ||A||_F)`.
pub fn eigen_sym_with(a: &SymMatrix, tol: Tolerances) -> Result<SpectralData, SpectralError> {
    const MAX_SWEEPS: usize = 100;
    let n = a.n;
    let scale = 1.0 + a.frobenius_norm();
    let stop = 1e-13 * scale;
    let mut m = a.data.clone();
    // v is column-major: v[col * n + row]
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&m) > stop {
        if sweeps == MAX_SWEEPS {
            return Err(SpectralError::NoConvergence {
                sweeps,
                off: off(&m),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[p * n + k];
                    let vkq = v[q * n + k];
                    v[p * n + k] = c * vkp - s * vkq;
                    v[q * n + k] = s * vkp + c * vkq;
                }
            }
        }
    }

    // Ascending by value, ties by original diagonal position.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]).then(i.cmp(&j)));
    let raw_eigenvalues: Vec<f64> = order.iter().map(|&i| m[i * n + i]).collect();
    let mut eigenbasis = Vec::with_capacity(n * n);
    for &col in &order {
        let mut column: Vec<f64> = v[col * n..(col + 1) * n].to_vec();
        // Sign convention: the largest-magnitude component is positive.
        let lead = column
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (i, &x)| {
                if x.abs() > best.1.abs() + 1e-12 {
                    (i, x)
                } else {
                    best
                }
            })
            .1;
        if lead < 0.0 {
            column.iter_mut().for_each(|x| *x = -*x);
        }
        eigenbasis.extend(column);
    }

    let cluster_tol = tol.cluster * scale;
    let mut eigenvalues = Vec::new();
    let mut multiplicities = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && raw_eigenvalues[end] - raw_eigenvalues[end - 1] <= cluster_tol {
            end += 1;
        }
        let group = &raw_eigenvalues[start..end];
        eigenvalues.push(group.iter().sum::<f64>() / group.len() as f64);
        multiplicities.push(end - start);
        start = end;
    }

    Ok(SpectralData {
        eigenvalues,
        multiplicities,
        raw_eigenvalues,
        eigenbasis,
        cluster_tol,
        resonance_tol: tol.resonance * scale,
        n,
    })
}

impl SpectralData {
    /// Column `i` of the eigenbasis.
    pub fn eigenvector(&self, i: usize) -> &[f64] {
        &self.eigenbasis[i * self.n..(i + 1) * self.n]
    }

    /// Indices into `raw_eigenvalues` belonging to cluster `c`.
    pub fn cluster_columns(&self, c: usize) -> std::ops::Range<usize> {
        let start: usize = self.multiplicities[..c].iter().sum();
        start..start + self.multiplicities[c]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Smallest `K` with `4 K^2 pi^2 / T^2 > max eigenvalue`.
    pub fn k_cutoff(&self, period: f64) -> u32 {
        let lmax = self.max_eigenvalue();
        if lmax < 0.0 {
            return 0;
        }
        let mut k = (period * lmax.sqrt() / (2.0 * PI)).floor() as u32;
        while mode_threshold(k, period) <= lmax {
            k += 1;
        }
        k
    }

    /// Cluster within the resonance tolerance of threshold `k`, if any.
    pub fn resonant_cluster(&self, period: f64, k: u32) -> Option<usize> {
        let thr = mode_threshold(k, period);
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &e)| (e - thr).abs() <= self.resonance_tol)
            .min_by(|a, b| (a.1 - thr).abs().total_cmp(&(b.1 - thr).abs()))
            .map(|(i, _)| i)
    }

    /// `j_k(A, T)`; a resonant threshold is an error.
    pub fn j_k(&self, period: f64, k: u32) -> Result<usize, SpectralError> {
        check_period(period)?;
        if let Some(c) = self.resonant_cluster(period, k) {
            return Err(SpectralError::Resonant {
                k,
                eigenvalue: self.eigenvalues[c],
                threshold: mode_threshold(k, period),
            });
        }
        Ok(self.count_above(period, k))
    }

    /// Multiplicity of clusters strictly above threshold `k`, where clusters
    /// within the resonance tolerance count as equal to it (not above).
    pub fn count_above(&self, period: f64, k: u32) -> usize {
        let thr = mode_threshold(k, period);
        self.eigenvalues
            .iter()
            .zip(&self.multiplicities)
            .filter(|(&e, _)| e > thr + self.resonance_tol)
            .map(|(_, &m)| m)
            .sum()
    }

    pub fn resonance_report(&self, period: f64) -> Result<ResonanceReport, SpectralError> {
        check_period(period)?;
        let k_cutoff = self.k_cutoff(period);
        let mut resonant_ks = BTreeSet::new();
        let mut matched_eigenvalues = BTreeMap::new();
        for k in 0..=k_cutoff {
            if let Some(c) = self.resonant_cluster(period, k) {
                resonant_ks.insert(k);
                matched_eigenvalues.insert(k, self.eigenvalues[c]);
            }
        }
        Ok(ResonanceReport {
            resonant_ks,
            matched_eigenvalues,
            k_cutoff,
            tol_res: self.resonance_tol,
        })
    }

    pub fn morse_index(&self) -> MorseIndex {
        MorseIndex {
            count: self
                .raw_eigenvalues
                .iter()
                .filter(|&&e| e < -self.cluster_tol)
                .count(),
            degenerate: self.raw_eigenvalues.iter().any(|e| e.abs() <= self.cluster_tol),
        }
    }

    /// Number of eigenvalues above `cluster_tol`.
    pub fn positive_count(&self) -> usize {
        self.raw_eigenvalues
            .iter()
            .filter(|&&e| e > self.cluster_tol)
            .count()
    }

    pub fn is_singular(&self) -> bool {
        self.morse_index().degenerate
    }
}

fn check_period(period: f64) -> Result<(), SpectralError> {
    if period > 0.0 && period.is_finite() {
        Ok(())
    } else {
        Err(SpectralError::BadPeriod(period))
    }
}

/// `j_k(A, T)` with default tolerances.
pub fn j_k(a: &SymMatrix, period: f64, k: u32) -> Result<usize, SpectralError> {
    eigen_sym(a)?.j_k(period, k)
}

pub fn resonance_report(a: &SymMatrix, period: f64) -> Result<ResonanceReport, SpectralError> {
    eigen_sym(a)?.resonance_report(period)
}

pub fn morse_index(a: &SymMatrix) -> Result<MorseIndex, SpectralError> {
    Ok(eigen_sym(a)?.morse_index())
}

/// The mode-`k` block of the linearised gradient,
/// `(4k^2 pi^2 Id - T^2 A) / (4k^2 pi^2 + T^2)`.
pub fn lambda_block(a: &SymMatrix, period: f64, k: u32) -> SymMatrix {
    let w = 4.0 * PI * PI * f64::from(k) * f64::from(k);
    let t2 = period * period;
    let denom = w + t2;
    SymMatrix::identity(a.dim()).lin_comb(w / denom, a, -t2 / denom)
}
