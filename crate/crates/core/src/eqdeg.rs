//! Equivariant degree of linearisations and the per-point indices.
//!
//! For a non-resonant symmetric `A` the degree of the linear gradient
//! `Id - L_A` on the loop space is
//!
//! ```text
//! SO(2): (-1)^{j_0}
//! Z_k:   (-1)^{j_0} * j_k      (k >= 1)
//! ```
//!
//! [`linear_degree_via_product`] reaches the same element by a second route:
//! it builds the negative eigenspaces of `L_A` as circle representations and
//! multiplies the degrees of `-Id` on each of them.
//!
//! The index of a stationary point `p` scales `(1, j_1, j_2, ...)` of its
//! Hessian by the Brouwer index `ind(-V', p)`. If `V''(p)` resonates with
//! modes `k_1..k_r`, every coordinate whose index is a gcd of a nonempty subset
//! of those modes is left undefined.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ring::{product_many, RingElement, RingError};
use crate::spectral::{mode_threshold, SpectralData, SpectralError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DegreeError {
    #[error("linearisation is resonant at modes {0:?}")]
    Resonant(BTreeSet<u32>),
    #[error("matrix is singular; use the degenerate Brouwer index")]
    Singular,
    #[error("gradient vanishes on the sampling sphere (|f| = {norm:e} at {point:?})")]
    ZeroOnSphere { point: Vec<f64>, norm: f64 },
    #[error("boundary sampling too coarse: winding increment {increment:.3} rad")]
    CoarseSampling { increment: f64 },
    #[error("degree estimate {estimate} is not close to an integer")]
    NonIntegral { estimate: f64 },
    #[error("direct Brouwer oracle supports n <= 3, got n = {0}")]
    DimensionTooLarge(usize),
    #[error("Brouwer index of {0} is unavailable (singular Hessian, no override)")]
    MissingBrouwer(PointId),
    #[error("{0} Brouwer indices are unavailable; the sum formula can recover at most one")]
    TooManyUnknown(usize),
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Owner of an index: a listed stationary point or the point at infinity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointId {
    Finite(String),
    Infinity,
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointId::Finite(id) => write!(f, "{id}"),
            PointId::Infinity => write!(f, "infinity"),
        }
    }
}

/// Isotypic decomposition `R[j_1, k_1] + ... + R[j_r, k_r]`, `k_1 < ... < k_r`.
///
/// `R[j, 0]` is the trivial `j`-dimensional representation; for `k >= 1`,
/// `R[j, k]` is `j` copies of the plane rotated with speed `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepresentationDescriptor {
    parts: Vec<(u32, u32)>,
}

impl RepresentationDescriptor {
    /// Builds the canonical form from `(multiplicity, mode)` pairs; equal
    /// modes are merged and zero multiplicities dropped.
    pub fn new(parts: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut by_mode: BTreeMap<u32, u32> = BTreeMap::new();
        for (j, k) in parts {
            if j > 0 {
                *by_mode.entry(k).or_default() += j;
            }
        }
        Self {
            parts: by_mode.into_iter().map(|(k, j)| (j, k)).collect(),
        }
    }

    /// `(multiplicity, mode)` pairs with strictly increasing modes.
    pub fn parts(&self) -> &[(u32, u32)] {
        &self.parts
    }

    pub fn trivial_multiplicity(&self) -> u32 {
        self.parts
            .iter()
            .find(|&&(_, k)| k == 0)
            .map_or(0, |&(j, _)| j)
    }

    pub fn real_dimension(&self) -> u32 {
        self.parts
            .iter()
            .map(|&(j, k)| if k == 0 { j } else { 2 * j })
            .sum()
    }
}

/// Degree of `-Id` on a ball in the given representation:
/// `(-1)^{j_0}` at `SO(2)` and `(-1)^{j_0} j_i` at `Z_{k_i}`.
pub fn neg_identity_degree(rep: &RepresentationDescriptor) -> RingElement {
    let sign: i64 = if rep.trivial_multiplicity().is_multiple_of(2) { 1 } else { -1 };
    let bound = rep.parts.iter().map(|&(_, k)| k).max().unwrap_or(1).max(1);
    RingElement::new(
        sign,
        rep.parts
            .iter()
            .filter(|&&(_, k)| k >= 1)
            .map(|&(j, k)| (k, sign * i64::from(j))),
        [],
        bound,
    )
    .expect("modes are positive")
}

fn require_nonresonant(spec: &SpectralData, period: f64) -> Result<u32, DegreeError> {
    let report = spec.resonance_report(period)?;
    if !report.resonant_ks.is_empty() {
        return Err(DegreeError::Resonant(report.resonant_ks));
    }
    Ok(report.k_cutoff)
}

/// Degree of `Id - L_A` on a small ball, from the counts `j_k(A, T)`.
pub fn linear_degree(spec: &SpectralData, period: f64) -> Result<RingElement, DegreeError> {
    let k_cutoff = require_nonresonant(spec, period)?;
    let j0 = spec.j_k(period, 0)?;
    let sign: i64 = if j0 % 2 == 0 { 1 } else { -1 };
    let mut zk = Vec::new();
    for k in 1..=k_cutoff {
        let jk = spec.j_k(period, k)?;
        zk.push((k, sign * jk as i64));
    }
    Ok(RingElement::new(sign, zk, [], k_cutoff.max(1))?)
}

/// Eigenvalue of `L_A` on mode `k` for an eigenvalue `alpha` of `A`.
fn loop_operator_eigenvalue(alpha: f64, period: f64, k: u32) -> f64 {
    if k == 0 {
        1.0 + alpha
    } else {
        let w = 4.0 * PI * PI * f64::from(k) * f64::from(k);
        period * period * (1.0 + alpha) / (w + period * period)
    }
}

/// Same degree as [`linear_degree`], assembled as a product over the
/// eigenspaces of `L_A` with eigenvalue above 1.
pub fn linear_degree_via_product(
    spec: &SpectralData,
    period: f64,
) -> Result<RingElement, DegreeError> {
    let k_cutoff = require_nonresonant(spec, period)?;
    // (eigenvalue of L_A, multiplicity of alpha, mode)
    let mut pieces: Vec<(f64, u32, u32)> = Vec::new();
    for (&alpha, &mult) in spec.eigenvalues.iter().zip(&spec.multiplicities) {
        for k in 0..=k_cutoff {
            if alpha > mode_threshold(k, period) {
                pieces.push((loop_operator_eigenvalue(alpha, period, k), mult as u32, k));
            }
        }
    }
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Pieces with equal L_A eigenvalue share one eigenspace.
    let mut factors = Vec::new();
    let mut i = 0;
    while i < pieces.len() {
        let mut j = i + 1;
        while j < pieces.len()
            && pieces[j].0 - pieces[j - 1].0 <= 1e-12 * (1.0 + pieces[j].0.abs())
        {
            j += 1;
        }
        let rep = RepresentationDescriptor::new(pieces[i..j].iter().map(|&(_, m, k)| (m, k)));
        factors.push(neg_identity_degree(&rep));
        i = j;
    }
    Ok(product_many(&factors)?.truncate(k_cutoff.max(1)))
}

/// `ind(-V', p) = sign det(-H) = (-1)^{#positive eigenvalues of H}`.
pub fn brouwer_index_nondegenerate(spec: &SpectralData) -> Result<i64, DegreeError> {
    if spec.is_singular() {
        return Err(DegreeError::Singular);
    }
    Ok(if spec.positive_count().is_multiple_of(2) { 1 } else { -1 })
}

/// Number of boundary samples per dimension for the direct oracle.
const SAMPLES_PER_DIM: usize = 10_000;

/// Brouwer degree of `-gradient` on the ball of radius `radius` about `p`,
/// computed from boundary values only (n <= 3).
///
/// * n = 1: sign change across the interval.
/// * n = 2: winding number of the image of the circle.
/// * n = 3: total signed solid angle of the image of a triangulated sphere.
pub fn brouwer_index_degenerate(
    gradient: &dyn Fn(&[f64]) -> Vec<f64>,
    p: &[f64],
    radius: f64,
) -> Result<i64, DegreeError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(DegreeError::BadRadius(radius));
    }
    let n = p.len();
    let field = |x: &[f64]| -> Vec<f64> { gradient(x).into_iter().map(|v| -v).collect() };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let eval = |x: Vec<f64>| -> Result<Vec<f64>, DegreeError> {
        let f = field(&x);
        let nf = norm(&f);
        if !(nf > 1e-300) || !nf.is_finite() {
            return Err(DegreeError::ZeroOnSphere { point: x, norm: nf });
        }
        Ok(f)
    };
    match n {
        1 => {
            let right = eval(vec![p[0] + radius])?[0].signum();
            let left = eval(vec![p[0] - radius])?[0].signum();
            Ok(((right - left) / 2.0) as i64)
        }
        2 => {
            let m = 2 * SAMPLES_PER_DIM;
            let point = |i: usize| {
                let th = 2.0 * PI * i as f64 / m as f64;
                vec![p[0] + radius * th.cos(), p[1] + radius * th.sin()]
            };
            let first = eval(point(0))?;
            let mut prev = first[1].atan2(first[0]);
            let mut total = 0.0;
            for i in 1..=m {
                let f = eval(point(i % m))?;
                let ang = f[1].atan2(f[0]);
                let mut d = ang - prev;
                while d > PI {
                    d -= 2.0 * PI;
                }
                while d < -PI {
                    d += 2.0 * PI;
                }
                if d.abs() > PI / 2.0 {
                    return Err(DegreeError::CoarseSampling { increment: d });
                }
                total += d;
                prev = ang;
            }
            round_degree(total / (2.0 * PI))
        }
        3 => {
            // UV sphere: n_lat * n_lon vertices, about SAMPLES_PER_DIM * 3.
            let n_lat = 100;
            let n_lon = 3 * SAMPLES_PER_DIM / n_lat;
            let vertex = |i: usize, j: usize| -> Vec<f64> {
                let th = PI * i as f64 / n_lat as f64;
                let ph = 2.0 * PI * (j % n_lon) as f64 / n_lon as f64;
                vec![
                    p[0] + radius * th.sin() * ph.cos(),
                    p[1] + radius * th.sin() * ph.sin(),
                    p[2] + radius * th.cos(),
                ]
            };
            let unit = |f: Vec<f64>| -> [f64; 3] {
                let nf = norm(&f);
                [f[0] / nf, f[1] / nf, f[2] / nf]
            };
            let north = unit(eval(vertex(0, 0))?);
            let south = unit(eval(vertex(n_lat, 0))?);
            let mut rings: Vec<Vec<[f64; 3]>> = Vec::with_capacity(n_lat - 1);
            for i in 1..n_lat {
                let ring = (0..n_lon)
                    .map(|j| eval(vertex(i, j)).map(unit))
                    .collect::<Result<Vec<_>, _>>()?;
                rings.push(ring);
            }
            let mut total = 0.0;
            // Triangles oriented so that the identity map has degree +1.
            for j in 0..n_lon {
                let jn = (j + 1) % n_lon;
                total += solid_angle(north, rings[0][j], rings[0][jn]);
                let last = &rings[n_lat - 2];
                total += solid_angle(south, last[jn], last[j]);
            }
            for r in 0..n_lat - 2 {
                for j in 0..n_lon {
                    let jn = (j + 1) % n_lon;
                    let (a, b) = (&rings[r], &rings[r + 1]);
                    total += solid_angle(a[j], b[j], b[jn]);
                    total += solid_angle(a[j], b[jn], a[jn]);
                }
            }
            round_degree(total / (4.0 * PI))
        }
        _ => Err(DegreeError::DimensionTooLarge(n)),
    }
}

/// Signed solid angle of the spherical triangle (a, b, c).
fn solid_angle(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let dot = |u: [f64; 3], v: [f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let cross = [
        b[1] * c[2] - b[2] * c[1],
        b[2] * c[0] - b[0] * c[2],
        b[0] * c[1] - b[1] * c[0],
    ];
    let num = dot(a, cross);
    let den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * num.atan2(den)
}

fn round_degree(estimate: f64) -> Result<i64, DegreeError> {
    let r = estimate.round();
    if (estimate - r).abs() > 0.1 {
        return Err(DegreeError::NonIntegral { estimate });
    }
    Ok(r as i64)
}

/// `ind(-V', infinity) = (-1)^{n - m^-(V''(inf))}` for the model family.
pub fn index_at_infinity_sign(v_inf: &SpectralData) -> i64 {
    let m = v_inf.morse_index().count;
    if (v_inf.n - m).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// All gcds of nonempty subsets of `modes`.
pub fn gcd_closure(modes: &BTreeSet<u32>) -> BTreeSet<u32> {
    let mut out = BTreeSet::new();
    for &k in modes {
        let mut next: BTreeSet<u32> = out.iter().map(|&g: &u32| g.gcd(&k)).collect();
        next.insert(k);
        out.extend(next);
    }
    out
}

/// Index `I_V(p, T)` of a stationary point together with its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivariantIndex {
    pub owner: PointId,
    pub value: RingElement,
    pub brouwer: i64,
    /// `j_k(V''(p), T)` for `k = 0..=k_cutoff`; at a resonant mode this is the
    /// count of eigenvalues strictly above the threshold.
    pub jk_table: BTreeMap<u32, usize>,
    pub resonant: bool,
    pub resonant_modes: BTreeSet<u32>,
    /// Coordinates this point forces out of every comparison.
    pub exclusion: BTreeSet<u32>,
    pub k_cutoff: u32,
    pub provenance: Vec<String>,
}

/// Computes `I_V(p, T)`.
///
/// `brouwer` may be omitted when the Hessian is nonsingular, in which case the
/// sign-determinant formula supplies it.
pub fn index_iv(
    owner: PointId,
    hessian: &SpectralData,
    brouwer: Option<i64>,
    period: f64,
) -> Result<EquivariantIndex, DegreeError> {
    let report = hessian.resonance_report(period)?;
    let mut provenance = Vec::new();
    let brouwer = match brouwer {
        Some(b) => {
            provenance.push("brouwer: supplied".to_string());
            b
        }
        None => {
            if report.singular() {
                return Err(DegreeError::MissingBrouwer(owner));
            }
            provenance.push("brouwer: sign det(-H)".to_string());
            brouwer_index_nondegenerate(hessian)?
        }
    };
    let resonant_modes = report.positive_modes();
    let exclusion = gcd_closure(&resonant_modes);
    let bound = report
        .k_cutoff
        .max(exclusion.iter().copied().max().unwrap_or(0))
        .max(1);
    let jk_table: BTreeMap<u32, usize> = (0..=bound)
        .map(|k| (k, hessian.count_above(period, k)))
        .collect();
    let value = RingElement::new(
        brouwer,
        jk_table
            .iter()
            .filter(|(&k, _)| k >= 1)
            .map(|(&k, &j)| (k, brouwer * j as i64)),
        exclusion.iter().copied(),
        bound,
    )?;
    provenance.push(format!(
        "Z_k coordinates: brouwer * j_k(H, T) for k in 1..={bound}, tol_res = {:e}",
        report.tol_res
    ));
    if !exclusion.is_empty() {
        provenance.push(format!(
            "undefined at {exclusion:?} (gcd closure of resonant modes {resonant_modes:?})"
        ));
    }
    Ok(EquivariantIndex {
        owner,
        value,
        brouwer,
        jk_table,
        resonant: !resonant_modes.is_empty(),
        resonant_modes,
        exclusion,
        k_cutoff: report.k_cutoff,
        provenance,
    })
}

/// How a Brouwer index was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BrouwerSource {
    Override,
    SignDeterminant,
    BoundaryOracle,
    InfinityMorseFormula,
    SumFormulaResidual,
}

impl fmt::Display for BrouwerSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BrouwerSource::Override => "supplied override",
            BrouwerSource::SignDeterminant => "sign det(-V'')",
            BrouwerSource::BoundaryOracle => "boundary degree oracle",
            BrouwerSource::InfinityMorseFormula => "(-1)^(n - m^-(V''(inf)))",
            BrouwerSource::SumFormulaResidual => "sum-formula residual",
        };
        f.write_str(s)
    }
}

/// Fills in at most one missing Brouwer index from
/// `ind(-V', inf) = sum_i ind(-V', p_i)`.
pub fn resolve_brouwer(
    finite: &[Option<i64>],
    infinity: Option<i64>,
) -> Result<(Vec<i64>, i64, Option<PointSlot>), DegreeError> {
    let missing: Vec<usize> = finite
        .iter()
        .enumerate()
        .filter(|(_, b)| b.is_none())
        .map(|(i, _)| i)
        .collect();
    let unknown = missing.len() + usize::from(infinity.is_none());
    if unknown > 1 {
        return Err(DegreeError::TooManyUnknown(unknown));
    }
    let known_sum: i64 = finite.iter().flatten().sum();
    match (infinity, missing.first()) {
        (Some(inf), None) => Ok((finite.iter().map(|b| b.unwrap()).collect(), inf, None)),
        (Some(inf), Some(&i)) => {
            let mut out: Vec<i64> = finite.iter().map(|b| b.unwrap_or(0)).collect();
            out[i] = inf - known_sum;
            Ok((out, inf, Some(PointSlot::Finite(i))))
        }
        (None, _) => Ok((
            finite.iter().map(|b| b.unwrap()).collect(),
            known_sum,
            Some(PointSlot::Infinity),
        )),
    }
}

/// Which index [`resolve_brouwer`] reconstructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointSlot {
    Finite(usize),
    Infinity,
}
