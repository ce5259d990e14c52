use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::fourier::{minimal_period_of, FourierLoop};
use super::orbit::{pinned_index, pinned_partner, OrbitResult};
use super::problem::GalerkinSystem;
use super::GalerkinError;
use crate::spectral::SymMatrix;
use crate::systems::Potential;

/// One-parameter family of potentials `V_lambda`.
pub trait ParameterFamily: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn at(&self, lambda: f64) -> Arc<dyn Potential>;
    /// `d/dlambda V_lambda'(x)`.
    fn lambda_gradient(&self, lambda: f64, x: &[f64]) -> Vec<f64>;
}

/// `V_lambda = V_0` for every `lambda`.
#[derive(Debug, Clone)]
pub struct ConstantFamily {
    pub base: Arc<dyn Potential>,
}

impl ParameterFamily for ConstantFamily {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn at(&self, _lambda: f64) -> Arc<dyn Potential> {
        self.base.clone()
    }

    fn lambda_gradient(&self, _lambda: f64, x: &[f64]) -> Vec<f64> {
        vec![0.0; x.len()]
    }
}

/// `V_lambda(x) = V_0(x) + lambda/2 |x|^2`.
#[derive(Debug, Clone)]
pub struct ShiftedFamily {
    pub base: Arc<dyn Potential>,
}

#[derive(Debug, Clone)]
pub struct ShiftedPotential {
    pub base: Arc<dyn Potential>,
    pub lambda: f64,
}

impl Potential for ShiftedPotential {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.base.value(x) + 0.5 * self.lambda * x.iter().map(|v| v * v).sum::<f64>()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.base.gradient(x);
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi += self.lambda * xi;
        }
        g
    }

    fn hessian(&self, x: &[f64]) -> SymMatrix {
        self.base.hessian(x).shifted(self.lambda)
    }
}

impl ParameterFamily for ShiftedFamily {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn at(&self, lambda: f64) -> Arc<dyn Potential> {
        Arc::new(ShiftedPotential {
            base: self.base.clone(),
            lambda,
        })
    }

    fn lambda_gradient(&self, _lambda: f64, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchConfig {
    pub h_min: f64,
    pub h_max: f64,
    pub h_init: f64,
    pub lambda_bound: f64,
    /// Coefficient-norm bound, in units of the length scale.
    pub radius_factor: f64,
    pub length_scale: f64,
    pub max_steps: usize,
    pub corrector_tol: f64,
    pub max_corrector: usize,
    pub stationary_tol: f64,
}

impl Default for BranchConfig {
    fn default() -> Self {
        Self {
            h_min: 1e-4,
            h_max: 0.1,
            h_init: 0.01,
            lambda_bound: 1e3,
            radius_factor: 1e3,
            length_scale: 1.0,
            max_steps: 20_000,
            corrector_tol: 1e-9,
            max_corrector: 8,
            stationary_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchVerdict {
    Unbounded,
    HitStationary,
    StepFailure,
}

impl fmt::Display for BranchVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BranchVerdict::Unbounded => "unbounded",
            BranchVerdict::HitStationary => "hit-stationary",
            BranchVerdict::StepFailure => "step-failure",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub step: usize,
    pub lambda: f64,
    pub coefficient_norm: f64,
    pub distance_to_stationary: f64,
    /// `None` once the loop is indistinguishable from a constant.
    pub isotropy_k: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub direction: f64,
    pub verdict: BranchVerdict,
    pub reason: String,
    pub steps: usize,
    pub final_lambda: f64,
    pub points: Vec<BranchPoint>,
    /// `(step, from, to)` for every change of the isotropy index.
    pub isotropy_changes: Vec<(usize, Option<u32>, Option<u32>)>,
    pub symmetry_breaking: bool,
    pub final_loop: FourierLoop,
}

impl BranchRecord {
    pub fn isotropy_constant(&self) -> bool {
        self.isotropy_changes.is_empty()
    }
}

struct Tracer<'a> {
    family: &'a dyn ParameterFamily,
    template: &'a GalerkinSystem,
    keep: Vec<usize>,
    pin: usize,
}

impl Tracer<'_> {
    fn full(&self, y: &[f64]) -> Vec<f64> {
        let mut c = vec![0.0; self.template.len()];
        for (v, &i) in y.iter().zip(&self.keep) {
            c[i] = *v;
        }
        c[self.pin] = 0.0;
        c
    }

    fn system(&self, lambda: f64) -> GalerkinSystem {
        self.template.with_potential(self.family.at(lambda))
    }

    /// Residual `F(y)` of the reduced gradient; `y` carries lambda last.
    fn residual(&self, y: &[f64]) -> Result<Vec<f64>, GalerkinError> {
        let (lambda, c) = (y[y.len() - 1], self.full(&y[..y.len() - 1]));
        let g = self.system(lambda).gradient(&c)?;
        Ok(self.keep.iter().map(|&i| g[i]).collect())
    }

    /// `[J_c | J_lambda]` of the reduced residual.
    fn jacobian(&self, y: &[f64]) -> Result<DMatrix<f64>, GalerkinError> {
        let (lambda, c) = (y[y.len() - 1], self.full(&y[..y.len() - 1]));
        let sys = self.system(lambda);
        let jc = sys.jacobian(&c)?.select_rows(&self.keep).select_columns(&self.keep);
        let jl = sys.nonlinear_term(&c, |x| self.family.lambda_gradient(lambda, x));
        let m = self.keep.len();
        let mut out = DMatrix::zeros(m, m + 1);
        out.view_mut((0, 0), (m, m)).copy_from(&jc);
        for (r, &i) in self.keep.iter().enumerate() {
            out[(r, m)] = jl[i];
        }
        Ok(out)
    }

    fn bordered(j: &DMatrix<f64>, tau: &DVector<f64>) -> DMatrix<f64> {
        let m = j.nrows();
        let mut b = DMatrix::zeros(m + 1, m + 1);
        b.view_mut((0, 0), (m, m + 1)).copy_from(j);
        for c in 0..=m {
            b[(m, c)] = tau[c];
        }
        b
    }

    fn tangent(&self, y: &[f64], prev: &DVector<f64>) -> Result<DVector<f64>, GalerkinError> {
        let j = self.jacobian(y)?;
        let m = j.nrows();
        let mut rhs = DVector::zeros(m + 1);
        rhs[m] = 1.0;
        let z = Self::bordered(&j, prev)
            .lu()
            .solve(&rhs)
            .ok_or(GalerkinError::SingularJacobian)?;
        let mut t = z.normalize();
        if t.dot(prev) < 0.0 {
            t = -t;
        }
        Ok(t)
    }

    /// Newton on `[F(y); tau . (y - y_pred)] = 0`; returns the corrected
    /// point and the iteration count.
    fn correct(
        &self,
        pred: &DVector<f64>,
        tau: &DVector<f64>,
        cfg: &BranchConfig,
    ) -> Result<(DVector<f64>, usize), GalerkinError> {
        let mut y = pred.clone();
        for it in 0..=cfg.max_corrector {
            let f = self.residual(y.as_slice())?;
            let fnorm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            if fnorm <= cfg.corrector_tol {
                return Ok((y, it));
            }
            if it == cfg.max_corrector || !fnorm.is_finite() {
                break;
            }
            let m = f.len();
            let mut rhs = DVector::zeros(m + 1);
            for (r, v) in f.iter().enumerate() {
                rhs[r] = -v;
            }
            rhs[m] = -tau.dot(&(&y - pred));
            let j = self.jacobian(y.as_slice())?;
            let d = Self::bordered(&j, tau)
                .lu()
                .solve(&rhs)
                .ok_or(GalerkinError::SingularJacobian)?;
            y += d;
        }
        Err(GalerkinError::Diverged {
            iterations: cfg.max_corrector,
            residual: f64::NAN,
        })
    }
}

fn point_at(step: usize, lambda: f64, u: &FourierLoop, cfg: &BranchConfig, samples: usize) -> BranchPoint {
    let d = u.distance_to_stationary(samples);
    BranchPoint {
        step,
        lambda,
        coefficient_norm: u.coefficient_norm(),
        distance_to_stationary: d,
        isotropy_k: if d < cfg.stationary_tol {
            None
        } else {
            minimal_period_of(u).ok().map(|(_, k)| k)
        },
    }
}

/// Whether the secant from `y0` to `y1` passes through a constant loop: the
/// pinned mode's cosine coefficient changes sign and the loop interpolated at
/// the sign change is much closer to a constant than both endpoints.
fn crossed_constant(
    y0: &DVector<f64>,
    y1: &DVector<f64>,
    partner: usize,
    to_loop: &dyn Fn(&DVector<f64>) -> FourierLoop,
    samples: usize,
) -> bool {
    let (p0, p1) = (y0[partner], y1[partner]);
    if p0.signum() == p1.signum() {
        return false;
    }
    let s = p0 / (p0 - p1);
    let mid = y0 + (y1 - y0) * s;
    let d0 = to_loop(y0).distance_to_stationary(samples);
    let d1 = to_loop(y1).distance_to_stationary(samples);
    to_loop(&mid).distance_to_stationary(samples) < 0.1 * d0.max(d1)
}

/// Pseudo-arclength continuation of `start` (an orbit of `V_0`) in the
/// family parameter, moving initially towards `sign(direction) * lambda`.
pub fn trace_branch(
    family: &dyn ParameterFamily,
    template: &GalerkinSystem,
    start: &OrbitResult,
    direction: f64,
    cfg: &BranchConfig,
) -> Result<BranchRecord, GalerkinError> {
    let n = template.n;
    let pin = pinned_index(n, start.pinned);
    let partner = pinned_partner(n, start.pinned);
    let keep: Vec<usize> = (0..template.len()).filter(|&i| i != pin).collect();
    let partner_pos = keep.iter().position(|&i| i == partner).expect("partner is free");
    let tracer = Tracer {
        family,
        template,
        keep,
        pin,
    };
    let c0 = start.fourier_loop.resized(template.modes).to_vec();
    let m = tracer.keep.len();
    let mut y = DVector::from_iterator(m + 1, tracer.keep.iter().map(|&i| c0[i]).chain([0.0]));
    let mut tau = DVector::zeros(m + 1);
    tau[m] = direction.signum();
    let samples = (8 * template.grid_size()).max(1024);
    let to_loop = |y: &DVector<f64>| template.to_loop(&tracer.full(&y.as_slice()[..m]));

    let first = point_at(0, 0.0, &to_loop(&y), cfg, samples);
    let mut points = vec![first];
    let mut changes = Vec::new();
    let mut h = cfg.h_init;
    let radius = cfg.radius_factor * cfg.length_scale;
    let finish = |verdict, reason: String, steps, y: &DVector<f64>, points, changes: Vec<_>| {
        let symmetry_breaking = verdict == BranchVerdict::HitStationary || !changes.is_empty();
        BranchRecord {
            direction: direction.signum(),
            verdict,
            reason,
            steps,
            final_lambda: y[m],
            points,
            isotropy_changes: changes,
            symmetry_breaking,
            final_loop: to_loop(y),
        }
    };

    for step in 1..=cfg.max_steps {
        tau = match tracer.tangent(y.as_slice(), &tau) {
            Ok(t) => t,
            Err(e) => {
                return Ok(finish(BranchVerdict::StepFailure, format!("tangent: {e}"), step - 1, &y, points, changes));
            }
        };
        let (next, iters) = loop {
            let pred = &y + &tau * h;
            match tracer.correct(&pred, &tau, cfg) {
                Ok(r) => break r,
                Err(_) if h * 0.5 >= cfg.h_min => h *= 0.5,
                Err(e) => {
                    return Ok(finish(
                        BranchVerdict::StepFailure,
                        format!("corrector failed at minimal step {h:e}: {e}"),
                        step - 1,
                        &y,
                        points,
                        changes,
                    ));
                }
            }
        };
        let crossed = crossed_constant(&y, &next, partner_pos, &to_loop, samples);
        y = next;
        if iters <= 3 {
            h = (2.0 * h).min(cfg.h_max);
        }
        let u = to_loop(&y);
        let pt = point_at(step, y[m], &u, cfg, samples);
        let prev_k = points.last().map(|p: &BranchPoint| p.isotropy_k).unwrap_or(None);
        if pt.isotropy_k != prev_k {
            changes.push((step, prev_k, pt.isotropy_k));
        }
        points.push(pt);
        if y[m].abs() > cfg.lambda_bound || pt.coefficient_norm > radius {
            let reason = format!("|lambda| = {:.3e}, coefficient norm = {:.3e}", y[m].abs(), pt.coefficient_norm);
            return Ok(finish(BranchVerdict::Unbounded, reason, step, &y, points, changes));
        }
        if pt.distance_to_stationary < cfg.stationary_tol || crossed {
            let reason = format!(
                "loop reached a constant at lambda = {:.6} (sup |u - a_0| = {:.3e})",
                y[m], pt.distance_to_stationary
            );
            return Ok(finish(BranchVerdict::HitStationary, reason, step, &y, points, changes));
        }
    }
    Ok(finish(
        BranchVerdict::StepFailure,
        format!("step budget of {} exhausted", cfg.max_steps),
        cfg.max_steps,
        &y,
        points,
        changes,
    ))
}
