use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::fourier::{index_a, index_b, minimal_period_of, FourierLoop};
use super::ode::{ode_residual, rk4_check, Rk4Check};
use super::problem::GalerkinSystem;
use super::GalerkinError;
use crate::spectral::{eigen_sym, mode_threshold};
use crate::systems::{Potential, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GalerkinConfig {
    pub modes: usize,
    /// Newton is rerun with doubled modes while the ODE residual or the
    /// spectral tail fails and the mode count stays within this bound.
    pub max_modes: usize,
    pub newton_tol: f64,
    pub max_newton: usize,
    pub ode_tol: f64,
    /// Loops with `sup |u - a_0|` below this count as stationary.
    pub stationary_tol: f64,
    /// Bound on the share of the top quarter of harmonics in the
    /// oscillating part of accepted orbits.
    pub tail_tol: f64,
    pub rk4_steps: usize,
    pub rk4_tol: f64,
}

impl Default for GalerkinConfig {
    fn default() -> Self {
        Self {
            modes: 64,
            max_modes: 256,
            newton_tol: 1e-10,
            max_newton: 50,
            ode_tol: 1e-7,
            stationary_tol: 1e-4,
            tail_tol: 1e-3,
            rk4_steps: 10_000,
            rk4_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedOrigin {
    /// Kernel of `Lambda(k)` at a point resonant with mode `k`.
    ResonantKernel,
    /// Eigenvector whose eigenvalue is the nearest one above `4k^2 pi^2/T^2`.
    AboveThreshold,
    /// Any eigenvector; no eigenvalue lies above the threshold.
    Fallback,
}

/// Initial loop `center + amplitude * direction * cos(2 k pi t / T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub center_id: String,
    pub center: Vec<f64>,
    pub mode: u32,
    pub direction: Vec<f64>,
    pub amplitude: f64,
    pub origin: SeedOrigin,
}

impl Seed {
    /// Coordinate of `direction` with the largest magnitude; the sine
    /// coefficient there is pinned to remove the time-shift freedom.
    pub fn pinned_component(&self) -> usize {
        self.direction
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map_or(0, |(j, _)| j)
    }

    pub fn to_loop(&self, modes: usize, period: f64) -> FourierLoop {
        let mut u = FourierLoop::constant(&self.center, modes, period);
        for (j, d) in self.direction.iter().enumerate() {
            u.coeffs[self.mode as usize - 1].0[j] = self.amplitude * d;
        }
        u
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitResult {
    #[serde(rename = "loop")]
    pub fourier_loop: FourierLoop,
    pub gradient_norm: f64,
    pub ode_residual: f64,
    pub minimal_period: f64,
    pub isotropy_k: u32,
    pub distance_to_stationary: f64,
    /// Norm of harmonics above `3N/4` over the oscillation norm.
    pub tail_ratio: f64,
    /// Mode count `N` of the accepted solve.
    pub modes: usize,
    pub newton_iterations: usize,
    /// `(k, j)`: the sine coefficient of mode `k`, component `j`, is zero.
    pub pinned: (usize, usize),
    pub rk4: Rk4Check,
    pub seed: Seed,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) struct NewtonOutcome {
    pub c: Vec<f64>,
    pub iterations: usize,
}

/// Damped Newton on the gradient with coefficient `pin` held at 0 and the
/// matching equation dropped. At least `min_iter` steps are taken, which
/// matters after refinement: the H^1 gradient damps high harmonics by
/// `1/k^2`, so a resized loop can pass the tolerance without having moved.
pub(crate) fn newton_pinned(
    sys: &GalerkinSystem,
    c0: &[f64],
    pin: usize,
    tol: f64,
    max_iter: usize,
    min_iter: usize,
) -> Result<NewtonOutcome, GalerkinError> {
    let keep: Vec<usize> = (0..sys.len()).filter(|&i| i != pin).collect();
    let reduced = |g: &[f64]| -> Vec<f64> { keep.iter().map(|&i| g[i]).collect() };
    let mut c = c0.to_vec();
    c[pin] = 0.0;
    let mut res = norm(&reduced(&sys.gradient(&c)?));
    for it in 0..max_iter {
        if res <= tol && it >= min_iter {
            return Ok(NewtonOutcome {
                c,
                iterations: it,
            });
        }
        let g = reduced(&sys.gradient(&c)?);
        let jac = sys.jacobian(&c)?.select_rows(&keep).select_columns(&keep);
        let rhs = -DVector::from_vec(g);
        let step = jac.lu().solve(&rhs).ok_or(GalerkinError::SingularJacobian)?;
        let mut t = 1.0;
        let mut best: Option<(Vec<f64>, f64)> = None;
        for _ in 0..12 {
            let mut trial = c.clone();
            for (s, &i) in step.iter().zip(&keep) {
                trial[i] += t * s;
            }
            if let Ok(gt) = sys.gradient(&trial) {
                let r = norm(&reduced(&gt));
                if r.is_finite() && best.as_ref().is_none_or(|b| r < b.1) {
                    best = Some((trial, r));
                }
                if r < res {
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((next, r)) = best else {
            return Err(GalerkinError::NonFinite);
        };
        c = next;
        res = r;
    }
    if res <= tol {
        return Ok(NewtonOutcome {
            c,
            iterations: max_iter,
        });
    }
    Err(GalerkinError::Diverged {
        iterations: max_iter,
        residual: res,
    })
}

/// Scale for seed amplitudes and branch bounds: `max(1, max_i |p_i|)`.
pub fn length_scale(spec: &SystemSpec) -> f64 {
    spec.critical_points
        .iter()
        .map(|p| norm(&p.location))
        .fold(1.0, f64::max)
}

/// Seeds for mode `k`, amplitudes `{0.1, 0.5, 1, 2} * length scale`, ordered
/// by amplitude, then stationary point, then direction preference.
pub fn seed_schedule(spec: &SystemSpec, k: u32) -> Result<Vec<Seed>, GalerkinError> {
    if k == 0 {
        return Err(GalerkinError::BadSeedMode);
    }
    let thr = mode_threshold(k, spec.period);
    let mut directions: Vec<(String, Vec<f64>, Vec<f64>, SeedOrigin)> = Vec::new();
    let mut fallback = Vec::new();
    for p in &spec.critical_points {
        let s = eigen_sym(&p.hessian).map_err(|_| GalerkinError::NonFinite)?;
        let mut above: Vec<(f64, usize, SeedOrigin)> = Vec::new();
        for (i, &e) in s.raw_eigenvalues.iter().enumerate() {
            if (e - thr).abs() <= s.resonance_tol {
                above.push((-1.0, i, SeedOrigin::ResonantKernel));
            } else if e > thr {
                above.push((e - thr, i, SeedOrigin::AboveThreshold));
            }
        }
        above.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (_, i, origin) in above {
            directions.push((p.id.clone(), p.location.clone(), s.eigenvector(i).to_vec(), origin));
        }
        for i in 0..s.n {
            fallback.push((p.id.clone(), p.location.clone(), s.eigenvector(i).to_vec(), SeedOrigin::Fallback));
        }
    }
    if directions.is_empty() {
        directions = fallback;
    }
    if directions.is_empty() {
        return Err(GalerkinError::NoSeeds(k));
    }
    let scale = length_scale(spec);
    Ok([0.1, 0.5, 1.0, 2.0]
        .iter()
        .flat_map(|&f| {
            directions.iter().map(move |(id, x, d, origin)| Seed {
                center_id: id.clone(),
                center: x.clone(),
                mode: k,
                direction: d.clone(),
                amplitude: f * scale,
                origin: *origin,
            })
        })
        .collect())
}

fn check_samples(sys: &GalerkinSystem) -> usize {
    (8 * sys.grid_size()).max(1024)
}

fn tail_ratio(u: &FourierLoop) -> f64 {
    let n = u.modes();
    let tail = (3 * n / 4 + 1..=n).map(|k| u.harmonic_norm(k).powi(2)).sum::<f64>().sqrt();
    tail / u.oscillation_norm()
}

fn system_for(spec: &SystemSpec, cfg: &GalerkinConfig) -> Result<GalerkinSystem, GalerkinError> {
    let pot: Arc<dyn Potential> = spec.potential.clone().ok_or(GalerkinError::NoPotential)?;
    GalerkinSystem::new(pot, spec.v_inf.clone(), spec.period, cfg.modes)
}

/// Newton from one seed, then acceptance checks: gradient norm, ODE
/// residual, distance from constant loops, spectral tail and an RK4 re-run.
pub fn find_orbit_from(
    sys: &GalerkinSystem,
    seed: &Seed,
    cfg: &GalerkinConfig,
) -> Result<OrbitResult, GalerkinError> {
    let k = seed.mode as usize;
    if k == 0 || k > sys.modes {
        return Err(GalerkinError::BadSeedMode);
    }
    let n = sys.n;
    let j = seed.pinned_component();
    let pin = index_b(n, k, j);
    let mut sys = sys.clone();
    let c0 = seed.to_loop(sys.modes, sys.period).to_vec();
    let mut out = newton_pinned(&sys, &c0, pin, cfg.newton_tol, cfg.max_newton, 0)?;
    let mut iterations = out.iterations;
    loop {
        let u = sys.to_loop(&out.c);
        let distance = u.distance_to_stationary(check_samples(&sys));
        if distance < cfg.stationary_tol {
            return Err(GalerkinError::Stationary { distance });
        }
        let resolved = tail_ratio(&u) <= cfg.tail_tol
            && ode_residual(sys.potential.as_ref(), &u, check_samples(&sys)) <= cfg.ode_tol;
        if resolved || 2 * sys.modes > cfg.max_modes {
            break;
        }
        sys = GalerkinSystem::new(sys.potential.clone(), sys.reference.clone(), sys.period, 2 * sys.modes)?;
        let c1 = u.resized(sys.modes).to_vec();
        out = newton_pinned(&sys, &c1, pin, cfg.newton_tol, cfg.max_newton, 2)?;
        iterations += out.iterations;
    }
    let u = sys.to_loop(&out.c);
    let samples = check_samples(&sys);
    let distance = u.distance_to_stationary(samples);
    let gradient_norm = norm(&sys.gradient(&out.c)?);
    let (minimal_period, isotropy_k) = minimal_period_of(&u)?;
    let residual = ode_residual(sys.potential.as_ref(), &u, samples);
    let tail_ratio = tail_ratio(&u);
    let rk4 = rk4_check(sys.potential.as_ref(), &u, cfg.rk4_steps);
    let result = OrbitResult {
        fourier_loop: u,
        gradient_norm,
        ode_residual: residual,
        minimal_period,
        isotropy_k,
        distance_to_stationary: distance,
        tail_ratio,
        newton_iterations: iterations,
        modes: sys.modes,
        pinned: (k, j),
        rk4,
        seed: seed.clone(),
    };
    let mut problems = Vec::new();
    if !(gradient_norm <= cfg.newton_tol) {
        problems.push(format!("gradient norm {gradient_norm:e} > {:e}", cfg.newton_tol));
    }
    if !(residual <= cfg.ode_tol) {
        problems.push(format!("ODE residual {residual:e} > {:e}", cfg.ode_tol));
    }
    if !(tail_ratio <= cfg.tail_tol) {
        problems.push(format!("spectral tail {tail_ratio:e} > {:e}", cfg.tail_tol));
    }
    if !(rk4.trajectory_deviation <= cfg.rk4_tol && rk4.periodicity_defect <= cfg.rk4_tol) {
        problems.push(format!(
            "RK4 deviation {:e}, periodicity defect {:e} (limit {:e})",
            rk4.trajectory_deviation, rk4.periodicity_defect, cfg.rk4_tol
        ));
    }
    if problems.is_empty() {
        Ok(result)
    } else {
        Err(GalerkinError::Rejected(problems.join("; ")))
    }
}

/// One seed tried by [`search_orbit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitAttempt {
    pub seed: Seed,
    pub outcome: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSearch {
    pub mode: u32,
    pub attempts: Vec<OrbitAttempt>,
    pub orbit: Option<OrbitResult>,
}

/// Tries every seed at one amplitude factor (relative to the length scale).
pub fn find_orbit(
    spec: &SystemSpec,
    seed_mode: u32,
    amplitude_factor: f64,
    cfg: &GalerkinConfig,
) -> Result<OrbitResult, GalerkinError> {
    let sys = system_for(spec, cfg)?;
    let scale = length_scale(spec);
    let mut last = GalerkinError::NoSeeds(seed_mode);
    for mut seed in seed_schedule(spec, seed_mode)?
        .into_iter()
        .filter(|s| (s.amplitude - 0.1 * scale).abs() < 1e-12 * scale)
    {
        seed.amplitude = amplitude_factor * scale;
        match find_orbit_from(&sys, &seed, cfg) {
            Ok(r) => return Ok(r),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Runs the whole seed schedule for mode `k`, stopping at the first accepted
/// orbit.
pub fn search_orbit(spec: &SystemSpec, k: u32, cfg: &GalerkinConfig) -> Result<OrbitSearch, GalerkinError> {
    let sys = system_for(spec, cfg)?;
    let mut attempts = Vec::new();
    for seed in seed_schedule(spec, k)? {
        match find_orbit_from(&sys, &seed, cfg) {
            Ok(r) => {
                attempts.push(OrbitAttempt {
                    seed,
                    outcome: "accepted".into(),
                });
                return Ok(OrbitSearch {
                    mode: k,
                    attempts,
                    orbit: Some(r),
                });
            }
            Err(e) => attempts.push(OrbitAttempt {
                seed,
                outcome: e.to_string(),
            }),
        }
    }
    Ok(OrbitSearch {
        mode: k,
        attempts,
        orbit: None,
    })
}

pub(crate) fn pinned_index(n: usize, pinned: (usize, usize)) -> usize {
    index_b(n, pinned.0, pinned.1)
}

pub(crate) fn pinned_partner(n: usize, pinned: (usize, usize)) -> usize {
    index_a(n, pinned.0, pinned.1)
}
