//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::collections::BTreeSet;
use std::f64::consts::{PI, SQRT_2};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use so2deg::certify::{analyze, AnalysisConfig, RowStatus, Verdict};
use so2deg::eqdeg::{
    brouwer_index_degenerate, brouwer_index_nondegenerate, linear_degree, linear_degree_via_product, BrouwerSource,
    PointId,
};
use so2deg::galerkin::{search_orbit, trace_branch, BranchConfig, BranchVerdict, ConstantFamily, GalerkinConfig, GalerkinSystem};
use so2deg::ring::RingElement;
use so2deg::spectral::{eigen_sym, j_k, lambda_block, resonance_report, SymMatrix};
use so2deg::systems::{build_system, ModelPotential, Potential, QuadraticPotential, SystemSpec};

const SEED: u64 = 0x5EED_2024;
const ODE_TOL: f64 = 1e-7;
const PERIODICITY_TOL: f64 = 1e-6;
const SHOOTING_TOL: f64 = 1e-6;
const FD_REL_TOL: f64 = 1e-6;
const BLOCK_TOL: f64 = 1e-12;
const HESSIAN_TOL: f64 = 1e-12;
/// Relative offset from the critical period used to probe both sides of the
/// `j_1` transition; well outside the resonance band.
const TRANSITION_OFFSET: f64 = 1e-6;

type Check = Result<String, String>;

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn model(d: &[f64], a: f64, t: f64) -> SystemSpec {
    build_system(&ModelPotential::new(SymMatrix::diag(d), a).unwrap(), t).unwrap()
}

fn four_dim(second: f64) -> SystemSpec {
    model(&[3.5, second, 0.0, -1.0 / (2.0 * SQRT_2)], 1.0, 2.0 * PI)
}

fn j_row(spec: &so2deg::EquivariantIndex, ks: &[u32]) -> Vec<usize> {
    ks.iter().map(|k| spec.jk_table.get(k).copied().unwrap_or(0)).collect()
}

fn resonant_origin_example() -> Check {
    let cert = analyze(&four_dim(-2.0), &AnalysisConfig::default()).map_err(|e| e.to_string())?;
    let id = |s: &str| PointId::Finite(s.into());
    let origin = cert.point(&id("origin")).ok_or("no origin")?;
    let plus = cert.point(&id("+e4")).ok_or("no +e4")?;
    let minus = cert.point(&id("-e4")).ok_or("no -e4")?;
    let inf = cert.infinity();
    let got = (origin.brouwer, plus.brouwer, minus.brouwer, inf.brouwer);
    ensure(got == (-1, 1, 1, 1), || format!("Brouwer indices {got:?}"))?;
    let ks = [1, 2, 3, 4];
    ensure(j_row(&origin.index, &ks) == [1, 1, 0, 0], || format!("origin j {:?}", origin.index.jk_table))?;
    for p in [plus, minus, inf] {
        ensure(j_row(&p.index, &ks) == [1, 0, 0, 0], || format!("{} j {:?}", p.id, p.index.jk_table))?;
    }
    ensure(origin.index.resonant_modes == BTreeSet::from([1]), || {
        format!("resonance {:?}", origin.index.resonant_modes)
    })?;
    let w = (cert.verdict, cert.witness_k, cert.lhs, cert.rhs);
    ensure(w == (Verdict::Proven, Some(2), Some(0), Some(-1)), || format!("witness {w:?}"))?;
    Ok("indices -1/+1/+1/+1, resonance {1}, witness k=2 (0 != -1)".into())
}

fn degenerate_origin_example() -> Check {
    let spec = four_dim(-1.0);
    let h = eigen_sym(&spec.critical_points[0].hessian).map_err(|e| e.to_string())?;
    ensure(h.is_singular(), || "origin Hessian is not singular".into())?;
    let cert = analyze(&spec, &AnalysisConfig::default()).map_err(|e| e.to_string())?;
    let origin = cert.point(&PointId::Finite("origin".into())).ok_or("no origin")?;
    ensure(origin.brouwer == -1 && origin.brouwer_source == BrouwerSource::SumFormulaResidual, || {
        format!("origin index {} via {:?}", origin.brouwer, origin.brouwer_source)
    })?;
    let w = (cert.verdict, cert.witness_k, cert.lhs, cert.rhs);
    ensure(w == (Verdict::Proven, Some(2), Some(0), Some(-1)), || format!("witness {w:?}"))?;
    Ok("singular origin, index -1 from the sum residual, witness k=2".into())
}

fn sitnikov_threshold() -> Check {
    let cfg = AnalysisConfig::default();
    let spec = model(&[0.0], 0.25, 2.0 * PI);
    let h = spec.critical_points[0].hessian.get(0, 0);
    ensure((h - 8.0).abs() <= HESSIAN_TOL, || format!("V''(0) = {h}"))?;
    let mut verdicts = Vec::new();
    for t in [1.0, 2.3, 2.0 * PI] {
        verdicts.push(analyze(&model(&[0.0], 0.25, t), &cfg).map_err(|e| e.to_string())?.verdict);
    }
    ensure(verdicts == [Verdict::NotDecided, Verdict::Proven, Verdict::Proven], || format!("{verdicts:?}"))?;
    let tc = PI / SQRT_2;
    let eight = SymMatrix::diag(&[8.0]);
    let below = j_k(&eight, tc * (1.0 - TRANSITION_OFFSET), 1).map_err(|e| e.to_string())?;
    let above = j_k(&eight, tc * (1.0 + TRANSITION_OFFSET), 1).map_err(|e| e.to_string())?;
    let at = resonance_report(&eight, tc).map_err(|e| e.to_string())?;
    ensure(below == 0 && above == 1 && at.resonant_ks.contains(&1), || {
        format!("j_1 below {below}, above {above}, resonant at T_c: {:?}", at.resonant_ks)
    })?;
    Ok("V''(0) = 8, verdicts not-decided/proven/proven, j_1 switches at pi/sqrt 2".into())
}

fn shoot(a: f64, half_period: f64, steps: usize) -> (f64, Vec<f64>) {
    let f = |x: f64| -x / (x * x + 0.25).powf(1.5);
    let h = half_period / steps as f64;
    let (mut x, mut v) = (a, 0.0);
    let mut traj = vec![x];
    for _ in 0..steps {
        let k1 = (v, f(x));
        let k2 = (v + 0.5 * h * k1.1, f(x + 0.5 * h * k1.0));
        let k3 = (v + 0.5 * h * k2.1, f(x + 0.5 * h * k2.0));
        let k4 = (v + h * k3.1, f(x + h * k3.0));
        x += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        traj.push(x);
    }
    (v, traj)
}

/// Symmetric orbit through `(A, 0)`: bisect on `x'(T/2) = 0`.
fn shooting_amplitude(half_period: f64, steps: usize) -> f64 {
    let (mut lo, mut hi) = (0.6, 1.6);
    let sign_lo = shoot(lo, half_period, steps).0.signum();
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if shoot(mid, half_period, steps).0.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn sitnikov_orbit() -> Check {
    let spec = model(&[0.0], 0.25, 2.0 * PI);
    let search = search_orbit(&spec, 1, &GalerkinConfig::default()).map_err(|e| e.to_string())?;
    let orbit = search.orbit.ok_or_else(|| format!("no orbit accepted: {:?}", search.attempts))?;
    ensure(orbit.ode_residual <= ODE_TOL, || format!("ODE residual {:e}", orbit.ode_residual))?;
    ensure(orbit.rk4.periodicity_defect <= PERIODICITY_TOL, || {
        format!("periodicity defect {:e}", orbit.rk4.periodicity_defect)
    })?;
    ensure(orbit.distance_to_stationary > 1e-4, || "stationary".into())?;
    ensure((orbit.minimal_period - 2.0 * PI).abs() < 1e-9, || format!("minimal period {}", orbit.minimal_period))?;

    let steps = 20_000;
    let amp = shooting_amplitude(PI, steps);
    let u = &orbit.fourier_loop;
    // the pinned sine coefficient puts a turning point at t = 0 or t = T/2
    let x0 = u.eval(0.0)[0];
    let (sign, shift) = if (x0.abs() - amp).abs() < 1e-3 {
        (x0.signum(), 0.0)
    } else {
        (-u.eval(PI)[0].signum(), PI)
    };
    let (_, traj) = shoot(amp, PI, steps);
    let h = PI / steps as f64;
    let dev = traj
        .iter()
        .enumerate()
        .map(|(i, x)| (sign * u.eval(shift + i as f64 * h)[0] - x).abs())
        .fold(0.0, f64::max);
    ensure(dev <= SHOOTING_TOL, || format!("shooting deviation {dev:e}"))?;
    Ok(format!(
        "residual {:.1e}, periodicity {:.1e}, amplitude {amp:.6}, shooting deviation {dev:.1e}",
        orbit.ode_residual, orbit.rk4.periodicity_defect
    ))
}

fn random_element(rng: &mut ChaCha8Rng, bound: u32) -> RingElement {
    let so2 = rng.random_range(-20..=20);
    let zk: Vec<(u32, i64)> = (1..=bound).map(|k| (k, rng.random_range(-20..=20))).collect();
    RingElement::new(so2, zk, [], bound).unwrap()
}

/// Star product from its definition on plain vectors.
fn star_oracle(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![a[0] * b[0]];
    out.extend((1..a.len()).map(|k| a[0] * b[k] + b[0] * a[k]));
    out
}

fn coords(x: &RingElement, bound: u32) -> Vec<i64> {
    let mut v = vec![x.so2()];
    v.extend((1..=bound).map(|k| x.zk_coord(k).defined().unwrap()));
    v
}

fn ring_laws() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let bound = 6;
    let one = RingElement::unit(bound);
    let zero = RingElement::zero(bound);
    for i in 0..10_000 {
        let a = random_element(&mut rng, bound);
        let b = random_element(&mut rng, bound);
        let c = random_element(&mut rng, bound);
        let ab = &a * &b;
        let laws = [
            ("add commutes", &a + &b == &b + &a),
            ("add associates", &(&a + &b) + &c == &a + &(&b + &c)),
            ("star commutes", ab == &b * &a),
            ("star associates", &ab * &c == &a * &(&b * &c)),
            ("distributes", &a * &(&b + &c) == &ab + &(&a * &c)),
            ("unit", &a * &one == a),
            ("zero", &a + &zero == a && (&a * &zero) == zero),
            ("oracle", coords(&ab, bound) == star_oracle(&coords(&a, bound), &coords(&b, bound))),
        ];
        if let Some((name, _)) = laws.iter().find(|(_, ok)| !ok) {
            return Err(format!("triple {i}: {name} fails for {a}, {b}, {c}"));
        }
    }
    Ok("10^4 triples".into())
}

/// Orthogonal matrix (column-major) by Gram-Schmidt on random vectors.
fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    while q.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for w in &q {
            let d: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(w).for_each(|(a, b)| *a -= d * b);
        }
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 1e-3 {
            q.push(v.into_iter().map(|x| x / nv).collect());
        }
    }
    q.concat()
}

fn two_paths() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut done = 0;
    let mut multiple = 0;
    while done < 200 {
        let n = rng.random_range(1..=6);
        let t = rng.random_range(0.5..8.0);
        // some repeated eigenvalues so multiplicities above one occur
        let mut d: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..40.0)).collect();
        if n > 1 && rng.random_bool(0.3) {
            d[1] = d[0];
        }
        let a = SymMatrix::from_eigen(&random_orthogonal(&mut rng, n), &d);
        let s = eigen_sym(&a).map_err(|e| e.to_string())?;
        let Ok(x) = linear_degree(&s, t) else {
            continue;
        };
        let y = linear_degree_via_product(&s, t).map_err(|e| e.to_string())?;
        ensure(x == y, || format!("A = {a:?}, T = {t}: {x} vs {y}"))?;
        if s.multiplicities.iter().any(|&m| m > 1) {
            multiple += 1;
        }
        done += 1;
    }
    Ok(format!("200 cases, {multiple} with repeated eigenvalues"))
}

fn random_model(rng: &mut ChaCha8Rng) -> Option<SystemSpec> {
    let n = rng.random_range(1..=4);
    let a: f64 = rng.random_range(0.2..2.0);
    let t = rng.random_range(1.0..8.0);
    let d: Vec<f64> = (0..n).map(|_| rng.random_range(-2.5..6.0)).collect();
    let v = SymMatrix::from_eigen(&random_orthogonal(rng, n), &d);
    ModelPotential::new(v, a).ok().and_then(|m| build_system(&m, t).ok())
}

fn so2_nullity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let cfg = AnalysisConfig::default();
    let (mut done, mut differing, mut tries) = (0, 0, 0);
    while done < 100 {
        tries += 1;
        ensure(tries <= 2000, || format!("only {done} usable systems in 2000 draws"))?;
        let Some(spec) = random_model(&mut rng) else {
            continue;
        };
        let Ok(cert) = analyze(&spec, &cfg) else {
            continue;
        };
        ensure(cert.so2_difference == 0, || {
            format!("SO(2) difference {} for n = {}, T = {}", cert.so2_difference, spec.n, spec.period)
        })?;
        if cert.comparisons.iter().any(|r| r.status == RowStatus::Differs) {
            differing += 1;
        }
        done += 1;
    }
    ensure(differing > 0, || "no instance with a nonzero Z_k difference".into())?;
    Ok(format!("100 systems, {differing} with a nonzero Z_k difference"))
}

fn flat_a(n: usize, k: usize, j: usize) -> usize {
    if k == 0 {
        j
    } else {
        n * (2 * k - 1) + j
    }
}

fn gradient_checks() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(1..=3);
        let d: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..4.0)).collect();
        let v = SymMatrix::from_eigen(&random_orthogonal(&mut rng, n), &d);
        let pot: Arc<dyn Potential> = Arc::new(ModelPotential::new(v.clone(), rng.random_range(0.3..1.5)).unwrap());
        let t = rng.random_range(1.0..7.0);
        let sys = GalerkinSystem::new(pot, v, t, 6).map_err(|e| e.to_string())?;
        let mut c = vec![0.0; sys.len()];
        let mut dir = vec![0.0; sys.len()];
        for (i, (ci, di)) in c.iter_mut().zip(&mut dir).enumerate() {
            let decay = 0.6f64.powi((i / (2 * n)) as i32);
            *ci = rng.random_range(-0.5..0.5) * decay;
            *di = rng.random_range(-0.5..0.5) * decay;
        }
        let g = sys.gradient(&c).map_err(|e| e.to_string())?;
        let w = sys.h1_weights();
        let inner: f64 = g.iter().zip(&dir).zip(&w).map(|((a, b), c)| a * b * c).sum();
        let h = 1e-5;
        let shifted = |s: f64| -> Vec<f64> { c.iter().zip(&dir).map(|(a, b)| a + s * b).collect() };
        let fd = (sys.action(&shifted(h)) - sys.action(&shifted(-h))) / (2.0 * h);
        let rel = (fd - inner).abs() / inner.abs().max(1e-3);
        worst = worst.max(rel);
        ensure(rel <= FD_REL_TOL, || format!("relative gap {rel:e} ({fd} vs {inner})"))?;
    }

    let a = SymMatrix::from_rows(&[vec![2.0, 0.5, 0.0], vec![0.5, -1.0, 0.3], vec![0.0, 0.3, 7.0]]).unwrap();
    let (n, modes, t) = (3, 5, 2.5);
    let sys = GalerkinSystem::new(Arc::new(QuadraticPotential { a: a.clone() }), SymMatrix::zeros(n), t, modes)
        .map_err(|e| e.to_string())?;
    let jac = sys.jacobian(&vec![0.0; sys.len()]).map_err(|e| e.to_string())?;
    let mut expected = vec![0.0; sys.len() * sys.len()];
    for k in 0..=modes {
        let block = lambda_block(&a, t, k as u32);
        let starts = if k == 0 { vec![0] } else { vec![flat_a(n, k, 0), flat_a(n, k, 0) + n] };
        for s in starts {
            for i in 0..n {
                for j in 0..n {
                    expected[(s + i) * sys.len() + s + j] = block.get(i, j);
                }
            }
        }
    }
    let mut gap: f64 = 0.0;
    for r in 0..sys.len() {
        for c in 0..sys.len() {
            gap = gap.max((jac[(r, c)] - expected[r * sys.len() + c]).abs());
        }
    }
    ensure(gap <= BLOCK_TOL, || format!("Jacobian differs from the Lambda blocks by {gap:e}"))?;
    Ok(format!("worst FD gap {worst:.1e}, block gap {gap:.1e}"))
}

fn brouwer_agreement() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    for i in 0..100 {
        let n = rng.random_range(1..=3);
        let d: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0.2..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        let h = SymMatrix::from_eigen(&random_orthogonal(&mut rng, n), &d);
        let want = brouwer_index_nondegenerate(&eigen_sym(&h).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let grad = |x: &[f64]| -> Vec<f64> {
            let dx: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a - b).collect();
            h.mul_vec(&dx)
        };
        let got = brouwer_index_degenerate(&grad, &p, 0.5).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("case {i}: oracle {got}, sign det {want}, eigenvalues {d:?}"))?;
    }
    Ok("100 Hessians, n <= 3".into())
}

fn constant_family_branch() -> Check {
    let spec = model(&[0.0], 0.25, 2.0 * PI);
    let cfg = GalerkinConfig::default();
    let orbit = search_orbit(&spec, 1, &cfg)
        .map_err(|e| e.to_string())?
        .orbit
        .ok_or("no start orbit")?;
    let pot = spec.potential.clone().ok_or("no potential")?;
    let sys = GalerkinSystem::new(pot.clone(), spec.v_inf.clone(), spec.period, cfg.modes).map_err(|e| e.to_string())?;
    let rec = trace_branch(&ConstantFamily { base: pot }, &sys, &orbit, 1.0, &BranchConfig::default())
        .map_err(|e| e.to_string())?;
    ensure(rec.verdict == BranchVerdict::Unbounded, || format!("verdict {} ({})", rec.verdict, rec.reason))?;
    ensure(rec.isotropy_constant(), || format!("isotropy changes {:?}", rec.isotropy_changes))?;
    Ok(format!("unbounded after {} steps ({}), isotropy constant", rec.steps, rec.reason))
}

/// Name, check, time limit in seconds.
type Criterion = (&'static str, fn() -> Check, u64);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("four-dimensional model, resonant origin", resonant_origin_example, 1),
        ("four-dimensional model, singular origin", degenerate_origin_example, 1),
        ("Sitnikov period threshold", sitnikov_threshold, 1),
        ("Sitnikov orbit vs shooting", sitnikov_orbit, 30),
        ("ring laws", ring_laws, 5),
        ("two-path linear degree", two_paths, 10),
        ("SO(2)-coordinate nullity", so2_nullity, 60),
        ("Galerkin gradient and blocks", gradient_checks, 30),
        ("Brouwer oracle agreement", brouwer_agreement, 30),
        ("constant-family continuation", constant_family_branch, 60),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > Duration::from_secs(*limit) => Err(format!("{msg}; took {took:.2?} > {limit} s")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name} [{took:.2?}]: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{took:.2?}]: {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
