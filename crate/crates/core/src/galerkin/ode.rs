use serde::{Deserialize, Serialize};

use super::fourier::FourierLoop;
use crate::systems::Potential;

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Classical RK4 for `x'' = -V'(x)`; calls `observe(step, x, v)` after
/// every step (and once for the initial state with step 0).
pub fn integrate_rk4(
    potential: &dyn Potential,
    x0: &[f64],
    v0: &[f64],
    t_end: f64,
    steps: usize,
    mut observe: impl FnMut(usize, &[f64], &[f64]),
) -> (Vec<f64>, Vec<f64>) {
    let n = x0.len();
    let h = t_end / steps as f64;
    let mut x = x0.to_vec();
    let mut v = v0.to_vec();
    let acc = |x: &[f64]| -> Vec<f64> { potential.gradient(x).into_iter().map(|g| -g).collect() };
    let axpy = |x: &[f64], s: f64, d: &[f64]| -> Vec<f64> {
        x.iter().zip(d).map(|(a, b)| a + s * b).collect()
    };
    observe(0, &x, &v);
    for step in 1..=steps {
        let k1x = v.clone();
        let k1v = acc(&x);
        let k2x = axpy(&v, 0.5 * h, &k1v);
        let k2v = acc(&axpy(&x, 0.5 * h, &k1x));
        let k3x = axpy(&v, 0.5 * h, &k2v);
        let k3v = acc(&axpy(&x, 0.5 * h, &k2x));
        let k4x = axpy(&v, h, &k3v);
        let k4v = acc(&axpy(&x, h, &k3x));
        for i in 0..n {
            x[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            v[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        observe(step, &x, &v);
    }
    (x, v)
}

/// Re-verification of a loop by time stepping from `(u(0), u'(0))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rk4Check {
    pub steps: usize,
    /// `max_i |x(t_i) - u(t_i)|` over the steps.
    pub trajectory_deviation: f64,
    /// `|x(T) - x(0)| + |x'(T) - x'(0)|`.
    pub periodicity_defect: f64,
}

pub fn rk4_check(potential: &dyn Potential, u: &FourierLoop, steps: usize) -> Rk4Check {
    let t = u.period;
    let x0 = u.eval(0.0);
    let v0 = u.velocity(0.0);
    let mut dev: f64 = 0.0;
    let (x, v) = integrate_rk4(potential, &x0, &v0, t, steps, |i, x, _| {
        let ui = u.eval(t * i as f64 / steps as f64);
        let d: Vec<f64> = x.iter().zip(&ui).map(|(a, b)| a - b).collect();
        dev = dev.max(norm(&d));
    });
    let dx: Vec<f64> = x.iter().zip(&x0).map(|(a, b)| a - b).collect();
    let dv: Vec<f64> = v.iter().zip(&v0).map(|(a, b)| a - b).collect();
    Rk4Check {
        steps,
        trajectory_deviation: dev,
        periodicity_defect: norm(&dx) + norm(&dv),
    }
}

/// `sup_t |u''(t) + V'(u(t))|` on `samples` uniform points.
pub fn ode_residual(potential: &dyn Potential, u: &FourierLoop, samples: usize) -> f64 {
    (0..samples)
        .map(|i| {
            let t = u.period * i as f64 / samples as f64;
            let acc = u.acceleration(t);
            let g = potential.gradient(&u.eval(t));
            norm(&acc.iter().zip(&g).map(|(a, b)| a + b).collect::<Vec<_>>())
        })
        .fold(0.0, f64::max)
}
