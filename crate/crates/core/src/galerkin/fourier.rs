use std::f64::consts::PI;
use std::fmt::Write as _;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::GalerkinError;

/// Truncated Fourier loop
/// `u(t) = a_0 + sum_{k=1}^N a_k cos(2 k pi t / T) + b_k sin(2 k pi t / T)`.
///
/// The flat coefficient layout used by the solver is `[a_0 | a_1 | b_1 | ... | a_N | b_N]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierLoop {
    pub period: f64,
    pub a0: Vec<f64>,
    /// `(a_k, b_k)` for `k = 1..=N`.
    pub coeffs: Vec<(Vec<f64>, Vec<f64>)>,
}

pub(crate) fn index_a(n: usize, k: usize, j: usize) -> usize {
    if k == 0 {
        j
    } else {
        n * (2 * k - 1) + j
    }
}

pub(crate) fn index_b(n: usize, k: usize, j: usize) -> usize {
    n * 2 * k + j
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl FourierLoop {
    pub fn constant(x: &[f64], modes: usize, period: f64) -> Self {
        let n = x.len();
        Self {
            period,
            a0: x.to_vec(),
            coeffs: vec![(vec![0.0; n], vec![0.0; n]); modes],
        }
    }

    pub fn n(&self) -> usize {
        self.a0.len()
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    /// Length of the flat coefficient vector, `n (2N + 1)`.
    pub fn len(&self) -> usize {
        self.n() * (2 * self.modes() + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn omega(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.period
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&self.a0);
        for (a, b) in &self.coeffs {
            v.extend_from_slice(a);
            v.extend_from_slice(b);
        }
        v
    }

    pub fn from_vec(n: usize, period: f64, v: &[f64]) -> Self {
        assert!(n > 0 && v.len().is_multiple_of(n) && (v.len() / n) % 2 == 1, "bad coefficient layout");
        let modes = (v.len() / n - 1) / 2;
        Self {
            period,
            a0: v[..n].to_vec(),
            coeffs: (1..=modes)
                .map(|k| {
                    let a = index_a(n, k, 0);
                    let b = index_b(n, k, 0);
                    (v[a..a + n].to_vec(), v[b..b + n].to_vec())
                })
                .collect(),
        }
    }

    /// `d^order u / dt^order` at `t` for `order` in 0..=2.
    fn derivative(&self, t: f64, order: u8) -> Vec<f64> {
        let mut out = if order == 0 {
            self.a0.clone()
        } else {
            vec![0.0; self.n()]
        };
        // sin/cos of k w t by repeated rotation
        let (s1, c1) = (self.omega(1) * t).sin_cos();
        let (mut s, mut c) = (s1, c1);
        for (i, (a, b)) in self.coeffs.iter().enumerate() {
            let w = self.omega(i + 1);
            let (ca, cb) = match order {
                0 => (c, s),
                1 => (-w * s, w * c),
                _ => (-w * w * c, -w * w * s),
            };
            for j in 0..out.len() {
                out[j] += ca * a[j] + cb * b[j];
            }
            (s, c) = (s * c1 + c * s1, c * c1 - s * s1);
        }
        out
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        self.derivative(t, 0)
    }

    pub fn velocity(&self, t: f64) -> Vec<f64> {
        self.derivative(t, 1)
    }

    pub fn acceleration(&self, t: f64) -> Vec<f64> {
        self.derivative(t, 2)
    }

    /// `H^1_T` inner product `int_0^T <u', v'> + <u, v> dt`.
    pub fn h1_inner(&self, other: &Self) -> f64 {
        let t = self.period;
        let mut s = t * dot(&self.a0, &other.a0);
        for (k, ((a, b), (c, d))) in self.coeffs.iter().zip(&other.coeffs).enumerate() {
            let w = self.omega(k + 1);
            s += 0.5 * t * (1.0 + w * w) * (dot(a, c) + dot(b, d));
        }
        s
    }

    pub fn h1_norm(&self) -> f64 {
        self.h1_inner(self).sqrt()
    }

    /// `sqrt(|a_k|^2 + |b_k|^2)`.
    pub fn harmonic_norm(&self, k: usize) -> f64 {
        let (a, b) = &self.coeffs[k - 1];
        (dot(a, a) + dot(b, b)).sqrt()
    }

    /// Euclidean norm of all harmonics `k >= 1`.
    pub fn oscillation_norm(&self) -> f64 {
        (1..=self.modes())
            .map(|k| self.harmonic_norm(k).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn coefficient_norm(&self) -> f64 {
        norm(&self.to_vec())
    }

    /// The loop `t -> u(t + tau)`.
    pub fn time_shift(&self, tau: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, (a, b))| {
                let (s, c) = (self.omega(i + 1) * tau).sin_cos();
                let na = a.iter().zip(b).map(|(x, y)| x * c + y * s).collect();
                let nb = a.iter().zip(b).map(|(x, y)| y * c - x * s).collect();
                (na, nb)
            })
            .collect();
        Self {
            period: self.period,
            a0: self.a0.clone(),
            coeffs,
        }
    }

    /// Same loop with `modes` harmonics, zero padded or truncated.
    pub fn resized(&self, modes: usize) -> Self {
        let n = self.n();
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(modes, (vec![0.0; n], vec![0.0; n]));
        Self {
            period: self.period,
            a0: self.a0.clone(),
            coeffs,
        }
    }

    /// `sup_t |u(t) - a_0|`, sampled on `samples` uniform points.
    pub fn distance_to_stationary(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|i| {
                let t = self.period * i as f64 / samples as f64;
                let u = self.eval(t);
                norm(&u.iter().zip(&self.a0).map(|(x, c)| x - c).collect::<Vec<_>>())
            })
            .fold(0.0, f64::max)
    }

    /// Uniform samples `t, u_1(t), ..., u_n(t)` as CSV with a header line.
    pub fn to_csv(&self, samples: usize) -> String {
        let mut out = String::from("t");
        for j in 0..self.n() {
            let _ = write!(out, ",u{}", j + 1);
        }
        out.push('\n');
        for i in 0..=samples {
            let t = self.period * i as f64 / samples as f64;
            let _ = write!(out, "{t}");
            for v in self.eval(t) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Harmonics whose coefficient norm exceeds `1e-6` times the oscillation norm.
pub fn active_harmonics(u: &FourierLoop) -> Vec<u32> {
    let scale = u.oscillation_norm();
    (1..=u.modes())
        .filter(|&k| u.harmonic_norm(k) > 1e-6 * scale)
        .map(|k| k as u32)
        .collect()
}

/// Minimal period `T / g` and isotropy index `g`, the gcd of the active
/// harmonics.
pub fn minimal_period_of(u: &FourierLoop) -> Result<(f64, u32), GalerkinError> {
    if u.oscillation_norm() == 0.0 {
        return Err(GalerkinError::ConstantLoop);
    }
    let g = active_harmonics(u).into_iter().fold(0u32, |a, k| a.gcd(&k));
    Ok((u.period / f64::from(g), g))
}
