use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::fourier::{index_a, index_b, FourierLoop};
use super::GalerkinError;
use crate::spectral::{lambda_block, SymMatrix};
use crate::systems::Potential;

/// Galerkin truncation of the gradient of
/// `Phi(u) = int_0^T 1/2 |u'|^2 - V(u) dt` on `H^1_T`.
///
/// The gradient splits as `Lambda_ref(k) a_k - T^2/(4 k^2 pi^2 + T^2) * P_k`,
/// where `P_k` are the cosine/sine coefficients of `V'(u) - A_ref u`
/// computed by the trapezoidal rule on `4N + 4` points. The rule is exact for
/// the linear part, so `A_ref` only decides which piece is quadrature.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    pub potential: Arc<dyn Potential>,
    pub reference: SymMatrix,
    pub period: f64,
    pub n: usize,
    pub modes: usize,
    tables: Arc<Tables>,
    blocks: Arc<Vec<SymMatrix>>,
}

#[derive(Debug)]
struct Tables {
    m: usize,
    /// `cos(2 pi p j / m)` at `[p * m + j]`, `p = 0..=2N`.
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl GalerkinSystem {
    pub fn new(
        potential: Arc<dyn Potential>,
        reference: SymMatrix,
        period: f64,
        modes: usize,
    ) -> Result<Self, GalerkinError> {
        let n = potential.dim();
        if reference.dim() != n {
            return Err(GalerkinError::Dimension {
                expected: n,
                got: reference.dim(),
            });
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(GalerkinError::BadPeriod(period));
        }
        if modes == 0 {
            return Err(GalerkinError::NoModes);
        }
        let m = 4 * modes + 4;
        let mut cos = Vec::with_capacity((2 * modes + 1) * m);
        let mut sin = Vec::with_capacity((2 * modes + 1) * m);
        for p in 0..=2 * modes {
            for j in 0..m {
                // reduce p*j mod m first to keep the angle small
                let th = 2.0 * PI * ((p * j) % m) as f64 / m as f64;
                cos.push(th.cos());
                sin.push(th.sin());
            }
        }
        let blocks = (0..=modes)
            .map(|k| lambda_block(&reference, period, k as u32))
            .collect();
        Ok(Self {
            potential,
            reference,
            period,
            n,
            modes,
            tables: Arc::new(Tables { m, cos, sin }),
            blocks: Arc::new(blocks),
        })
    }

    /// Same discretisation for another potential of the same dimension.
    pub fn with_potential(&self, potential: Arc<dyn Potential>) -> Self {
        assert_eq!(potential.dim(), self.n);
        Self {
            potential,
            ..self.clone()
        }
    }

    /// Number of unknowns `n (2N + 1)`.
    pub fn len(&self) -> usize {
        self.n * (2 * self.modes + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn grid_size(&self) -> usize {
        self.tables.m
    }

    pub fn to_loop(&self, c: &[f64]) -> FourierLoop {
        FourierLoop::from_vec(self.n, self.period, c)
    }

    /// `u(t_j)` on the quadrature grid `t_j = j T / m`.
    pub fn samples(&self, c: &[f64]) -> Vec<Vec<f64>> {
        let (n, m) = (self.n, self.tables.m);
        let mut out = vec![c[..n].to_vec(); m];
        for k in 1..=self.modes {
            let a = &c[index_a(n, k, 0)..index_a(n, k, 0) + n];
            let b = &c[index_b(n, k, 0)..index_b(n, k, 0) + n];
            let (ct, st) = (&self.tables.cos[k * m..(k + 1) * m], &self.tables.sin[k * m..(k + 1) * m]);
            for (j, u) in out.iter_mut().enumerate() {
                for i in 0..n {
                    u[i] += a[i] * ct[j] + b[i] * st[j];
                }
            }
        }
        out
    }

    /// Projection of grid values onto the basis: `(1/T) int f` for mode 0 and
    /// `(2/T) int f cos`, `(2/T) int f sin` for `k >= 1`.
    pub fn project(&self, values: &[Vec<f64>]) -> Vec<f64> {
        let (n, m) = (self.n, self.tables.m);
        let mut out = vec![0.0; self.len()];
        for (j, f) in values.iter().enumerate() {
            for i in 0..n {
                out[i] += f[i];
            }
            for k in 1..=self.modes {
                let (ck, sk) = (self.tables.cos[k * m + j], self.tables.sin[k * m + j]);
                let (ia, ib) = (index_a(n, k, 0), index_b(n, k, 0));
                for i in 0..n {
                    out[ia + i] += f[i] * ck;
                    out[ib + i] += f[i] * sk;
                }
            }
        }
        let inv = 1.0 / m as f64;
        for (idx, v) in out.iter_mut().enumerate() {
            *v *= if idx < n { inv } else { 2.0 * inv };
        }
        out
    }

    /// `T^2 / (4 k^2 pi^2 + T^2)`.
    fn h1_scale(&self, k: usize) -> f64 {
        let t2 = self.period * self.period;
        t2 / (4.0 * PI * PI * (k * k) as f64 + t2)
    }

    /// Combines a projected nonlinear term with the reference blocks.
    fn assemble(&self, c: &[f64], projected: &[f64], with_linear: bool) -> Vec<f64> {
        let n = self.n;
        let mut g = vec![0.0; self.len()];
        for k in 0..=self.modes {
            let (scale, parts) = if k == 0 {
                (1.0, vec![index_a(n, 0, 0)])
            } else {
                (self.h1_scale(k), vec![index_a(n, k, 0), index_b(n, k, 0)])
            };
            for start in parts {
                let lin = if with_linear {
                    self.blocks[k].mul_vec(&c[start..start + n])
                } else {
                    vec![0.0; n]
                };
                for i in 0..n {
                    g[start + i] = lin[i] - scale * projected[start + i];
                }
            }
        }
        g
    }

    /// Coefficients of the `H^1_T` gradient of `Phi` at the loop `c`.
    pub fn gradient(&self, c: &[f64]) -> Result<Vec<f64>, GalerkinError> {
        let values = self
            .samples(c)
            .into_iter()
            .map(|u| {
                let g = self.potential.gradient(&u);
                let r = self.reference.mul_vec(&u);
                g.iter().zip(&r).map(|(x, y)| x - y).collect::<Vec<f64>>()
            })
            .collect::<Vec<_>>();
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(GalerkinError::NonFinite);
        }
        Ok(self.assemble(c, &self.project(&values), true))
    }

    /// Gradient-shaped vector `-scale_k * P_k(field(u))` without the linear
    /// part; used for parameter derivatives.
    pub fn nonlinear_term(&self, c: &[f64], field: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
        let values: Vec<Vec<f64>> = self.samples(c).iter().map(|u| field(u)).collect();
        self.assemble(c, &self.project(&values), false)
    }

    /// Discrete functional: exact kinetic part, trapezoidal potential part.
    pub fn action(&self, c: &[f64]) -> f64 {
        let u = self.to_loop(c);
        let t = self.period;
        let kinetic: f64 = (1..=self.modes)
            .map(|k| {
                let w = u.omega(k);
                0.25 * t * w * w * u.harmonic_norm(k).powi(2)
            })
            .sum();
        let m = self.tables.m;
        let pot: f64 = self.samples(c).iter().map(|x| self.potential.value(x)).sum();
        kinetic - t / m as f64 * pot
    }

    /// Per-coefficient weights of the `H^1_T` inner product.
    pub fn h1_weights(&self) -> Vec<f64> {
        let n = self.n;
        let t = self.period;
        let mut w = vec![t; self.len()];
        for k in 1..=self.modes {
            let om = 2.0 * PI * k as f64 / t;
            let v = 0.5 * t * (1.0 + om * om);
            for i in 0..n {
                w[index_a(n, k, i)] = v;
                w[index_b(n, k, i)] = v;
            }
        }
        w
    }

    /// Jacobian of [`Self::gradient`] with respect to the flat coefficients.
    ///
    /// With `B(t) = V''(u(t)) - A_ref` and its discrete cosine/sine
    /// coefficients `Bc[p]`, `Bs[p]` (`p <= 2N`), products of basis functions
    /// reduce to sums and differences of indices.
    pub fn jacobian(&self, c: &[f64]) -> Result<DMatrix<f64>, GalerkinError> {
        let (n, m, nm) = (self.n, self.tables.m, self.modes);
        let hess: Vec<SymMatrix> = self
            .samples(c)
            .iter()
            .map(|u| self.potential.hessian(u).lin_comb(1.0, &self.reference, -1.0))
            .collect();
        if hess.iter().any(|h| h.data().iter().any(|v| !v.is_finite())) {
            return Err(GalerkinError::NonFinite);
        }
        let np = 2 * nm + 1;
        let mut bc = vec![0.0; np * n * n];
        let mut bs = vec![0.0; np * n * n];
        for p in 0..np {
            let (ct, st) = (&self.tables.cos[p * m..(p + 1) * m], &self.tables.sin[p * m..(p + 1) * m]);
            let (oc, os) = (&mut bc[p * n * n..(p + 1) * n * n], &mut bs[p * n * n..(p + 1) * n * n]);
            for (j, h) in hess.iter().enumerate() {
                for (e, &v) in h.data().iter().enumerate() {
                    oc[e] += v * ct[j];
                    os[e] += v * st[j];
                }
            }
        }
        let inv = 1.0 / m as f64;
        bc.iter_mut().chain(bs.iter_mut()).for_each(|v| *v *= inv);
        let cblk = |p: usize| &bc[p * n * n..(p + 1) * n * n];
        // sin coefficient at a signed index
        let sblk = |d: isize, i: usize| -> f64 {
            let v = bs[d.unsigned_abs() * n * n + i];
            if d < 0 {
                -v
            } else {
                v
            }
        };

        let dim = self.len();
        let mut jac = DMatrix::<f64>::zeros(dim, dim);
        // Rows: mode 0 is scaled by -1 (no factor 2), modes k >= 1 by -2 s_k.
        // Entries of (1/T) int B phi_m psi_k dt for phi, psi in {cos, sin}.
        for k in 0..=nm {
            let rs = if k == 0 { -1.0 } else { -self.h1_scale(k) };
            for mm in 0..=nm {
                let (ki, mi) = (k as isize, mm as isize);
                for r in 0..n {
                    for s in 0..n {
                        let e = r * n + s;
                        // (1/T) int B cos_m cos_k
                        let cc = 0.5 * (cblk(k.abs_diff(mm))[e] + cblk(k + mm)[e]);
                        // (1/T) int B sin_m cos_k
                        let sc = 0.5 * (sblk(mi + ki, e) + sblk(mi - ki, e));
                        // (1/T) int B cos_m sin_k
                        let cs = 0.5 * (sblk(ki + mi, e) + sblk(ki - mi, e));
                        // (1/T) int B sin_m sin_k
                        let ss = 0.5 * (cblk(k.abs_diff(mm))[e] - cblk(k + mm)[e]);
                        let f = if k == 0 { 1.0 } else { 2.0 };
                        jac[(index_a(n, k, r), index_a(n, mm, s))] = rs * f * cc;
                        if mm > 0 {
                            jac[(index_a(n, k, r), index_b(n, mm, s))] = rs * f * sc;
                        }
                        if k > 0 {
                            jac[(index_b(n, k, r), index_a(n, mm, s))] = rs * f * cs;
                            if mm > 0 {
                                jac[(index_b(n, k, r), index_b(n, mm, s))] = rs * f * ss;
                            }
                        }
                    }
                }
            }
        }
        for k in 0..=nm {
            let blk = &self.blocks[k];
            let starts: &[usize] = if k == 0 {
                &[0]
            } else {
                &[index_a(n, k, 0), index_b(n, k, 0)]
            };
            for &st in starts {
                for r in 0..n {
                    for s in 0..n {
                        jac[(st + r, st + s)] += blk.get(r, s);
                    }
                }
            }
        }
        Ok(jac)
    }
}
