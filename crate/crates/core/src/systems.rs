//! Pipeline input: a potential's stationary points, their Hessians and the
//! Hessian at infinity, plus the model family
//!
//! ```text
//! V(x) = 1/2 <V''(inf) x, x> - 1 / sqrt(|x|^2 + a),   a > 0.
//! ```

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::spectral::{eigen_sym, matrix_from_entries, MatrixEntry, SpectralError, SymMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("period must be positive and finite, got {0}")]
    BadPeriod(f64),
    #[error("parameter a must be positive and finite, got {0}")]
    BadShape(f64),
    #[error("{what} has dimension {got}, expected {expected}")]
    Dimension {
        what: String,
        expected: usize,
        got: usize,
    },
    #[error("critical points {0} and {1} coincide")]
    DuplicateLocation(String, String),
    #[error("critical point id {0:?} is used twice")]
    DuplicateId(String),
    #[error("gradient at critical point {id} has norm {norm:e}, expected <= 1e-8")]
    NotCritical { id: String, norm: f64 },
    #[error(
        "eigenvalue {eigenvalue} of V''(inf) lies in [-a^(-3/2), 0) with multiplicity {multiplicity}; \
         the stationary set is then not a finite list"
    )]
    NonSimpleEigenvalue { eigenvalue: f64, multiplicity: usize },
    #[error("input must give either \"model\" or \"n\", \"T\", \"v_inf\" and \"critical_points\" (missing {0})")]
    MissingField(&'static str),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("invalid JSON: {0}")]
    Json(String),
}

/// A `C^2` potential. Implementations must be stateless so that evaluations
/// can run concurrently.
pub trait Potential: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn hessian(&self, x: &[f64]) -> SymMatrix;
}

/// `V(x) = 1/2 <A x, x>`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticPotential {
    pub a: SymMatrix,
}

impl Potential for QuadraticPotential {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * dot(&self.a.mul_vec(x), x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.a.mul_vec(x)
    }

    fn hessian(&self, _x: &[f64]) -> SymMatrix {
        self.a.clone()
    }
}

/// The model potential with Hessian at infinity `v_inf` and shape `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPotential {
    pub v_inf: SymMatrix,
    pub a: f64,
}

impl ModelPotential {
    pub fn new(v_inf: SymMatrix, a: f64) -> Result<Self, SystemError> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(SystemError::BadShape(a));
        }
        Ok(Self { v_inf, a })
    }

    pub fn n(&self) -> usize {
        self.v_inf.dim()
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

impl Potential for ModelPotential {
    fn dim(&self) -> usize {
        self.n()
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * dot(&self.v_inf.mul_vec(x), x) - 1.0 / (dot(x, x) + self.a).sqrt()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        model_gradient(self, x)
    }

    fn hessian(&self, x: &[f64]) -> SymMatrix {
        model_hessian(self, x)
    }
}

/// `V'(x) = V''(inf) x + x / (|x|^2 + a)^{3/2}`.
pub fn model_gradient(m: &ModelPotential, x: &[f64]) -> Vec<f64> {
    let s = (dot(x, x) + m.a).powf(-1.5);
    m.v_inf
        .mul_vec(x)
        .into_iter()
        .zip(x)
        .map(|(l, xi)| l + s * xi)
        .collect()
}

/// `V''(x) = V''(inf) + W''(x)` with
/// `W''_ij = -3 x_i x_j / (|x|^2 + a)^{5/2} + delta_ij / (|x|^2 + a)^{3/2}`.
pub fn model_hessian(m: &ModelPotential, x: &[f64]) -> SymMatrix {
    let n = m.n();
    let r = dot(x, x) + m.a;
    let s3 = r.powf(-1.5);
    let s5 = r.powf(-2.5);
    let mut data = m.v_inf.data().to_vec();
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] -= 3.0 * x[i] * x[j] * s5;
        }
        data[i * n + i] += s3;
    }
    SymMatrix::new(n, data).expect("square by construction")
}

/// A stationary point of the model potential.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCriticalPoint {
    pub id: String,
    pub x: Vec<f64>,
}

/// Stationary points of the model potential together with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCriticalSet {
    pub points: Vec<ModelCriticalPoint>,
    pub notes: Vec<String>,
}

/// All zeros of `V'`: the origin and `+-amp * P e_i` for every eigenvalue
/// `lambda_i` of `V''(inf)` in `(-a^{-3/2}, 0)`, with
/// `amp = sqrt(lambda_i^{-2/3} - a)`.
///
/// In eigen-coordinates `y` of `V''(inf)` the equation reads
/// `y_i (lambda_i + (|y|^2 + a)^{-3/2}) = 0`, so at most one coordinate of a
/// zero is nonzero when the qualifying eigenvalues are simple. An eigenvalue
/// equal to `-a^{-3/2}` gives amplitude 0 and no point besides the origin,
/// which is then degenerate.
pub fn model_critical_points(m: &ModelPotential) -> Result<ModelCriticalSet, SystemError> {
    let n = m.n();
    let spec = eigen_sym(&m.v_inf)?;
    let floor = -m.a.powf(-1.5);
    let tol = spec.cluster_tol;
    let mut points = vec![ModelCriticalPoint {
        id: "origin".into(),
        x: vec![0.0; n],
    }];
    let mut notes = Vec::new();
    for (c, (&lambda, &mult)) in spec.eigenvalues.iter().zip(&spec.multiplicities).enumerate() {
        if lambda >= -tol || lambda < floor - tol {
            continue;
        }
        if mult > 1 {
            return Err(SystemError::NonSimpleEigenvalue {
                eigenvalue: lambda,
                multiplicity: mult,
            });
        }
        if (lambda - floor).abs() <= tol {
            notes.push(format!(
                "eigenvalue {lambda} of V''(inf) equals -a^(-3/2): amplitude 0, origin is degenerate"
            ));
            continue;
        }
        let amp = (lambda.abs().powf(-2.0 / 3.0) - m.a).sqrt();
        let col = spec.cluster_columns(c).start;
        let v = spec.eigenvector(col);
        let label = match axis_of(v) {
            Some(i) => format!("e{}", i + 1),
            None => format!("v{}", col + 1),
        };
        for (sign, tag) in [(1.0, '+'), (-1.0, '-')] {
            points.push(ModelCriticalPoint {
                id: format!("{tag}{label}"),
                x: v.iter().map(|vi| sign * amp * vi).collect(),
            });
        }
    }
    Ok(ModelCriticalSet { points, notes })
}

/// Index of the coordinate axis a unit vector lies on, if any.
fn axis_of(v: &[f64]) -> Option<usize> {
    let (i, big) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))?;
    let rest: f64 = v.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| x.abs()).sum();
    (big.abs() > 1.0 - 1e-12 && rest < 1e-12).then_some(i)
}

/// One listed stationary point.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub id: String,
    pub location: Vec<f64>,
    pub hessian: SymMatrix,
    pub brouwer_override: Option<i64>,
}

/// Full input of the degree pipeline.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub n: usize,
    pub period: f64,
    pub v_inf: SymMatrix,
    pub critical_points: Vec<CriticalPoint>,
    /// Brouwer index at infinity when known a priori (model family).
    pub infinity_brouwer: Option<i64>,
    pub potential: Option<Arc<dyn Potential>>,
    /// Set when the potential is the model family; kept for serialisation.
    pub model: Option<ModelPotential>,
    pub notes: Vec<String>,
}

impl SystemSpec {
    /// Validates and assembles a spec.
    pub fn new(
        period: f64,
        v_inf: SymMatrix,
        critical_points: Vec<CriticalPoint>,
        potential: Option<Arc<dyn Potential>>,
    ) -> Result<Self, SystemError> {
        let n = v_inf.dim();
        if n == 0 {
            return Err(SystemError::EmptyDimension);
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(SystemError::BadPeriod(period));
        }
        for p in &critical_points {
            if p.location.len() != n {
                return Err(SystemError::Dimension {
                    what: format!("location of {}", p.id),
                    expected: n,
                    got: p.location.len(),
                });
            }
            if p.hessian.dim() != n {
                return Err(SystemError::Dimension {
                    what: format!("hessian of {}", p.id),
                    expected: n,
                    got: p.hessian.dim(),
                });
            }
        }
        for (i, p) in critical_points.iter().enumerate() {
            for q in &critical_points[..i] {
                if q.id == p.id {
                    return Err(SystemError::DuplicateId(p.id.clone()));
                }
                let gap: Vec<f64> = p.location.iter().zip(&q.location).map(|(a, b)| a - b).collect();
                let scale = 1.0 + norm(&p.location).max(norm(&q.location));
                if norm(&gap) <= 1e-9 * scale {
                    return Err(SystemError::DuplicateLocation(q.id.clone(), p.id.clone()));
                }
            }
        }
        if let Some(pot) = &potential {
            if pot.dim() != n {
                return Err(SystemError::Dimension {
                    what: "potential".into(),
                    expected: n,
                    got: pot.dim(),
                });
            }
            for p in &critical_points {
                let g = norm(&pot.gradient(&p.location));
                if !(g <= 1e-8) {
                    return Err(SystemError::NotCritical {
                        id: p.id.clone(),
                        norm: g,
                    });
                }
            }
        }
        Ok(Self {
            n,
            period,
            v_inf,
            critical_points,
            infinity_brouwer: None,
            potential,
            model: None,
            notes: Vec::new(),
        })
    }

    pub fn hessian_only(&self) -> bool {
        self.potential.is_none()
    }

    /// Same system with another period.
    pub fn with_period(&self, period: f64) -> Result<Self, SystemError> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(SystemError::BadPeriod(period));
        }
        Ok(Self {
            period,
            ..self.clone()
        })
    }

    /// Parses the JSON input format.
    pub fn from_json_str(text: &str) -> Result<Self, SystemError> {
        let file: SystemFile =
            serde_json::from_str(text).map_err(|e| SystemError::Json(e.to_string()))?;
        file.resolve()
    }

    /// Canonical numeric form, used for hashing and round trips.
    pub fn to_file(&self) -> SystemFile {
        let num = MatrixEntry::Number;
        let mat = |m: &SymMatrix| -> Vec<Vec<MatrixEntry>> {
            m.rows().into_iter().map(|r| r.into_iter().map(num).collect()).collect()
        };
        SystemFile {
            model: None,
            n: Some(self.n),
            period: Some(num(self.period)),
            v_inf: Some(mat(&self.v_inf)),
            a: self.model.as_ref().map(|m| num(m.a)),
            critical_points: Some(
                self.critical_points
                    .iter()
                    .map(|p| PointInput {
                        id: p.id.clone(),
                        x: p.location.iter().copied().map(num).collect(),
                        hessian: Some(mat(&p.hessian)),
                        brouwer: p.brouwer_override,
                    })
                    .collect(),
            ),
            brouwer_inf: self.infinity_brouwer,
        }
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn input_hash(&self) -> String {
        let text = serde_json::to_string(&self.to_file()).expect("plain data serialises");
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Assembles the model system for period `T`: stationary points, their
/// Hessians and the Brouwer index at infinity `(-1)^{n - m^-(V''(inf))}`.
pub fn build_system(m: &ModelPotential, period: f64) -> Result<SystemSpec, SystemError> {
    let set = model_critical_points(m)?;
    let points = set
        .points
        .into_iter()
        .map(|p| CriticalPoint {
            hessian: model_hessian(m, &p.x),
            id: p.id,
            location: p.x,
            brouwer_override: None,
        })
        .collect();
    let mut spec = SystemSpec::new(
        period,
        m.v_inf.clone(),
        points,
        Some(Arc::new(m.clone())),
    )?;
    let inf = eigen_sym(&m.v_inf)?;
    spec.infinity_brouwer = Some(crate::eqdeg::index_at_infinity_sign(&inf));
    spec.model = Some(m.clone());
    spec.notes = set.notes;
    spec.notes.push("brouwer at infinity: (-1)^(n - m^-(V''(inf))) for the model family".into());
    Ok(spec)
}

/// JSON input. Either `model` alone, or the explicit fields; when `a` is
/// given with explicit fields the model potential is attached for
/// verification and missing `critical_points` are computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub period: Option<MatrixEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_inf: Option<Vec<Vec<MatrixEntry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<MatrixEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical_points: Option<Vec<PointInput>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brouwer_inf: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelInput {
    pub v_inf: Vec<Vec<MatrixEntry>>,
    pub a: MatrixEntry,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(rename = "T")]
    pub period: MatrixEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointInput {
    pub id: String,
    pub x: Vec<MatrixEntry>,
    /// Omitted hessians are computed from the model potential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hessian: Option<Vec<Vec<MatrixEntry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brouwer: Option<i64>,
}

fn check_dim(what: &str, expected: Option<usize>, got: usize) -> Result<(), SystemError> {
    match expected {
        Some(e) if e != got => Err(SystemError::Dimension {
            what: what.into(),
            expected: e,
            got,
        }),
        _ => Ok(()),
    }
}

impl SystemFile {
    pub fn resolve(&self) -> Result<SystemSpec, SystemError> {
        if let Some(model) = &self.model {
            let v_inf = matrix_from_entries(&model.v_inf)?;
            check_dim("v_inf", model.n, v_inf.dim())?;
            let m = ModelPotential::new(v_inf, model.a.value()?)?;
            return build_system(&m, model.period.value()?);
        }
        let period = self.period.as_ref().ok_or(SystemError::MissingField("T"))?.value()?;
        let v_inf = matrix_from_entries(self.v_inf.as_ref().ok_or(SystemError::MissingField("v_inf"))?)?;
        check_dim("v_inf", self.n, v_inf.dim())?;
        let model = match &self.a {
            Some(a) => Some(ModelPotential::new(v_inf.clone(), a.value()?)?),
            None => None,
        };
        let Some(points) = &self.critical_points else {
            let m = model.ok_or(SystemError::MissingField("critical_points"))?;
            let mut spec = build_system(&m, period)?;
            if self.brouwer_inf.is_some() {
                spec.infinity_brouwer = self.brouwer_inf;
            }
            return Ok(spec);
        };
        let mut resolved = Vec::with_capacity(points.len());
        for p in points {
            let x = p.x.iter().map(MatrixEntry::value).collect::<Result<Vec<_>, _>>()?;
            let hessian = match (&p.hessian, &model) {
                (Some(h), _) => matrix_from_entries(h)?,
                (None, Some(m)) => {
                    check_dim(&format!("location of {}", p.id), Some(m.n()), x.len())?;
                    model_hessian(m, &x)
                }
                (None, None) => return Err(SystemError::MissingField("hessian")),
            };
            resolved.push(CriticalPoint {
                id: p.id.clone(),
                location: x,
                hessian,
                brouwer_override: p.brouwer,
            });
        }
        let potential = model.clone().map(|m| Arc::new(m) as Arc<dyn Potential>);
        let mut spec = SystemSpec::new(period, v_inf, resolved, potential)?;
        spec.infinity_brouwer = self.brouwer_inf;
        if let Some(m) = model {
            if spec.infinity_brouwer.is_none() {
                spec.infinity_brouwer = Some(crate::eqdeg::index_at_infinity_sign(&eigen_sym(&m.v_inf)?));
                spec.notes.push("brouwer at infinity: (-1)^(n - m^-(V''(inf))) for the model family".into());
            }
            spec.model = Some(m);
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQ2: f64 = std::f64::consts::SQRT_2;

    fn ex65() -> ModelPotential {
        ModelPotential::new(SymMatrix::diag(&[3.5, -2.0, 0.0, -1.0 / (2.0 * SQ2)]), 1.0).unwrap()
    }

    #[test]
    fn gradient_vanishes_at_listed_points() {
        let m = ex65();
        assert_eq!(model_gradient(&m, &[0.0; 4]), vec![0.0; 4]);
        let g = model_gradient(&m, &[0.0, 0.0, 0.0, 1.0]);
        assert!(norm(&g) < 1e-15);
    }

    #[test]
    fn hessians_of_the_four_dimensional_example() {
        let m = ex65();
        let h0 = model_hessian(&m, &[0.0; 4]);
        assert_eq!(h0, SymMatrix::diag(&[4.5, -1.0, 1.0, 1.0 - 1.0 / (2.0 * SQ2)]));
        let c = 1.0 / (2.0 * SQ2);
        let expected = [3.5 + c, -2.0 + c, c, -3.0 / (4.0 * SQ2)];
        for s in [1.0, -1.0] {
            let h = model_hessian(&m, &[0.0, 0.0, 0.0, s]);
            for (i, ei) in expected.iter().enumerate() {
                for j in 0..4 {
                    let e = if i == j { *ei } else { 0.0 };
                    assert!((h.get(i, j) - e).abs() < 1e-14, "{i}{j}");
                }
            }
        }
    }

    #[test]
    fn sitnikov_hessian_is_eight() {
        let m = ModelPotential::new(SymMatrix::zeros(1), 0.25).unwrap();
        assert!((model_hessian(&m, &[0.0]).get(0, 0) - 8.0).abs() < 1e-14);
        let set = model_critical_points(&m).unwrap();
        assert_eq!(set.points.len(), 1);
    }

    #[test]
    fn critical_sets() {
        let ids: Vec<String> = model_critical_points(&ex65())
            .unwrap()
            .points
            .into_iter()
            .map(|p| p.id)
            .collect();
        assert_eq!(ids, ["origin", "+e4", "-e4"]);
        let calm = ModelPotential::new(SymMatrix::diag(&[1.0, -5.0]), 1.0).unwrap();
        assert_eq!(model_critical_points(&calm).unwrap().points.len(), 1);
        let double = ModelPotential::new(SymMatrix::diag(&[-0.5, -0.5]), 1.0).unwrap();
        assert!(matches!(
            model_critical_points(&double),
            Err(SystemError::NonSimpleEigenvalue { multiplicity: 2, .. })
        ));
    }

    #[test]
    fn boundary_eigenvalue_leaves_degenerate_origin() {
        let m = ModelPotential::new(SymMatrix::diag(&[3.5, -1.0, 0.0, -1.0 / (2.0 * SQ2)]), 1.0)
            .unwrap();
        let set = model_critical_points(&m).unwrap();
        assert_eq!(set.points.len(), 3);
        assert_eq!(set.notes.len(), 1);
        let spec = build_system(&m, 2.0 * std::f64::consts::PI).unwrap();
        assert!(eigen_sym(&spec.critical_points[0].hessian).unwrap().is_singular());
    }

    #[test]
    fn rotated_model_points_are_labelled_by_eigenvector() {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let q = [c, c, -c, c];
        let m = ModelPotential::new(SymMatrix::from_eigen(&q, &[-0.25, 2.0]), 1.0).unwrap();
        let set = model_critical_points(&m).unwrap();
        assert_eq!(set.points.len(), 3);
        assert_eq!(set.points[1].id, "+v1");
        for p in &set.points {
            assert!(norm(&model_gradient(&m, &p.x)) < 1e-12);
        }
    }

    #[test]
    fn build_system_examples() {
        let spec = build_system(&ex65(), 2.0 * std::f64::consts::PI).unwrap();
        assert_eq!(spec.critical_points.len(), 3);
        assert_eq!(spec.infinity_brouwer, Some(1));
        let sit = build_system(&ModelPotential::new(SymMatrix::zeros(1), 0.25).unwrap(), 1.0).unwrap();
        assert_eq!(sit.critical_points.len(), 1);
        assert_eq!(sit.infinity_brouwer, Some(-1));
    }

    #[test]
    fn spec_validation() {
        let h = SymMatrix::identity(1);
        let p = |id: &str, x: f64| CriticalPoint {
            id: id.into(),
            location: vec![x],
            hessian: h.clone(),
            brouwer_override: None,
        };
        assert!(matches!(
            SystemSpec::new(1.0, h.clone(), vec![p("a", 0.0), p("b", 0.0)], None),
            Err(SystemError::DuplicateLocation(..))
        ));
        assert!(matches!(
            SystemSpec::new(1.0, h.clone(), vec![p("a", 0.0), p("a", 1.0)], None),
            Err(SystemError::DuplicateId(_))
        ));
        assert!(matches!(
            SystemSpec::new(-1.0, h.clone(), vec![], None),
            Err(SystemError::BadPeriod(_))
        ));
        let quad: Arc<dyn Potential> = Arc::new(QuadraticPotential { a: h.clone() });
        assert!(matches!(
            SystemSpec::new(1.0, h.clone(), vec![p("a", 0.5)], Some(quad)),
            Err(SystemError::NotCritical { .. })
        ));
    }

    #[test]
    fn json_inputs() {
        let model = r#"{"model": {"v_inf": [["7/2",0,0,0],[0,-2,0,0],[0,0,0,0],[0,0,0,"-1/(2*sqrt(2))"]],
                        "a": 1, "n": 4, "T": "2*pi"}}"#;
        let spec = SystemSpec::from_json_str(model).unwrap();
        assert_eq!(spec.critical_points.len(), 3);
        assert!(!spec.hessian_only());
        let explicit = r#"{"n": 1, "T": 6.283185307179586, "v_inf": [[0]],
            "critical_points": [{"id": "origin", "x": [0], "hessian": [[8]]}], "brouwer_inf": -1}"#;
        let spec = SystemSpec::from_json_str(explicit).unwrap();
        assert!(spec.hessian_only());
        assert_eq!(spec.infinity_brouwer, Some(-1));
        let again = SystemSpec::from_json_str(&serde_json::to_string(&spec.to_file()).unwrap()).unwrap();
        assert_eq!(again.input_hash(), spec.input_hash());
        assert_eq!(spec.input_hash().len(), 64);
        assert!(matches!(
            SystemSpec::from_json_str(r#"{"n": 1, "v_inf": [[0]]}"#),
            Err(SystemError::MissingField("T"))
        ));
        assert!(matches!(
            SystemSpec::from_json_str(r#"{"bogus": 1}"#),
            Err(SystemError::Json(_))
        ));
    }
}
