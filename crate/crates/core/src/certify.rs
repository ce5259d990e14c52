//! Existence and continuation certificates.
//!
//! A system has a non-stationary `T`-periodic solution as soon as, for some
//! `k >= 1` outside the exclusion set,
//!
//! ```text
//! I_V(inf, T)_{Z_k}  !=  sum_i I_V(p_i, T)_{Z_k}.
//! ```

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eqdeg::{
    brouwer_index_degenerate, brouwer_index_nondegenerate, gcd_closure, index_iv,
    resolve_brouwer, BrouwerSource, DegreeError, EquivariantIndex, PointId, PointSlot,
};
use crate::ring::Coord;
use crate::spectral::{eigen_sym_with, SpectralData, SpectralError, Tolerances};
use crate::systems::SystemSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error("criterion silent: every coordinate in 1..={k_max} lies in the exclusion set {excluded:?}")]
    CriterionSilent { k_max: u32, excluded: BTreeSet<u32> },
    #[error("base system is not certified (verdict {0}); no continuation statement")]
    BaseNotProven(Verdict),
    #[error(transparent)]
    Degree(#[from] DegreeError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[derive(Default)]
pub struct AnalysisConfig {
    pub tolerances: Tolerances,
    /// Largest compared coordinate; defaults to `max k_cutoff + 1`.
    pub k_max: Option<u32>,
}


#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Proven,
    NotDecided,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Proven => "proven",
            Verdict::NotDecided => "not-decided",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Excluded,
    Equal,
    Differs,
}

/// One compared coordinate `Z_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub k: u32,
    /// `I_V(inf, T)_{Z_k}`, absent when undefined.
    pub lhs: Option<i64>,
    /// `sum_i I_V(p_i, T)_{Z_k}`, absent when any summand is undefined.
    pub rhs: Option<i64>,
    pub status: RowStatus,
}

/// Everything computed for one stationary point or for infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub id: PointId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<Vec<f64>>,
    pub hessian_eigenvalues: Vec<f64>,
    pub brouwer: i64,
    pub brouwer_source: BrouwerSource,
    pub index: EquivariantIndex,
}

/// `ind(-V', inf)` against `sum_i ind(-V', p_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumFormula {
    pub lhs: i64,
    pub rhs: i64,
    pub residual: i64,
    /// Index reconstructed from the formula, if one was missing.
    pub solved_for: Option<PointId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalPeriodNote {
    pub point: PointId,
    pub resonant_modes: BTreeSet<u32>,
    /// `T / g` for every gcd `g` of a nonempty subset of the modes, ascending.
    pub periods: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceCertificate {
    pub verdict: Verdict,
    pub witness_k: Option<u32>,
    pub lhs: Option<i64>,
    pub rhs: Option<i64>,
    pub n: usize,
    pub period: f64,
    pub global_exclusion: BTreeSet<u32>,
    pub checked_range: [u32; 2],
    pub comparisons: Vec<ComparisonRow>,
    /// Listed points in input order, then infinity.
    pub points: Vec<PointReport>,
    pub sum_formula: SumFormula,
    /// `SO(2)` coordinate of `I_V(inf, T) - sum_i I_V(p_i, T)`.
    pub so2_difference: i64,
    pub minimal_period_notes: Vec<MinimalPeriodNote>,
    pub input_hash: String,
    pub tolerances: Tolerances,
    pub hessian_only: bool,
    pub notes: Vec<String>,
}

impl ExistenceCertificate {
    pub fn point(&self, id: &PointId) -> Option<&PointReport> {
        self.points.iter().find(|p| &p.id == id)
    }

    pub fn infinity(&self) -> &PointReport {
        self.points.last().expect("infinity is always present")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serialises")
    }
}

/// `T / g` over all gcds `g` of nonempty subsets of `modes`, ascending.
pub fn minimal_period_menu(modes: &BTreeSet<u32>, period: f64) -> Vec<f64> {
    gcd_closure(modes)
        .into_iter()
        .rev()
        .map(|g| period / f64::from(g))
        .collect()
}

struct Prepared {
    spectra: Vec<SpectralData>,
    inf_spectrum: SpectralData,
    brouwer: Vec<i64>,
    sources: Vec<BrouwerSource>,
    inf_brouwer: i64,
    inf_source: BrouwerSource,
    sum: SumFormula,
}

/// Radius for the boundary oracle: a tenth of the distance to the nearest
/// other listed point, capped at 0.1.
fn oracle_radius(spec: &SystemSpec, i: usize) -> f64 {
    let p = &spec.critical_points[i].location;
    spec.critical_points
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, q)| {
            p.iter()
                .zip(&q.location)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .fold(1.0, f64::min)
        * 0.1
}

fn prepare(spec: &SystemSpec, cfg: &AnalysisConfig) -> Result<Prepared, CertifyError> {
    let tol = cfg.tolerances;
    let spectra = spec
        .critical_points
        .iter()
        .map(|p| eigen_sym_with(&p.hessian, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let inf_spectrum = eigen_sym_with(&spec.v_inf, tol)?;

    let mut known = Vec::with_capacity(spectra.len());
    let mut sources = Vec::with_capacity(spectra.len());
    for (i, (p, s)) in spec.critical_points.iter().zip(&spectra).enumerate() {
        let (b, src) = if let Some(b) = p.brouwer_override {
            (Some(b), BrouwerSource::Override)
        } else if !s.is_singular() {
            (Some(brouwer_index_nondegenerate(s)?), BrouwerSource::SignDeterminant)
        } else if let (Some(pot), true) = (&spec.potential, spec.n <= 3) {
            let grad = |x: &[f64]| pot.gradient(x);
            let b = brouwer_index_degenerate(&grad, &p.location, oracle_radius(spec, i))?;
            (Some(b), BrouwerSource::BoundaryOracle)
        } else {
            (None, BrouwerSource::SumFormulaResidual)
        };
        known.push(b);
        sources.push(src);
    }
    let (inf_known, mut inf_source) = if let Some(b) = spec.infinity_brouwer {
        let src = if spec.model.is_some() {
            BrouwerSource::InfinityMorseFormula
        } else {
            BrouwerSource::Override
        };
        (Some(b), src)
    } else if !inf_spectrum.is_singular() {
        (
            Some(brouwer_index_nondegenerate(&inf_spectrum)?),
            BrouwerSource::SignDeterminant,
        )
    } else {
        (None, BrouwerSource::SumFormulaResidual)
    };
    let (brouwer, inf_brouwer, solved) = resolve_brouwer(&known, inf_known)?;
    let solved_for = match solved {
        Some(PointSlot::Finite(i)) => Some(PointId::Finite(spec.critical_points[i].id.clone())),
        Some(PointSlot::Infinity) => {
            inf_source = BrouwerSource::SumFormulaResidual;
            Some(PointId::Infinity)
        }
        None => None,
    };
    let rhs: i64 = brouwer.iter().sum();
    Ok(Prepared {
        spectra,
        inf_spectrum,
        brouwer,
        sources,
        inf_brouwer,
        inf_source,
        sum: SumFormula {
            lhs: inf_brouwer,
            rhs,
            residual: inf_brouwer - rhs,
            solved_for,
        },
    })
}

/// `ind(-V', inf) - sum_i ind(-V', p_i)`; at most one index may be missing,
/// in which case it is solved for and the residual is 0.
pub fn sum_formula_check(spec: &SystemSpec, cfg: &AnalysisConfig) -> Result<SumFormula, CertifyError> {
    Ok(prepare(spec, cfg)?.sum)
}

/// Runs the existence criterion.
pub fn analyze(spec: &SystemSpec, cfg: &AnalysisConfig) -> Result<ExistenceCertificate, CertifyError> {
    let prep = prepare(spec, cfg)?;
    let period = spec.period;
    let mut points = Vec::with_capacity(spec.critical_points.len() + 1);
    for (i, p) in spec.critical_points.iter().enumerate() {
        let id = PointId::Finite(p.id.clone());
        let index = index_iv(id.clone(), &prep.spectra[i], Some(prep.brouwer[i]), period)?;
        points.push(PointReport {
            id,
            location: Some(p.location.clone()),
            hessian_eigenvalues: prep.spectra[i].raw_eigenvalues.clone(),
            brouwer: prep.brouwer[i],
            brouwer_source: prep.sources[i],
            index,
        });
    }
    let inf_index = index_iv(PointId::Infinity, &prep.inf_spectrum, Some(prep.inf_brouwer), period)?;
    points.push(PointReport {
        id: PointId::Infinity,
        location: None,
        hessian_eigenvalues: prep.inf_spectrum.raw_eigenvalues.clone(),
        brouwer: prep.inf_brouwer,
        brouwer_source: prep.inf_source,
        index: inf_index,
    });

    let global_exclusion: BTreeSet<u32> = points
        .iter()
        .flat_map(|p| p.index.exclusion.iter().copied())
        .collect();
    let k_max = cfg.k_max.unwrap_or_else(|| {
        points.iter().map(|p| p.index.k_cutoff).max().unwrap_or(0) + 1
    });
    let (finite, inf) = points.split_at(points.len() - 1);
    let inf = &inf[0];
    let mut comparisons = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let lhs = inf.index.value.zk_coord(k).defined();
        let rhs = finite.iter().try_fold(0i64, |acc, p| match p.index.value.zk_coord(k) {
            Coord::Defined(v) => Some(acc + v),
            Coord::Undefined => None,
        });
        let status = match (lhs, rhs) {
            _ if global_exclusion.contains(&k) => RowStatus::Excluded,
            (Some(l), Some(r)) if l != r => RowStatus::Differs,
            (Some(_), Some(_)) => RowStatus::Equal,
            _ => RowStatus::Excluded,
        };
        comparisons.push(ComparisonRow { k, lhs, rhs, status });
    }
    if comparisons.iter().all(|r| r.status == RowStatus::Excluded) {
        return Err(CertifyError::CriterionSilent {
            k_max,
            excluded: global_exclusion,
        });
    }

    let so2_difference = inf.index.value.so2() - finite.iter().map(|p| p.index.value.so2()).sum::<i64>();
    let mut notes = spec.notes.clone();
    let witness = comparisons.iter().find(|r| r.status == RowStatus::Differs);
    let mut verdict = if witness.is_some() {
        Verdict::Proven
    } else {
        Verdict::NotDecided
    };
    if prep.sum.residual != 0 {
        notes.push(format!(
            "sum formula fails: ind(inf) = {} but the listed points sum to {}; the list of stationary points is incomplete",
            prep.sum.lhs, prep.sum.rhs
        ));
        verdict = Verdict::NotDecided;
    }
    if let Some(id) = &prep.sum.solved_for {
        notes.push(format!("brouwer index of {id} solved from the sum formula"));
    }
    let witness = witness.filter(|_| verdict == Verdict::Proven);

    let minimal_period_notes = points
        .iter()
        .filter(|p| !p.index.resonant_modes.is_empty())
        .map(|p| MinimalPeriodNote {
            point: p.id.clone(),
            resonant_modes: p.index.resonant_modes.clone(),
            periods: minimal_period_menu(&p.index.resonant_modes, period),
        })
        .collect();

    Ok(ExistenceCertificate {
        verdict,
        witness_k: witness.map(|r| r.k),
        lhs: witness.and_then(|r| r.lhs),
        rhs: witness.and_then(|r| r.rhs),
        n: spec.n,
        period,
        global_exclusion,
        checked_range: [1, k_max],
        comparisons,
        points,
        sum_formula: prep.sum,
        so2_difference,
        minimal_period_notes,
        input_hash: spec.input_hash(),
        tolerances: cfg.tolerances,
        hessian_only: spec.hessian_only(),
        notes,
    })
}

/// Statement about a one-parameter family `V_lambda` whose base `V_0`
/// satisfies the existence criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationCertificate {
    pub base: ExistenceCertificate,
    pub witness_k: u32,
    /// True when no point resonates at any mode `k >= 1`; the alternative of
    /// an accumulating sequence of solutions is then ruled out and both
    /// branches exist.
    pub branches_guaranteed: bool,
    pub statement: Vec<String>,
    /// A bounded branch has to end at a stationary point, where the isotropy
    /// jumps from `Z_k` to `SO(2)`.
    pub symmetry_breaking_possible: bool,
}

pub fn continuation_certificate(
    spec0: &SystemSpec,
    cfg: &AnalysisConfig,
) -> Result<ContinuationCertificate, CertifyError> {
    let base = analyze(spec0, cfg)?;
    if base.verdict != Verdict::Proven {
        return Err(CertifyError::BaseNotProven(base.verdict));
    }
    let witness_k = base.witness_k.expect("proven certificates carry a witness");
    let branches_guaranteed = base.points.iter().all(|p| p.index.resonant_modes.is_empty());
    let stationary: Vec<String> = spec0.critical_points.iter().map(|p| p.id.clone()).collect();
    let mut statement = Vec::new();
    if !branches_guaranteed {
        statement.push(format!(
            "either infinitely many non-stationary {}-periodic solutions at lambda = 0 accumulate at a stationary point or at infinity, or:",
            base.period
        ));
    }
    statement.push("C- in lambda <= 0 and C+ in lambda >= 0 are closed connected sets of solutions of the family".into());
    statement.push("(C1) each meets the annulus around the stationary points at lambda = 0 in a non-stationary solution".into());
    statement.push(format!(
        "(C2) each is unbounded or contains one of the stationary points {{{}}}",
        stationary.join(", ")
    ));
    Ok(ContinuationCertificate {
        base,
        witness_k,
        branches_guaranteed,
        statement,
        symmetry_breaking_possible: !stationary.is_empty(),
    })
}

fn fmt_opt(v: Option<i64>) -> String {
    v.map_or_else(|| "undef".to_string(), |v| v.to_string())
}

impl fmt::Display for ExistenceCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", self.verdict)?;
        if let (Some(k), Some(l), Some(r)) = (self.witness_k, self.lhs, self.rhs) {
            writeln!(f, "witness: Z_{k}  I(inf) = {l}  !=  sum I(p) = {r}")?;
        }
        writeln!(f, "n = {}, T = {}", self.n, self.period)?;
        writeln!(f, "input sha256: {}", self.input_hash)?;
        writeln!(
            f,
            "tolerances: cluster {:e}, resonance {:e} (relative to 1 + ||A||_F)",
            self.tolerances.cluster, self.tolerances.resonance
        )?;
        if self.hessian_only {
            writeln!(f, "hessian-only input: orbit verification unavailable")?;
        }
        writeln!(f)?;
        for p in &self.points {
            writeln!(
                f,
                "{}: brouwer {} ({}), I = {}",
                p.id, p.brouwer, p.brouwer_source, p.index.value
            )?;
            let table: Vec<String> = p
                .index
                .jk_table
                .iter()
                .map(|(k, j)| format!("j_{k}={j}"))
                .collect();
            writeln!(f, "  {}", table.join(" "))?;
            if !p.index.resonant_modes.is_empty() {
                writeln!(
                    f,
                    "  resonant modes {:?}, excluded {:?}",
                    p.index.resonant_modes, p.index.exclusion
                )?;
            }
        }
        writeln!(
            f,
            "\nsum formula: ind(inf) = {}, sum ind(p) = {}, residual {}",
            self.sum_formula.lhs, self.sum_formula.rhs, self.sum_formula.residual
        )?;
        writeln!(f, "exclusion set: {:?}", self.global_exclusion)?;
        writeln!(f, "\n  k   I(inf)_k   sum I(p)_k   status")?;
        for r in &self.comparisons {
            let status = match r.status {
                RowStatus::Excluded => "excluded",
                RowStatus::Equal => "equal",
                RowStatus::Differs => "DIFFERS",
            };
            writeln!(f, "{:>3} {:>10} {:>12}   {status}", r.k, fmt_opt(r.lhs), fmt_opt(r.rhs))?;
        }
        for note in &self.minimal_period_notes {
            let periods: Vec<String> = note.periods.iter().map(|p| format!("{p:.6}")).collect();
            writeln!(
                f,
                "\nsolutions near {} (resonant modes {:?}) have minimal period in {{{}}}",
                note.point,
                note.resonant_modes,
                periods.join(", ")
            )?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

impl fmt::Display for ContinuationCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "continuation from lambda = 0 (witness Z_{}, T = {})",
            self.witness_k, self.base.period
        )?;
        for line in &self.statement {
            writeln!(f, "  {line}")?;
        }
        writeln!(
            f,
            "branches guaranteed (no resonance at any point): {}",
            self.branches_guaranteed
        )?;
        writeln!(f, "symmetry breaking possible: {}", self.symmetry_breaking_possible)
    }
}

/// Minimal period `T / gcd(ks)` of a loop whose active harmonics are `ks`.
pub fn period_from_harmonics(ks: &[u32], period: f64) -> Option<(f64, u32)> {
    let g = ks.iter().copied().fold(0u32, |a, k| a.gcd(&k));
    (g > 0).then(|| (period / f64::from(g), g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SymMatrix;
    use crate::systems::{build_system, CriticalPoint, ModelPotential};
    use std::f64::consts::PI;

    const SQ2: f64 = std::f64::consts::SQRT_2;

    fn model(d: &[f64], a: f64, t: f64) -> SystemSpec {
        build_system(&ModelPotential::new(SymMatrix::diag(d), a).unwrap(), t).unwrap()
    }

    #[test]
    fn four_dimensional_example() {
        let spec = model(&[3.5, -2.0, 0.0, -1.0 / (2.0 * SQ2)], 1.0, 2.0 * PI);
        let cert = analyze(&spec, &AnalysisConfig::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::Proven);
        assert_eq!((cert.witness_k, cert.lhs, cert.rhs), (Some(2), Some(0), Some(-1)));
        assert_eq!(cert.global_exclusion, BTreeSet::from([1]));
        assert_eq!(cert.so2_difference, 0);
        assert_eq!(cert.sum_formula.residual, 0);
        assert_eq!(cert.minimal_period_notes.len(), 1);
        assert!((cert.minimal_period_notes[0].periods[0] - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn degenerate_origin_is_resolved_by_sum_formula() {
        let spec = model(&[3.5, -1.0, 0.0, -1.0 / (2.0 * SQ2)], 1.0, 2.0 * PI);
        let cfg = AnalysisConfig::default();
        let sum = sum_formula_check(&spec, &cfg).unwrap();
        assert_eq!(sum.solved_for, Some(PointId::Finite("origin".into())));
        let cert = analyze(&spec, &cfg).unwrap();
        assert_eq!(cert.points[0].brouwer, -1);
        assert_eq!(cert.points[0].brouwer_source, BrouwerSource::SumFormulaResidual);
        assert_eq!((cert.witness_k, cert.lhs, cert.rhs), (Some(2), Some(0), Some(-1)));
    }

    #[test]
    fn sitnikov_periods() {
        let cfg = AnalysisConfig::default();
        let verdict = |t: f64| analyze(&model(&[0.0], 0.25, t), &cfg).unwrap();
        let c = verdict(2.0 * PI);
        assert_eq!((c.witness_k, c.lhs, c.rhs), (Some(1), Some(0), Some(-1)));
        assert_eq!(verdict(2.3).verdict, Verdict::Proven);
        assert_eq!(verdict(1.0).verdict, Verdict::NotDecided);
    }

    #[test]
    fn incomplete_point_list_blocks_the_verdict() {
        let mut spec = model(&[3.5, -2.0, 0.0, -1.0 / (2.0 * SQ2)], 1.0, 2.0 * PI);
        spec.critical_points.pop();
        let cert = analyze(&spec, &AnalysisConfig::default()).unwrap();
        assert_eq!(cert.sum_formula.residual, 1);
        assert_eq!(cert.verdict, Verdict::NotDecided);
    }

    #[test]
    fn silent_criterion() {
        // One point resonant at mode 1, K_max forced to 1.
        let h = SymMatrix::diag(&[1.0]);
        let p = CriticalPoint {
            id: "p".into(),
            location: vec![0.0],
            hessian: h.clone(),
            brouwer_override: None,
        };
        let spec = SystemSpec::new(2.0 * PI, SymMatrix::diag(&[-1.0]), vec![p], None).unwrap();
        let cfg = AnalysisConfig {
            k_max: Some(1),
            ..Default::default()
        };
        assert!(matches!(analyze(&spec, &cfg), Err(CertifyError::CriterionSilent { .. })));
    }

    #[test]
    fn period_menus() {
        assert_eq!(minimal_period_menu(&BTreeSet::from([1]), 2.0 * PI), vec![2.0 * PI]);
        assert_eq!(minimal_period_menu(&BTreeSet::from([2, 3]), 6.0), vec![2.0, 3.0, 6.0]);
        assert_eq!(minimal_period_menu(&BTreeSet::from([4]), 4.0), vec![1.0]);
        assert_eq!(period_from_harmonics(&[4, 6], 4.0), Some((2.0, 2)));
        assert_eq!(period_from_harmonics(&[], 4.0), None);
    }

    #[test]
    fn continuation_statements() {
        let base = model(&[3.5, -2.0, 0.0, -1.0 / (2.0 * SQ2)], 1.0, 2.0 * PI);
        let cfg = AnalysisConfig::default();
        let c = continuation_certificate(&base, &cfg).unwrap();
        assert!(!c.branches_guaranteed);
        assert!(c.symmetry_breaking_possible);
        let sit = continuation_certificate(&model(&[0.0], 0.25, 2.0 * PI), &cfg).unwrap();
        assert!(sit.branches_guaranteed);
        assert_eq!(sit.witness_k, 1);
        assert!(matches!(
            continuation_certificate(&model(&[0.0], 0.25, 1.0), &cfg),
            Err(CertifyError::BaseNotProven(Verdict::NotDecided))
        ));
    }

    #[test]
    fn certificate_json_round_trip() {
        let spec = model(&[3.5, -2.0, 0.0, -1.0 / (2.0 * SQ2)], 1.0, 2.0 * PI);
        let cert = analyze(&spec, &AnalysisConfig::default()).unwrap();
        let back: ExistenceCertificate = serde_json::from_str(&cert.to_json()).unwrap();
        assert_eq!(back, cert);
        assert!(cert.to_string().contains("DIFFERS"));
    }
}
