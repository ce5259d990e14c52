use std::collections::BTreeSet;
use std::f64::consts::{PI, SQRT_2};
use std::fmt::Debug;

use anyhow::{Context, Result};
use serde::Serialize;
use so2deg::certify::{continuation_certificate, CertifyError};
use so2deg::eqdeg::{BrouwerSource, PointId};
use so2deg::spectral::j_k;
use so2deg::{analyze, eigen_sym, AnalysisConfig, ExistenceCertificate, SymMatrix, SystemSpec, Verdict};

const FOUR_DIM_RESONANT: &str = include_str!("../data/four_dim_resonant.json");
const FOUR_DIM_SINGULAR: &str = include_str!("../data/four_dim_singular.json");
const SITNIKOV: &str = include_str!("../data/sitnikov.json");

/// Floating comparisons of exact inputs after eigen-decomposition.
const VALUE_TOL: f64 = 1e-12;

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    expected: String,
    got: String,
    ok: bool,
}

#[derive(Default)]
struct Report {
    checks: Vec<Check>,
}

impl Report {
    fn eq<T: PartialEq + Debug>(&mut self, name: impl Into<String>, expected: T, got: T) {
        self.checks.push(Check {
            name: name.into(),
            ok: expected == got,
            expected: format!("{expected:?}"),
            got: format!("{got:?}"),
        });
    }

    fn close(&mut self, name: impl Into<String>, expected: &[f64], got: &[f64]) {
        let ok = expected.len() == got.len() && expected.iter().zip(got).all(|(a, b)| (a - b).abs() <= VALUE_TOL);
        self.checks.push(Check {
            name: name.into(),
            ok,
            expected: format!("{expected:?}"),
            got: format!("{got:?}"),
        });
    }
}

fn spec(text: &str) -> Result<SystemSpec> {
    SystemSpec::from_json_str(text).context("built-in input")
}

fn id(s: &str) -> PointId {
    PointId::Finite(s.into())
}

fn jrow(cert: &ExistenceCertificate, p: &PointId, ks: std::ops::RangeInclusive<u32>) -> Vec<usize> {
    let table = &cert.point(p).expect("point is listed").index.jk_table;
    ks.map(|k| table.get(&k).copied().unwrap_or(0)).collect()
}

fn witness(r: &mut Report, cert: &ExistenceCertificate, k: u32, lhs: i64, rhs: i64) {
    r.eq("verdict", Verdict::Proven, cert.verdict);
    r.eq("witness (k, I(inf)_k, sum I(p)_k)", (Some(k), Some(lhs), Some(rhs)), (cert.witness_k, cert.lhs, cert.rhs));
}

fn four_dim_resonant(r: &mut Report) -> Result<()> {
    let s = spec(FOUR_DIM_RESONANT)?;
    let c = 1.0 / (2.0 * SQRT_2);
    let h0 = eigen_sym(&s.critical_points[0].hessian)?;
    r.close("spectrum of V''(origin)", &[-1.0, 1.0 - c, 1.0, 4.5], &h0.raw_eigenvalues);
    let cert = analyze(&s, &AnalysisConfig::default())?;
    let ids: Vec<String> = cert.points.iter().map(|p| p.id.to_string()).collect();
    r.eq("stationary points", vec!["origin", "+e4", "-e4", "infinity"], ids.iter().map(String::as_str).collect());
    r.eq("resonant modes at origin", BTreeSet::from([1]), cert.point(&id("origin")).unwrap().index.resonant_modes.clone());
    for p in ["+e4", "-e4"] {
        r.eq(format!("resonant modes at {p}"), BTreeSet::new(), cert.point(&id(p)).unwrap().index.resonant_modes.clone());
    }
    r.eq("j_1..j_3 at origin", vec![1, 1, 0], jrow(&cert, &id("origin"), 1..=3));
    for p in [id("+e4"), id("-e4"), PointId::Infinity] {
        r.eq(format!("j_1..j_3 at {p}"), vec![1, 0, 0], jrow(&cert, &p, 1..=3));
    }
    let b: Vec<i64> = cert.points.iter().map(|p| p.brouwer).collect();
    r.eq("Brouwer indices (origin, +e4, -e4, infinity)", vec![-1, 1, 1, 1], b);
    r.eq("sum formula residual", 0, cert.sum_formula.residual);
    witness(r, &cert, 2, 0, -1);
    Ok(())
}

fn four_dim_singular(r: &mut Report) -> Result<()> {
    let s = spec(FOUR_DIM_SINGULAR)?;
    r.eq("V''(origin) singular", true, eigen_sym(&s.critical_points[0].hessian)?.is_singular());
    let cert = analyze(&s, &AnalysisConfig::default())?;
    let o = cert.point(&id("origin")).unwrap();
    r.eq("index at origin", -1, o.brouwer);
    r.eq("index source at origin", BrouwerSource::SumFormulaResidual, o.brouwer_source);
    r.eq("solved for", Some(id("origin")), cert.sum_formula.solved_for.clone());
    witness(r, &cert, 2, 0, -1);
    Ok(())
}

fn sitnikov(r: &mut Report) -> Result<()> {
    let s = spec(SITNIKOV)?;
    r.eq("zeros of V'", vec![vec![0.0]], s.critical_points.iter().map(|p| p.location.clone()).collect());
    r.close("V''(0)", &[8.0], &[s.critical_points[0].hessian.get(0, 0)]);
    let eight = SymMatrix::diag(&[8.0]);
    let js = (1..=3).map(|k| j_k(&eight, 2.0 * PI, k)).collect::<Result<Vec<_>, _>>()?;
    r.eq("j_1..j_3 of 8 at T = 2 pi", vec![1, 1, 0], js);
    let cfg = AnalysisConfig::default();
    let cert = analyze(&s, &cfg)?;
    let b: Vec<i64> = cert.points.iter().map(|p| p.brouwer).collect();
    r.eq("index at 0 and at infinity", vec![-1, -1], b);
    witness(r, &cert, 1, 0, -1);
    for (t, want) in [(1.0, Verdict::NotDecided), (2.3, Verdict::Proven)] {
        r.eq(format!("verdict at T = {t}"), want, analyze(&s.with_period(t)?, &cfg)?.verdict);
    }
    Ok(())
}

fn continuation_four_dim(r: &mut Report) -> Result<()> {
    let cfg = AnalysisConfig::default();
    for (name, text) in [("resonant", FOUR_DIM_RESONANT), ("singular", FOUR_DIM_SINGULAR)] {
        let c = continuation_certificate(&spec(text)?, &cfg)?;
        r.eq(format!("{name} base: witness"), 2, c.witness_k);
        // the origin resonates at mode 1, so the accumulation alternative stays open
        r.eq(format!("{name} base: branches unconditional"), false, c.branches_guaranteed);
        r.eq(format!("{name} base: symmetry breaking possible"), true, c.symmetry_breaking_possible);
    }
    Ok(())
}

fn continuation_sitnikov(r: &mut Report) -> Result<()> {
    let cfg = AnalysisConfig::default();
    let s = spec(SITNIKOV)?;
    for t in [2.3, 2.0 * PI, 10.0] {
        let c = continuation_certificate(&s.with_period(t)?, &cfg)?;
        r.eq(format!("T = {t:.4}: branches C- and C+ exist"), true, c.branches_guaranteed);
    }
    let below = continuation_certificate(&s.with_period(2.0)?, &cfg);
    r.eq(
        "T = 2 (below pi/sqrt 2): no statement",
        true,
        matches!(below, Err(CertifyError::BaseNotProven(Verdict::NotDecided))),
    );
    Ok(())
}

pub fn run(example: &str, json: bool) -> Result<u8> {
    let mut r = Report::default();
    match example {
        "6.5" => four_dim_resonant(&mut r)?,
        "6.6" => four_dim_singular(&mut r)?,
        "6.7" => sitnikov(&mut r)?,
        "6.8" => continuation_four_dim(&mut r)?,
        "6.9" => continuation_sitnikov(&mut r)?,
        other => anyhow::bail!("unknown example {other}"),
    }
    let all = r.checks.iter().all(|c| c.ok);
    if json {
        let v = serde_json::json!({ "example": example, "checks": r.checks, "all_match": all });
        println!("{}", serde_json::to_string_pretty(&v)?);
    } else {
        for c in &r.checks {
            if c.ok {
                println!("ok       {}: {}", c.name, c.got);
            } else {
                println!("MISMATCH {}: expected {}, got {}", c.name, c.expected, c.got);
            }
        }
        println!("{}", if all { "all values match" } else { "mismatches found" });
    }
    Ok(if all { 0 } else { 1 })
}
