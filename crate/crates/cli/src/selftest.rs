use std::f64::consts::PI;

use anyhow::Result;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use so2deg::eqdeg::{brouwer_index_degenerate, brouwer_index_nondegenerate, linear_degree_via_product};
use so2deg::{analyze, build_system, eigen_sym, linear_degree, search_orbit, AnalysisConfig, GalerkinConfig};
use so2deg::{ModelPotential, RingElement, SymMatrix};

#[allow(clippy::needless_range_loop)]
fn random_sym(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> SymMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(lo..hi);
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    SymMatrix::from_rows(&rows).expect("square rows")
}

fn element(rng: &mut ChaCha8Rng) -> RingElement {
    let zk: Vec<(u32, i64)> = (1..=5).map(|k| (k, rng.random_range(-30..=30))).collect();
    RingElement::new(rng.random_range(-30..=30), zk, [], 5).expect("positive truncation")
}

fn ring_laws(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let one = RingElement::unit(5);
    for i in 0..2000 {
        let (a, b, c) = (element(rng), element(rng), element(rng));
        let ok = &a * &b == &b * &a
            && &(&a * &b) * &c == &a * &(&b * &c)
            && &a * &(&b + &c) == &(&a * &b) + &(&a * &c)
            && &a * &one == a;
        if !ok {
            return Err(format!("triple {i}: {a}, {b}, {c}"));
        }
    }
    Ok("2000 triples".into())
}

fn degree_paths(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut done = 0;
    while done < 100 {
        let n = rng.random_range(1..=5);
        let a = random_sym(rng, n, -5.0, 20.0);
        let t = rng.random_range(0.5..8.0);
        let s = eigen_sym(&a).map_err(|e| e.to_string())?;
        let Ok(x) = linear_degree(&s, t) else { continue };
        let y = linear_degree_via_product(&s, t).map_err(|e| e.to_string())?;
        if x != y {
            return Err(format!("T = {t}: {x} vs {y}"));
        }
        done += 1;
    }
    Ok("100 matrices".into())
}

fn brouwer(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut done = 0;
    while done < 30 {
        let n = rng.random_range(1..=3);
        let h = random_sym(rng, n, -3.0, 3.0);
        let s = eigen_sym(&h).map_err(|e| e.to_string())?;
        if s.raw_eigenvalues.iter().any(|e| e.abs() < 0.1) {
            continue;
        }
        let want = brouwer_index_nondegenerate(&s).map_err(|e| e.to_string())?;
        let got = brouwer_index_degenerate(&|x: &[f64]| h.mul_vec(x), &vec![0.0; n], 1.0).map_err(|e| e.to_string())?;
        if got != want {
            return Err(format!("{h:?}: oracle {got}, sign det {want}"));
        }
        done += 1;
    }
    Ok("30 Hessians".into())
}

fn so2_nullity(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut done = 0;
    for _ in 0..500 {
        if done == 30 {
            break;
        }
        let n = rng.random_range(1..=3);
        let v = random_sym(rng, n, -2.0, 4.0);
        let Ok(m) = ModelPotential::new(v, rng.random_range(0.2..2.0)) else { continue };
        let Ok(spec) = build_system(&m, rng.random_range(1.0..8.0)) else { continue };
        let Ok(cert) = analyze(&spec, &AnalysisConfig::default()) else { continue };
        if cert.so2_difference != 0 {
            return Err(format!("SO(2) difference {}", cert.so2_difference));
        }
        done += 1;
    }
    Ok(format!("{done} model systems"))
}

fn orbit(_: &mut ChaCha8Rng) -> Result<String, String> {
    let m = ModelPotential::new(SymMatrix::zeros(1), 0.25).map_err(|e| e.to_string())?;
    let spec = build_system(&m, 2.0 * PI).map_err(|e| e.to_string())?;
    let search = search_orbit(&spec, 1, &GalerkinConfig::default()).map_err(|e| e.to_string())?;
    let o = search.orbit.ok_or("no orbit accepted")?;
    Ok(format!("Sitnikov T = 2 pi: residual {:.1e}, period {:.6}", o.ode_residual, o.minimal_period))
}

pub fn run(seed: u64, json: bool) -> Result<u8> {
    type Case = fn(&mut ChaCha8Rng) -> Result<String, String>;
    let cases: [(&str, Case); 5] = [
        ("ring laws", ring_laws),
        ("two-path degree", degree_paths),
        ("Brouwer oracle", brouwer),
        ("SO(2) nullity", so2_nullity),
        ("orbit", orbit),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = Vec::new();
    for (name, f) in cases {
        results.push((name, f(&mut rng)));
    }
    let ok = results.iter().all(|(_, r)| r.is_ok());
    if json {
        let items: Vec<_> = results
            .iter()
            .map(|(name, r)| match r {
                Ok(m) => serde_json::json!({ "check": name, "pass": true, "detail": m }),
                Err(m) => serde_json::json!({ "check": name, "pass": false, "detail": m }),
            })
            .collect();
        let v = serde_json::json!({ "seed": seed, "checks": items, "pass": ok });
        println!("{}", serde_json::to_string_pretty(&v)?);
    } else {
        for (name, r) in &results {
            match r {
                Ok(m) => println!("PASS {name}: {m}"),
                Err(m) => println!("FAIL {name}: {m}"),
            }
        }
    }
    Ok(if ok { 0 } else { 1 })
}
