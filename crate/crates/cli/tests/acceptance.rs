//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so every line is printed; exits non-zero if any check fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use orbitcount_core::holonomy::PantsDecomposition;
use orbitcount_core::words::Letter;
use orbitcount_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Cutting sequence of the straight line of slope `q/p` on the square
/// torus: `p` horizontal and `q` vertical crossings, evenly interleaved.
fn slope_word(x: &Holonomy, p: i64, q: i64) -> CyclicWord {
    let (pa, qa) = (p.abs(), q.abs());
    let n = pa + qa;
    let mut text = Vec::new();
    for k in 0..n {
        let vertical = ((k + 1) * qa) / n > (k * qa) / n;
        text.push(match (vertical, p < 0, q < 0) {
            (false, false, _) => "a1",
            (false, true, _) => "A1",
            (true, _, false) => "b1",
            (true, _, true) => "B1",
        });
    }
    x.presentation().parse_curve(&text.join(" ")).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> std::result::Result<(), String> {
    ensure(start.elapsed() <= limit, || format!("took {:.1?}, limit {limit:?}", start.elapsed()))
}

fn fn_torus(l: f64, t: f64) -> Arc<Holonomy> {
    Arc::new(build_holonomy(&FenchelNielsen::punctured_torus(l, t).unwrap()).unwrap())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let x = Holonomy::modular_torus();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 100 {
        let mut slope = || loop {
            let (p, q) = (rng.gen_range(-50..=50i64), rng.gen_range(-50..=50i64));
            if gcd(p, q) == 1 {
                return (p, q);
            }
        };
        let (p, q) = slope();
        let (r, s) = slope();
        let got = geometric_intersection(&x, &slope_word(&x, p, q), &slope_word(&x, r, s)).map_err(|e| e.to_string())?;
        let want = (p * s - q * r).unsigned_abs();
        ensure(got == want, || format!("slopes {p}/{q}, {r}/{s}: got {got}, expected {want}"))?;
        checked += 1;
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!("100 slope pairs with |p|,|q|,|r|,|s| ≤ 50 exact in {:.1?}", start.elapsed()))
}

fn random_curve(rng: &mut ChaCha8Rng, p: &GroupPresentation, max_len: usize) -> CyclicWord {
    let rank = p.rank();
    loop {
        let len = rng.gen_range(1..=max_len);
        let letters: Vec<Letter> = (0..len).map(|_| Letter::new(rng.gen_range(0..rank), rng.gen_bool(0.5))).collect();
        if let Ok(c) = p.cyclic_canonical(&letters, true) {
            if !c.is_empty() && !p.is_peripheral(&c) {
                return c;
            }
        }
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let x = fn_torus(1.3, 0.4);
    let p = x.presentation().clone();
    let g = twist_generators(x.signature()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let err = |e: Error| e.to_string();
    for _ in 0..50 {
        let s = p.system(vec![(random_curve(&mut rng, &p, 6), 1.0)]).unwrap();
        let t = p.system(vec![(random_curve(&mut rng, &p, 6), 1.0)]).unwrap();
        let st = pairing(&x, &s, &t).map_err(err)?;
        ensure(st == pairing(&x, &t, &s).map_err(err)?, || "pairing is not symmetric".into())?;
        let (a, b) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let scaled = pairing(&x, &s.scaled(a as f64), &t.scaled(b as f64)).map_err(err)?;
        ensure(scaled == (a * b) as f64 * st, || format!("bihomogeneity fails: {scaled} vs {a}·{b}·{st}"))?;
        // additivity over a disjoint union of components
        let u = random_curve(&mut rng, &p, 5);
        if !s.components().iter().any(|(c, _)| *c == u) {
            let mut parts = s.components().to_vec();
            parts.push((u.clone(), 1.0));
            let union = p.system(parts).unwrap();
            let single = p.system(vec![(u, 1.0)]).unwrap();
            let sum = st + pairing(&x, &single, &t).map_err(err)?;
            ensure(pairing(&x, &union, &t).map_err(err)? == sum, || "pairing is not additive".into())?;
        }
        let factors: Vec<(usize, i32)> = (0..rng.gen_range(1..=4))
            .map(|_| (rng.gen_range(0..2), if rng.gen_bool(0.5) { 1 } else { -1 }))
            .collect();
        let phi = g.from_factorization(&factors);
        let moved = pairing(&x, &g.apply_system(&phi, &s), &g.apply_system(&phi, &t)).map_err(err)?;
        ensure(moved == st, || format!("mapping class {factors:?} changes pairing {st} to {moved}"))?;
        // lengths of conjugates, computed from the raw words
        let w = random_curve(&mut rng, &p, 8);
        let h: Vec<Letter> = (0..rng.gen_range(1..=4)).map(|_| Letter::new(rng.gen_range(0..2), rng.gen_bool(0.5))).collect();
        let conj: Vec<Letter> =
            h.iter().copied().chain(w.letters().iter().copied()).chain(h.iter().rev().map(|l| l.inverse())).collect();
        let (l1, l2) = (x.geodesic_length(&w).map_err(err)?, x.word_length(&conj).map_err(err)?);
        ensure((l1 - l2).abs() <= 1e-10 * l1.max(1.0), || format!("conjugate length {l2} vs {l1}"))?;
    }
    let mut worst_rel = 0.0f64;
    for (l, t) in [(0.7, 0.1), (1.9, -0.4), (2.2, 0.9)] {
        let y = build_holonomy(&FenchelNielsen::genus_two([l, l + 0.3, 1.1], [t, 0.2, -t]).unwrap()).map_err(err)?;
        worst_rel = worst_rel.max(y.relator_residual());
    }
    ensure(worst_rel <= 1e-9, || format!("relator residual {worst_rel:e}"))?;
    let mut worst_per = 0.0f64;
    for (l, t) in [(0.5, 0.0), (1.3, 0.4), (3.0, -1.2)] {
        let y = fn_torus(l, t);
        let tr = y.trace(y.presentation().peripheral_words()[0].as_slice()).abs();
        worst_per = worst_per.max((tr - 2.0).abs());
    }
    let m = Holonomy::modular_torus();
    worst_per = worst_per.max((m.trace(m.presentation().peripheral_words()[0].as_slice()).abs() - 2.0).abs());
    ensure(worst_per <= 1e-9, || format!("peripheral trace residual {worst_per:e}"))?;
    within(Duration::from_secs(60), start)?;
    Ok(format!(
        "50 triples exact; relator residual {worst_rel:.1e}, peripheral residual {worst_per:.1e}, {:.1?}",
        start.elapsed()
    ))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let x = Arc::new(Holonomy::modular_torus());
    let alpha = x.presentation().parse_system("1:a1; 1:b1").unwrap();
    ensure(is_filling(&x, &alpha, 6).map_err(|e| e.to_string())?.is_filling(), || "pair not certified".into())?;
    let c = OrbitCounter::new(alpha, HomogeneousFunctional::length(x.clone())).map_err(|e| e.to_string())?;
    let grid: Vec<f64> = (0..10).map(|k| 20.0 * 2f64.powf(k as f64 / 2.5)).collect();
    let stab = c.stabilizer_order(4).map_err(|e| e.to_string())?;
    let recs = c.count_grid(&grid, 1.25, stab, &SearchOptions::default(), None).map_err(|e| e.to_string())?;
    let used: Vec<&CountRecord> = recs.iter().filter(|r| r.saturated && r.count_orbit >= 100).collect();
    let (lo, hi) = (used.first().unwrap().count_orbit, used.last().unwrap().count_orbit);
    ensure(hi >= 100 * lo, || format!("counts span {lo}..{hi}, less than two decades"))?;
    let fit = fit_exponent(&recs).map_err(|e| e.to_string())?;
    ensure((1.8..=2.2).contains(&fit.slope), || format!("slope {:.4}", fit.slope))?;
    within(Duration::from_secs(1800), start)?;
    Ok(format!(
        "slope {:.4} ± {:.4} over N = {lo}..{hi} ({} saturated records), {:.1?}",
        fit.slope,
        fit.stderr,
        used.len(),
        start.elapsed()
    ))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let x = Arc::new(Holonomy::modular_torus());
    let p = x.presentation();
    let a1 = p.parse_system("1:a1; 1:b1").unwrap();
    let a2 = p.parse_system("1:a1; 1:b1; 1:a1 b1").unwrap();
    let pants = PantsDecomposition::punctured_torus();
    // independent target: areas of {m + |t| ≤ 1} and {m + |t| + |t - m| ≤ 1} in the half plane m ≥ 0
    let analytic = 1.0 / (3.0 / 8.0);
    let m = |a: &WeightedCurveSystem| -> std::result::Result<f64, String> {
        let f = HomogeneousFunctional::intersect(x.clone(), a.clone()).map_err(|e| e.to_string())?;
        Ok(estimate_m(&f, 400.0, &pants).map_err(|e| e.to_string())?.value)
    };
    let lattice = m(&a1)? / m(&a2)?;
    ensure((lattice / analytic - 1.0).abs() < 0.01, || format!("lattice ratio {lattice} vs area ratio {analytic}"))?;
    let f = HomogeneousFunctional::length(x.clone());
    let c1 = OrbitCounter::new(a1, f.clone()).map_err(|e| e.to_string())?;
    let c2 = OrbitCounter::new(a2, f).map_err(|e| e.to_string())?;
    let e = ratio_experiment(&c1, &c2, &[40.0, 80.0, 120.0], 1.25, 5, 400.0, &SearchOptions::default())
        .map_err(|e| e.to_string())?;
    let last = e.rows.last().unwrap();
    ensure(last.first.saturated && last.second.saturated, || "terminal counts unsaturated".into())?;
    let err = (last.ratio / lattice - 1.0).abs();
    ensure(err <= 0.15, || format!("terminal ratio {:.4} vs {lattice:.4}", last.ratio))?;
    within(Duration::from_secs(3600), start)?;
    Ok(format!(
        "N₁/N₂ = {}/{} = {:.4} at L = {}, lattice target {lattice:.4} (area {analytic:.4}), error {:.1}%, {:.1?}",
        last.first.count_group.unwrap(),
        last.second.count_group.unwrap(),
        last.ratio,
        last.l,
        100.0 * err,
        start.elapsed()
    ))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let x = fn_torus(0.6, 0.2);
    let y = fn_torus(6.0, 0.0);
    let pants = PantsDecomposition::punctured_torus();
    let fx = HomogeneousFunctional::length(x.clone());
    let fy = HomogeneousFunctional::length(y.clone());
    let mx = estimate_m(&fx, 300.0, &pants).map_err(|e| e.to_string())?.value;
    let my = estimate_m(&fy, 300.0, &pants).map_err(|e| e.to_string())?.value;
    let target = mx / my;
    let alpha = x.presentation().parse_system("1:a1; 1:b1").unwrap();
    let cx = OrbitCounter::new(alpha.clone(), fx).map_err(|e| e.to_string())?;
    let cy = OrbitCounter::new(alpha, fy).map_err(|e| e.to_string())?;
    let grid = [60.0, 120.0];
    let rx = cx.count_grid(&grid, 1.25, (1, true), &SearchOptions::default(), None).map_err(|e| e.to_string())?;
    let ry = cy.count_grid(&grid, 1.25, (1, true), &SearchOptions::default(), None).map_err(|e| e.to_string())?;
    let (a, b) = (rx.last().unwrap(), ry.last().unwrap());
    ensure(a.saturated && b.saturated, || "terminal counts unsaturated".into())?;
    let ratio = a.count_orbit as f64 / b.count_orbit as f64;
    let err = (ratio / target - 1.0).abs();
    ensure(err <= 0.15, || format!("N_X/N_Y = {ratio:.4} vs m(X)/m(Y) = {target:.4}"))?;
    Ok(format!(
        "N_X/N_Y = {}/{} = {ratio:.4} at L = {}, m(X)/m(Y) = {target:.4}, error {:.1}%, {:.1?}",
        a.count_orbit,
        b.count_orbit,
        a.l,
        100.0 * err,
        start.elapsed()
    ))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let x = Arc::new(Holonomy::modular_torus());
    let f = HomogeneousFunctional::length(x);
    let pants = PantsDecomposition::punctured_torus();
    let a = estimate_m(&f, 200.0, &pants).map_err(|e| e.to_string())?;
    let b = estimate_m(&f, 400.0, &pants).map_err(|e| e.to_string())?;
    ensure(a.count > 10_000, || format!("count {} at L = 200", a.count))?;
    let rel = (b.value / a.value - 1.0).abs();
    ensure(rel <= 0.10, || format!("m(L) = {}, m(2L) = {}", a.value, b.value))?;
    let masses: Vec<f64> = [0.1, 0.05, 0.01].iter().map(|&e| b.boundary_mass(e)).collect();
    ensure(masses[0] > masses[1] && masses[1] > masses[2], || format!("boundary masses {masses:?}"))?;
    Ok(format!(
        "m = {:.5} (N = {}) vs {:.5} (N = {}), {:.2}% apart; boundary mass {:.4} > {:.4} > {:.4}, {:.1?}",
        a.value,
        a.count,
        b.value,
        b.count,
        100.0 * rel,
        masses[0],
        masses[1],
        masses[2],
        start.elapsed()
    ))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    // the documented pair: (ℓ, τ) = (1.0, 0.3) and (2.5, 0.0)
    let x = fn_torus(1.0, 0.3);
    let y = fn_torus(2.5, 0.0);
    let bounds = [1, 2, 4, 8, 16, 32];
    let err = |e: Error| e.to_string();
    let (mut prev_xy, mut prev_yx) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &b in &bounds {
        for z in [&x, &y] {
            let d = thurston_distance(z, z, b).map_err(err)?.value;
            ensure(d.abs() <= 1e-9, || format!("d(X, X) = {d} at B = {b}"))?;
        }
        let xy = thurston_distance(&x, &y, b).map_err(err)?.value;
        let yx = thurston_distance(&y, &x, b).map_err(err)?.value;
        ensure(xy >= prev_xy && yx >= prev_yx, || format!("not monotone at B = {b}"))?;
        prev_xy = xy;
        prev_yx = yx;
    }
    ensure((prev_xy - prev_yx).abs() > 1e-3, || format!("d(X,Y) = {prev_xy}, d(Y,X) = {prev_yx}"))?;
    Ok(format!(
        "d(X,X) = 0; d(X,Y) = {prev_xy:.6}, d(Y,X) = {prev_yx:.6} at B = 32; monotone over {bounds:?}, {:.1?}",
        start.elapsed()
    ))
}

fn orbitcount(args: &[&str]) -> std::result::Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_orbitcount"))
        .args(args)
        .env_remove("ORBITCOUNT_THREADS")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("orbitcount {args:?} exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr))
    })
}

fn write_config(dir: &Path, name: &str, out: &str, budget: Option<usize>) -> PathBuf {
    let mut cfg = serde_json::json!({
        "surface": { "preset": "modular_torus" },
        "alpha": "1:a1; 2:b1",
        "functional": { "kind": "length" },
        "l_grid": [20, 40, 60],
        "margin": 1.25,
        "checkpoint_every": 2000,
        "output_dir": out,
    });
    if let Some(b) = budget {
        cfg["node_budget"] = b.into();
    }
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let one = write_config(d, "one.json", "one", None);
    let eight = write_config(d, "eight.json", "eight", None);
    orbitcount(&["orbit-count", "--config", one.to_str().unwrap(), "--threads", "1"])?;
    orbitcount(&["orbit-count", "--config", eight.to_str().unwrap(), "--threads", "8"])?;
    let read = |p: PathBuf| std::fs::read(&p).map_err(|e| format!("{}: {e}", p.display()));
    let csv1 = read(d.join("one/counts.csv"))?;
    ensure(csv1 == read(d.join("eight/counts.csv"))?, || "1 and 8 workers differ".into())?;
    ensure(read(d.join("one/orbit.ckpt"))? == read(d.join("eight/orbit.ckpt"))?, || "checkpoints differ".into())?;
    // halt on a node budget, then resume from the checkpoint without one
    let halted = write_config(d, "halted.json", "resumed", Some(3000));
    orbitcount(&["orbit-count", "--config", halted.to_str().unwrap(), "--threads", "4"])?;
    let partial = read(d.join("resumed/counts.csv"))?;
    ensure(partial != csv1, || "budgeted run was not interrupted".into())?;
    let resumed = write_config(d, "resumed.json", "resumed", None);
    let ckpt = d.join("resumed/orbit.ckpt");
    orbitcount(&["orbit-count", "--config", resumed.to_str().unwrap(), "--resume", ckpt.to_str().unwrap()])?;
    ensure(read(d.join("resumed/counts.csv"))? == csv1, || "resumed CSV differs".into())?;
    Ok(format!(
        "1 vs 8 workers byte-identical ({} bytes); resume after node budget identical, {:.1?}",
        csv1.len(),
        start.elapsed()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("punctured-torus intersection oracle", criterion_1),
        ("invariance and homogeneity suite", criterion_2),
        ("growth exponent on the modular torus", criterion_3),
        ("ratio law for two filling systems", criterion_4),
        ("functional ratio law", criterion_5),
        ("Thurston measure scaling", criterion_6),
        ("Thurston asymmetric distance", criterion_7),
        ("determinism and checkpoint resume", criterion_8),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let id = (k + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|f| *f == id || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("criterion {id} PASS  {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("criterion {id} FAIL  {name}: {why} (after {:.1?})", start.elapsed());
            }
            Err(_) => {
                failed += 1;
                println!("criterion {id} FAIL  {name}: panicked");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
