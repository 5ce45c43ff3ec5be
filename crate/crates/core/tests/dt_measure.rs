use std::collections::HashSet;
use std::sync::Arc;

use orbitcount_core::dehn_thurston::{coordinates_of, dt_to_system, enumerate_multicurves, evaluate_functional, DTCoordinates};
use orbitcount_core::holonomy::{build_holonomy, FenchelNielsen, Holonomy, PantsDecomposition};
use orbitcount_core::intersection::{pairing, pairing_integral, self_intersection};
use orbitcount_core::mapping_class::twist_generators;
use orbitcount_core::measure::{estimate_m, HomogeneousFunctional};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_coords(rng: &mut ChaCha8Rng, bound: i64) -> DTCoordinates {
    loop {
        let m = rng.gen_range(0..=bound);
        let t = rng.gen_range(-bound..=bound);
        if let Ok(c) = DTCoordinates::torus(m, t) {
            return c;
        }
    }
}

#[test]
fn round_trip_and_simplicity() {
    let x = Holonomy::modular_torus();
    let p = x.presentation();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let c = random_coords(&mut rng, 25);
        let s = dt_to_system(p, &c).unwrap();
        for (w, _) in s.components() {
            assert_eq!(self_intersection(&x, w).unwrap(), 0);
        }
        assert_eq!(pairing_integral(&x, &s, &s).unwrap(), 0);
        assert_eq!(coordinates_of(&x, &s).unwrap(), c, "{}", p.format_system(&s));
    }
}

#[test]
fn pairing_matches_the_lattice_formula() {
    let x = Holonomy::modular_torus();
    let p = x.presentation();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let a = random_coords(&mut rng, 12);
        let b = random_coords(&mut rng, 12);
        let (m1, t1) = a.pairs()[0];
        let (m2, t2) = b.pairs()[0];
        let sa = dt_to_system(p, &a).unwrap();
        let sb = dt_to_system(p, &b).unwrap();
        assert_eq!(pairing_integral(&x, &sa, &sb).unwrap() as i64, (m1 * t2 - m2 * t1).abs());
    }
}

#[test]
fn enumeration_counts_scale_with_dimension() {
    for (pants, d) in [(PantsDecomposition::punctured_torus(), 2.0), (PantsDecomposition::genus_two(), 6.0)] {
        let (n1, n2) = if d == 2.0 { (40, 80) } else { (7, 14) };
        let c1 = enumerate_multicurves(&pants, n1).count() as f64;
        let c2 = enumerate_multicurves(&pants, n2).count() as f64;
        let slope = (c2 / c1).ln() / 2f64.ln();
        assert!((slope - d).abs() <= 0.1 * d, "slope {slope} for dimension {d}");
        let unique: HashSet<DTCoordinates> = enumerate_multicurves(&pants, n1.min(5)).collect();
        assert_eq!(unique.len(), enumerate_multicurves(&pants, n1.min(5)).count());
    }
}

fn torus() -> Arc<Holonomy> {
    Arc::new(Holonomy::modular_torus())
}

#[test]
fn functional_examples_and_homogeneity() {
    let x = torus();
    let p = x.presentation();
    let alpha = p.parse_system("1:b1").unwrap();
    // i(b, ·) needs no filling check when evaluated directly
    let b = DTCoordinates::torus(0, 1).unwrap();
    let sb = dt_to_system(p, &b).unwrap();
    assert_eq!(pairing(&x, &alpha, &sb).unwrap(), 1.0);

    let len = HomogeneousFunctional::length(x.clone());
    let la = x.geodesic_length(&p.parse_curve("a1").unwrap()).unwrap();
    for k in 1..5 {
        let v = evaluate_functional(&len, &DTCoordinates::torus(0, k).unwrap()).unwrap();
        assert!((v - k as f64 * la).abs() < 1e-9 * v);
    }
    let pair = HomogeneousFunctional::intersect(x.clone(), p.parse_system("1:a1; 1:b1").unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..30 {
        let c = random_coords(&mut rng, 10);
        let c2 = c.scaled(2).unwrap();
        let (l1, l2) = (evaluate_functional(&len, &c).unwrap(), evaluate_functional(&len, &c2).unwrap());
        assert!((l2 - 2.0 * l1).abs() <= 1e-9 * l2);
        let (i1, i2) = (evaluate_functional(&pair, &c).unwrap(), evaluate_functional(&pair, &c2).unwrap());
        assert_eq!(i2, 2.0 * i1);
        // the lattice shortcut agrees with the word computation
        let s = dt_to_system(p, &c).unwrap();
        assert_eq!(pair.evaluate(&s).unwrap(), i1);
    }
}

#[test]
fn pairing_is_symmetric_and_bihomogeneous() {
    let x = Holonomy::modular_torus();
    let p = x.presentation();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let s = dt_to_system(p, &random_coords(&mut rng, 8)).unwrap();
        let t = dt_to_system(p, &random_coords(&mut rng, 8)).unwrap();
        let st = pairing(&x, &s, &t).unwrap();
        assert_eq!(st, pairing(&x, &t, &s).unwrap());
        assert_eq!(pairing(&x, &s.scaled(2.0), &t.scaled(3.0)).unwrap(), 6.0 * st);
    }
}

#[test]
fn lattice_count_for_the_standard_pair_is_exact() {
    let x = torus();
    let f = HomogeneousFunctional::intersect(x.clone(), x.presentation().parse_system("1:a1; 1:b1").unwrap()).unwrap();
    let pants = PantsDecomposition::punctured_torus();
    for l in [10u64, 25, 60] {
        let est = estimate_m(&f, l as f64, &pants).unwrap();
        // #{m + |t| ≤ L} = L² + L
        assert_eq!(est.count, l * l + l);
        assert!((est.value - (1.0 + 1.0 / l as f64)).abs() < 1e-12);
    }
    let est = estimate_m(&f, 100.0, &pants).unwrap();
    let masses: Vec<f64> = [0.1, 0.05, 0.01].iter().map(|&e| est.boundary_mass(e)).collect();
    assert!(masses[0] > masses[1] && masses[1] > masses[2], "{masses:?}");
    assert!(masses.iter().all(|&m| (0.0..=1.0).contains(&m)));
    assert_eq!(est.boundary_mass(1.0), 1.0);
}

#[test]
fn measure_is_mapping_class_invariant() {
    let x = torus();
    let p = x.presentation();
    let g = twist_generators(x.signature()).unwrap();
    let alpha = p.parse_system("1:a1; 2:b1").unwrap();
    let phi = g.from_factorization(&[(0, 1), (1, -1), (0, 1)]);
    let moved = g.apply_system(&phi, &alpha);
    let pants = PantsDecomposition::punctured_torus();
    let f1 = HomogeneousFunctional::intersect(x.clone(), alpha).unwrap();
    let f2 = HomogeneousFunctional::intersect(x.clone(), moved).unwrap();
    let m1 = estimate_m(&f1, 150.0, &pants).unwrap();
    let m2 = estimate_m(&f2, 150.0, &pants).unwrap();
    assert!((m1.value / m2.value - 1.0).abs() < 0.05, "{} vs {}", m1.value, m2.value);
}

#[test]
fn filling_systems_are_comparable() {
    let x = torus();
    let p = x.presentation();
    let f1 = HomogeneousFunctional::intersect(x.clone(), p.parse_system("1:a1; 1:b1").unwrap()).unwrap();
    let f2 = HomogeneousFunctional::intersect(x.clone(), p.parse_system("1:a1 b1; 1:a1 B1").unwrap()).unwrap();
    let pants = PantsDecomposition::punctured_torus();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for c in enumerate_multicurves(&pants, 16).take(500) {
        let r = evaluate_functional(&f1, &c).unwrap() / evaluate_functional(&f2, &c).unwrap();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    assert!(lo > 0.0 && hi.is_finite(), "ratio range [{lo}, {hi}]");
}

#[test]
fn non_filling_alpha_is_rejected() {
    let x = torus();
    let alpha = x.presentation().parse_system("1:a1").unwrap();
    assert!(HomogeneousFunctional::intersect(x.clone(), alpha).is_err());
}

#[test]
fn scaling_law_for_lengths() {
    let x = Arc::new(build_holonomy(&FenchelNielsen::punctured_torus(1.3, 0.4).unwrap()).unwrap());
    let f = HomogeneousFunctional::length(x);
    let pants = PantsDecomposition::punctured_torus();
    let a = estimate_m(&f, 60.0, &pants).unwrap();
    let b = estimate_m(&f, 120.0, &pants).unwrap();
    assert!(a.count > 1000);
    assert!((b.value / a.value - 1.0).abs() < 0.1, "{} vs {}", a.value, b.value);
}

#[test]
fn length_counts_match_word_level_lengths() {
    let pants = PantsDecomposition::punctured_torus();
    for x in [
        Arc::new(Holonomy::modular_torus()),
        Arc::new(build_holonomy(&FenchelNielsen::punctured_torus(1.0, 0.3).unwrap()).unwrap()),
        Arc::new(build_holonomy(&FenchelNielsen::punctured_torus(2.5, -0.7).unwrap()).unwrap()),
    ] {
        let l = 24.0;
        let bound = 40;
        let mut oracle = Vec::new();
        for c in enumerate_multicurves(&pants, bound) {
            let v = x.liouville_intersection(&dt_to_system(x.presentation(), &c).unwrap()).unwrap();
            if v <= l {
                assert!(c.norm() < bound, "oracle box too small");
                oracle.push(v);
            }
        }
        oracle.sort_by(f64::total_cmp);
        let est = estimate_m(&HomogeneousFunctional::length(x), l, &pants).unwrap();
        assert_eq!(est.count as usize, oracle.len());
        for (lk, c, _) in &est.convergence_series {
            assert_eq!(*c as usize, oracle.partition_point(|v| v <= lk));
        }
    }
}
