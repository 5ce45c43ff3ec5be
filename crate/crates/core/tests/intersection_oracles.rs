use orbitcount_core::holonomy::{build_holonomy, FenchelNielsen, Holonomy, Mat2};
use orbitcount_core::intersection::{geometric_intersection, self_intersection};
use orbitcount_core::mapping_class::twist_generators;
use orbitcount_core::words::{inverse_word, CyclicWord, Letter, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Cutting sequence of the straight line of slope (p, q) on the torus,
/// written with `a` for horizontal and `b` for vertical steps.
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

#[test]
fn simple_closed_curves_follow_the_determinant() {
    let x = Holonomy::modular_torus();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 100 {
        let (p1, q1) = (rng.gen_range(-7..=7i64), rng.gen_range(-7..=7i64));
        let (p2, q2) = (rng.gen_range(-7..=7i64), rng.gen_range(-7..=7i64));
        if gcd(p1, q1) != 1 || gcd(p2, q2) != 1 {
            continue;
        }
        let u = slope_word(&x, p1, q1);
        let v = slope_word(&x, p2, q2);
        assert_eq!(self_intersection(&x, &u).unwrap(), 0);
        let expected = (p1 * q2 - p2 * q1).unsigned_abs();
        assert_eq!(
            geometric_intersection(&x, &u, &v).unwrap(),
            expected,
            "({p1},{q1}) vs ({p2},{q2})"
        );
        checked += 1;
    }
}

fn random_curve(x: &Holonomy, rng: &mut ChaCha8Rng, max_len: usize) -> CyclicWord {
    let rank = x.presentation().rank();
    loop {
        let len = rng.gen_range(1..=max_len);
        let w: Word = (0..len)
            .map(|_| Letter::new(rng.gen_range(0..rank), rng.gen_bool(0.5)))
            .collect();
        if let Ok(c) = x.presentation().cyclic_canonical(&w, true) {
            if !x.presentation().is_peripheral(&c) {
                return c;
            }
        }
    }
}

/// Independent count: every crossing lift shares a vertex with the axis
/// in the Cayley tree, so trying all rotation pairs and deduplicating by
/// the crossing positions finds every double coset.
fn brute_force(x: &Holonomy, u: &CyclicWord, v: &CyclicWord) -> usize {
    let (u, _) = u.primitive_root();
    let (v, _) = v.primitive_root();
    let same = u == v || u == v.inverse();
    let mu = x.evaluate(u.letters());
    let lu = 2.0 * (mu.trace().abs() / 2.0).acosh();
    let frame = |m: &Mat2| {
        let (a, r) = m.fixed_points().unwrap();
        let mut basis = Mat2::new(a.x, r.x, a.y, r.y);
        if basis.det() < 0.0 {
            basis.b = -basis.b;
            basis.d = -basis.d;
        }
        basis.inv_general()
    };
    let fu = frame(&mu);
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    let forward: Word = v.letters().to_vec();
    let backward = inverse_word(&forward);
    for w in [&forward, &backward] {
        let mw = x.evaluate(w);
        let lw = 2.0 * (mw.trace().abs() / 2.0).acosh();
        let fw = frame(&mw);
        let (wa, wr) = mw.fixed_points().unwrap();
        let (ua, ur) = mu.fixed_points().unwrap();
        for i in 0..u.len() {
            for j in 0..w.len() {
                let g = x
                    .evaluate(&u.letters()[..i])
                    .mul(&x.evaluate(&w[..j]).inv_general());
                let e1 = fu.apply(g.apply(wr));
                let e2 = fu.apply(g.apply(wa));
                let (r1, r2) = (e1.x / e1.y, e2.x / e2.y);
                if !(r1 * r2 < 0.0) || !r1.is_finite() || !r2.is_finite() {
                    continue;
                }
                if same && r1.abs().min(1.0 / r1.abs()) < 1e-6 && r2.abs().min(1.0 / r2.abs()) < 1e-6 {
                    continue;
                }
                let s = (0.5 * (-r1 * r2).ln()).rem_euclid(lu);
                let gi = g.inv_general();
                let b1 = fw.apply(gi.apply(ur));
                let b2 = fw.apply(gi.apply(ua));
                let t = (0.5 * (-(b1.x / b1.y) * (b2.x / b2.y)).ln()).rem_euclid(lw);
                let t = if std::ptr::eq(w, &backward) { (lw - t).rem_euclid(lw) } else { t };
                let close = |a: f64, b: f64, p: f64| {
                    let d = (a - b).abs();
                    d < 1e-6 || p - d < 1e-6
                };
                if !pairs.iter().any(|&(a, b)| close(a, s, lu) && close(b, t, lw)) {
                    pairs.push((s, t));
                }
            }
        }
    }
    pairs.len()
}

#[test]
fn tree_candidates_match_brute_force() {
    let modular = Holonomy::modular_torus();
    let twisted = build_holonomy(&FenchelNielsen::punctured_torus(1.4, 0.37).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..150 {
        let u = random_curve(&modular, &mut rng, 8);
        let v = random_curve(&modular, &mut rng, 8);
        for x in [&modular, &twisted] {
            let fast = geometric_intersection(x, &u, &v).unwrap();
            let (_, k) = u.primitive_root();
            let (_, m) = v.primitive_root();
            let slow = brute_force(x, &u, &v) as u64 * (k * m) as u64;
            assert_eq!(
                fast,
                slow,
                "{} / {}",
                x.presentation().format_cyclic(&u),
                x.presentation().format_cyclic(&v)
            );
        }
        // self-intersection: each double point is seen from both branches
        let (root, k) = u.primitive_root();
        let doubled = brute_force(&modular, &root, &root) as u64;
        let k = k as u64;
        assert_eq!(self_intersection(&modular, &u).unwrap(), k * k * doubled / 2 + k - 1);
    }
}

#[test]
fn counts_do_not_depend_on_the_hyperbolic_structure() {
    let modular = Holonomy::modular_torus();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let structures: Vec<Holonomy> = (0..4)
        .map(|_| {
            let l = rng.gen_range(0.6..3.0);
            let t = rng.gen_range(-2.0..2.0);
            build_holonomy(&FenchelNielsen::punctured_torus(l, t).unwrap()).unwrap()
        })
        .collect();
    for _ in 0..40 {
        let u = random_curve(&modular, &mut rng, 10);
        let v = random_curve(&modular, &mut rng, 10);
        let i0 = geometric_intersection(&modular, &u, &v).unwrap();
        let s0 = self_intersection(&modular, &u).unwrap();
        for x in &structures {
            assert_eq!(geometric_intersection(x, &u, &v).unwrap(), i0);
            assert_eq!(self_intersection(x, &u).unwrap(), s0);
        }
    }
}

#[test]
fn symmetric_and_invariant_under_mapping_classes_on_the_punctured_torus() {
    let x = Holonomy::modular_torus();
    let g = twist_generators(x.signature()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let gens = g.generators();
    for _ in 0..60 {
        let u = random_curve(&x, &mut rng, 7);
        let v = random_curve(&x, &mut rng, 7);
        let mut phi = g.identity();
        for _ in 0..rng.gen_range(1..=4) {
            phi = g.compose(&gens[rng.gen_range(0..gens.len())], &phi);
        }
        let i = geometric_intersection(&x, &u, &v).unwrap();
        assert_eq!(geometric_intersection(&x, &v, &u).unwrap(), i);
        let (pu, pv) = (g.apply_curve(&phi, &u), g.apply_curve(&phi, &v));
        assert_eq!(geometric_intersection(&x, &pu, &pv).unwrap(), i);
        assert_eq!(self_intersection(&x, &pu).unwrap(), self_intersection(&x, &u).unwrap());
        // powers scale bilinearly
        assert_eq!(geometric_intersection(&x, &u.power(2), &v.power(3)).unwrap(), 6 * i);
    }
}

fn genus_two() -> Holonomy {
    build_holonomy(&FenchelNielsen::genus_two([1.2, 1.5, 1.8], [0.3, -0.4, 0.5]).unwrap()).unwrap()
}

#[test]
fn genus_two_counts_are_mapping_class_invariant() {
    let x = genus_two();
    let other = build_holonomy(&FenchelNielsen::genus_two([2.1, 1.1, 1.4], [-0.6, 0.2, 0.9]).unwrap()).unwrap();
    let g = twist_generators(x.signature()).unwrap();
    let gens = g.generators();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..12 {
        let u = random_curve(&x, &mut rng, 4);
        let v = random_curve(&x, &mut rng, 4);
        let i = geometric_intersection(&x, &u, &v).unwrap();
        let si = self_intersection(&x, &u).unwrap();
        assert_eq!(geometric_intersection(&other, &u, &v).unwrap(), i);
        assert_eq!(self_intersection(&other, &u).unwrap(), si);
        let phi = &gens[rng.gen_range(0..gens.len())];
        let (pu, pv) = (g.apply_curve(phi, &u), g.apply_curve(phi, &v));
        assert_eq!(geometric_intersection(&x, &pu, &pv).unwrap(), i);
        assert_eq!(self_intersection(&x, &pu).unwrap(), si);
    }
}

#[test]
fn humphries_twists_satisfy_braid_and_commutation_relations() {
    let x = genus_two();
    let g = twist_generators(x.signature()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let probes: Vec<CyclicWord> = (0..12).map(|_| random_curve(&x, &mut rng, 6)).collect();
    let same_action = |f: &[(usize, i32)], h: &[(usize, i32)]| {
        let (f, h) = (g.from_factorization(f), g.from_factorization(h));
        probes.iter().all(|c| {
            let a = x.geodesic_length(&g.apply_curve(&f, c)).unwrap();
            let b = x.geodesic_length(&g.apply_curve(&h, c)).unwrap();
            (a - b).abs() < 1e-6 * a.max(1.0)
        })
    };
    for i in 0..5 {
        for j in i + 1..5 {
            if j == i + 1 {
                assert!(same_action(&[(i, 1), (j, 1), (i, 1)], &[(j, 1), (i, 1), (j, 1)]), "braid {i} {j}");
                assert!(!same_action(&[(i, 1), (j, 1)], &[(j, 1), (i, 1)]), "{i} {j} commute");
            } else {
                assert!(same_action(&[(i, 1), (j, 1)], &[(j, 1), (i, 1)]), "commute {i} {j}");
            }
        }
    }
}
