//! Thurston-measure volumes of unit sublevel sets by lattice counting.
//!
//! `m(F)` is estimated as `#{λ ∈ ML_Z : F(λ) ≤ L} / L^d` with
//! `d = 6g + 2n - 6`. The enumeration box comes from a sampled
//! comparability constant `F(λ) ≥ κ·‖λ‖∞`, inflated twice over, and is
//! accepted only once no point on its outer shell lies in the sublevel set.

use std::sync::Arc;

use rayon::prelude::*;

use crate::dehn_thurston::{dt_to_system, enumerate_multicurves, DTCoordinates};
use crate::error::{Error, Result};
use crate::filling::{is_filling, FillingStatus};
use crate::holonomy::{Holonomy, Mat2, PantsDecomposition};
use crate::intersection::pairing;
use crate::words::{Letter, WeightedCurveSystem};

/// Bound on simple test curves when checking that `α` fills.
pub const FILLING_CHECK_BOUND: i64 = 6;

#[derive(Debug, Clone)]
enum Kind {
    Length,
    Intersect {
        alpha: WeightedCurveSystem,
        /// Coordinates of the components when all are simple, enabling the
        /// lattice formula for intersection with multicurves.
        lattice: Option<Vec<(DTCoordinates, f64)>>,
    },
    ThurstonRatio {
        bound: i64,
        probes: Arc<Vec<(DTCoordinates, f64)>>,
    },
}

/// A positive, continuous, degree-one homogeneous functional on curve
/// systems: `ℓ_X`, `i(α, ·)` or `D_X = max_µ i(µ, ·)/ℓ_X(µ)` over simple
/// curves `µ` with coordinates up to a bound.
#[derive(Debug, Clone)]
pub struct HomogeneousFunctional {
    holonomy: Arc<Holonomy>,
    kind: Kind,
    label: String,
}

/// Intersection of two punctured-torus multicurves from their coordinates.
fn torus_lattice_intersection(a: &DTCoordinates, b: &DTCoordinates) -> i64 {
    let (m1, t1) = a.pairs()[0];
    let (m2, t2) = b.pairs()[0];
    (m1 * t2 - m2 * t1).abs()
}

fn is_torus(x: &Holonomy) -> bool {
    let s = x.signature();
    (s.genus, s.punctures) == (1, 1)
}

impl HomogeneousFunctional {
    pub fn length(x: Arc<Holonomy>) -> Self {
        HomogeneousFunctional {
            holonomy: x,
            kind: Kind::Length,
            label: "length".into(),
        }
    }

    /// `i(α, ·)`. Rejects `α` unless the filling certificate succeeds.
    pub fn intersect(x: Arc<Holonomy>, alpha: WeightedCurveSystem) -> Result<Self> {
        match is_filling(&x, &alpha, FILLING_CHECK_BOUND)? {
            FillingStatus::Filling { .. } => {}
            FillingStatus::NotFilling(w) => {
                return Err(Error::NotPositive(format!(
                    "`{}` misses {}",
                    x.presentation().format_system(&alpha),
                    w.describe(x.presentation())
                )))
            }
            FillingStatus::Unknown(reason) => {
                return Err(Error::NotPositive(format!(
                    "filling not certified for `{}`: {reason}",
                    x.presentation().format_system(&alpha)
                )))
            }
        }
        let lattice = if is_torus(&x) {
            let mut coords = Vec::new();
            for (c, w) in alpha.components() {
                if crate::intersection::self_intersection(&x, c)? != 0 {
                    coords.clear();
                    break;
                }
                let single = x.presentation().system(vec![(c.clone(), 1.0)])?;
                coords.push((crate::dehn_thurston::coordinates_of(&x, &single)?, *w));
            }
            (coords.len() == alpha.components().len()).then_some(coords)
        } else {
            None
        };
        let label = format!("intersect({})", x.presentation().format_system(&alpha));
        Ok(HomogeneousFunctional {
            holonomy: x,
            kind: Kind::Intersect { alpha, lattice },
            label,
        })
    }

    /// `D_X` approximated over primitive simple curves with coordinates of
    /// norm `≤ bound`. Punctured torus only.
    pub fn thurston_ratio(x: Arc<Holonomy>, bound: i64) -> Result<Self> {
        let probes = simple_curve_lengths(&x, bound)?;
        Ok(HomogeneousFunctional {
            holonomy: x,
            kind: Kind::ThurstonRatio {
                bound,
                probes: Arc::new(probes),
            },
            label: format!("thurston_ratio(B={bound})"),
        })
    }

    pub fn holonomy(&self) -> &Holonomy {
        &self.holonomy
    }

    pub fn shared_holonomy(&self) -> Arc<Holonomy> {
        self.holonomy.clone()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_length(&self) -> bool {
        matches!(self.kind, Kind::Length)
    }

    /// Value on a weighted curve system.
    pub fn evaluate(&self, s: &WeightedCurveSystem) -> Result<f64> {
        let x = &self.holonomy;
        match &self.kind {
            Kind::Length => x.liouville_intersection(s),
            Kind::Intersect { alpha, .. } => pairing(x, alpha, s),
            Kind::ThurstonRatio { probes, .. } => {
                let mut best = 0.0f64;
                for (mu, len) in probes.iter() {
                    let ms = dt_to_system(x.presentation(), mu)?;
                    best = best.max(pairing(x, &ms, s)? / len);
                }
                Ok(best)
            }
        }
    }

    /// Value on the multicurve with coordinates `c`.
    pub fn evaluate_coordinates(&self, c: &DTCoordinates) -> Result<f64> {
        match &self.kind {
            Kind::Intersect {
                lattice: Some(parts),
                ..
            } => Ok(parts
                .iter()
                .map(|(a, w)| w * torus_lattice_intersection(a, c) as f64)
                .sum()),
            Kind::ThurstonRatio { probes, .. } => Ok(probes
                .iter()
                .map(|(mu, len)| torus_lattice_intersection(mu, c) as f64 / len)
                .fold(0.0, f64::max)),
            _ => {
                let s = dt_to_system(self.holonomy.presentation(), c)?;
                self.evaluate(&s)
            }
        }
    }

    pub fn probe_bound(&self) -> Option<i64> {
        match self.kind {
            Kind::ThurstonRatio { bound, .. } => Some(bound),
            _ => None,
        }
    }
}

/// Primitive simple curves with coordinates of norm `≤ bound` and their
/// `ℓ_X` lengths, in enumeration order.
pub fn simple_curve_lengths(x: &Holonomy, bound: i64) -> Result<Vec<(DTCoordinates, f64)>> {
    let pants = PantsDecomposition::punctured_torus();
    if !is_torus(x) {
        let s = x.signature();
        return Err(Error::Unsupported {
            genus: s.genus,
            punctures: s.punctures,
            what: "simple curve enumeration by coordinates",
        });
    }
    enumerate_multicurves(&pants, bound)
        .filter(|c| {
            let (m, t) = c.pairs()[0];
            gcd(m, t) == 1
        })
        .map(|c| {
            let s = dt_to_system(x.presentation(), &c)?;
            let l = x.liouville_intersection(&s)?;
            Ok((c, l))
        })
        .collect()
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Lattice estimate of `m(F)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureEstimate {
    pub value: f64,
    pub l_used: f64,
    pub count: u64,
    pub dimension: u32,
    /// Final box norm bound.
    pub box_bound: i64,
    /// `(L, count, estimate)` at `L/8, L/4, L/2, L`.
    pub convergence_series: Vec<(f64, u64, f64)>,
    /// Sorted values of the counted points, kept for diagnostics.
    values: Vec<f64>,
}

impl MeasureEstimate {
    /// Fraction of counted points with `F > (1 - ε)·L`.
    pub fn boundary_mass(&self, eps: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let cut = (1.0 - eps) * self.l_used;
        let inside = self.values.partition_point(|&v| v <= cut);
        (self.values.len() - inside) as f64 / self.values.len() as f64
    }
}

/// Values of `F` on every lattice point with norm `≤ n`, exploiting
/// `F(k·c) = k·F(c)` so only primitive points are evaluated.
/// `e^s · m`, renormalised so long products neither overflow nor underflow.
#[derive(Clone, Copy)]
struct Scaled {
    m: Mat2,
    s: f64,
}

impl Scaled {
    fn mul(&self, o: &Scaled) -> Scaled {
        let m = self.m.mul(&o.m);
        let k = m.max_abs();
        if k > 1e64 {
            let inv = 1.0 / k;
            Scaled {
                m: Mat2::new(m.a * inv, m.b * inv, m.c * inv, m.d * inv),
                s: self.s + o.s + k.ln(),
            }
        } else {
            Scaled { m, s: self.s + o.s }
        }
    }

    fn translation_length(&self) -> f64 {
        let lt = self.s + self.m.trace().abs().ln();
        if lt < 27.0 {
            2.0 * (lt.exp() / 2.0).max(1.0).acosh()
        } else {
            2.0 * lt
        }
    }
}

/// Lengths of the primitive simple curves of norm `≤ n` on a punctured
/// torus. Farey neighbours `u, v` have Christoffel words with
/// `w(u + v) = w(u)·w(v)`, so a Stern–Brocot descent costs one matrix
/// product per curve.
fn torus_length_box(x: &Holonomy, n: i64) -> Vec<(i64, f64)> {
    let a = Letter::new(0, false);
    let b = Scaled { m: *x.letter_matrix(Letter::new(1, false)), s: 0.0 };
    let mut out = vec![(1, b.translation_length())];
    for negative in [false, true] {
        let xa = Scaled { m: *x.letter_matrix(if negative { a.inverse() } else { a }), s: 0.0 };
        if !negative {
            out.push((1, xa.translation_length()));
        }
        // (twist count p, intersection count q, matrix)
        let mut stack = vec![((1i64, 0i64, xa), (0i64, 1i64, b))];
        while let Some((l, r)) = stack.pop() {
            let (p, q) = (l.0 + r.0, l.1 + r.1);
            if p.max(q) > n {
                continue;
            }
            let m = l.2.mul(&r.2);
            out.push((p.max(q), m.translation_length()));
            stack.push((l, (p, q, m)));
            stack.push(((p, q, m), r));
        }
    }
    out
}

fn box_values(f: &HomogeneousFunctional, pants: &PantsDecomposition, n: i64) -> Result<Vec<(i64, f64)>> {
    if f.is_length() && is_torus(&f.holonomy) {
        return Ok(torus_length_box(&f.holonomy, n));
    }
    let points: Vec<DTCoordinates> = enumerate_multicurves(pants, n).collect();
    points
        .par_iter()
        .filter(|c| c.pairs().iter().fold(0, |g, &(m, t)| gcd(gcd(g, m), t)) == 1)
        .map(|c| Ok((c.norm(), f.evaluate_coordinates(c)?)))
        .collect()
}

/// Comparability constant `min F(c)/‖c‖∞` over all points of norm `≤ 8`.
fn comparability(f: &HomogeneousFunctional, pants: &PantsDecomposition) -> Result<f64> {
    let mut kappa = f64::INFINITY;
    for (norm, v) in box_values(f, pants, 8)? {
        if v <= 0.0 {
            return Err(Error::NotPositive(format!("{} vanishes on a multicurve", f.label())));
        }
        kappa = kappa.min(v / norm as f64);
    }
    Ok(kappa)
}

/// Counts integral multicurves with `F ≤ L` and returns `count / L^d`.
pub fn estimate_m(f: &HomogeneousFunctional, l: f64, pants: &PantsDecomposition) -> Result<MeasureEstimate> {
    if !(l > 0.0) {
        return Err(Error::NotPositive(format!("sublevel bound {l}")));
    }
    let d = pants.signature.dimension();
    let kappa = comparability(f, pants)?;
    let mut n = ((2.0 * l / kappa).ceil() as i64).max(1);
    for _ in 0..4 {
        let primitive = box_values(f, pants, n)?;
        // a multiple k·c has norm k·‖c‖ and value k·F(c)
        let mut shell_hit = false;
        let mut values = Vec::new();
        for &(norm, v) in &primitive {
            let mut k = 1;
            while k * norm <= n {
                let val = k as f64 * v;
                if val > l {
                    break;
                }
                if k * norm == n {
                    shell_hit = true;
                }
                values.push(val);
                k += 1;
            }
        }
        if shell_hit {
            n *= 2;
            continue;
        }
        values.sort_by(f64::total_cmp);
        let count = values.len() as u64;
        let series = [8.0, 4.0, 2.0, 1.0]
            .iter()
            .map(|div| {
                let lk = l / div;
                let c = values.partition_point(|&v| v <= lk) as u64;
                (lk, c, c as f64 / lk.powi(d as i32))
            })
            .collect();
        return Ok(MeasureEstimate {
            value: count as f64 / l.powi(d as i32),
            l_used: l,
            count,
            dimension: d,
            box_bound: n,
            convergence_series: series,
            values,
        });
    }
    Err(Error::BoxSaturated(n))
}

/// Fraction of counted points with `F` within `ε·L` of `L`.
pub fn sublevel_boundary_mass(
    f: &HomogeneousFunctional,
    l: f64,
    eps: f64,
    pants: &PantsDecomposition,
) -> Result<f64> {
    Ok(estimate_m(f, l, pants)?.boundary_mass(eps))
}
