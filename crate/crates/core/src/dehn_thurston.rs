//! Integer Dehn–Thurston coordinates of multicurves.
//!
//! Each pants curve `c_i` carries a pair `(m_i, t_i)`: `m_i ≥ 0` is the
//! number of times the multicurve crosses `c_i`, and `t_i` is its twist.
//! A pants curve with `m_i = 0` contributes `t_i ≥ 0` parallel copies of
//! itself. Around every pair of pants the `m` values have even sum.
//!
//! Marking table for the once-punctured torus (single pants curve `a`,
//! dual curve `b`): the coordinates `(m, t)` describe the multicurve of
//! homology class `t·[a] + m·[b]`, so `(1, 0)` is `b`, `(0, k)` is `k·a`
//! and `(1, 1)` is `ab`, the image of `b` under the positive twist along
//! `a`. Then `m = i(λ, a)`, `|t| = i(λ, b)` and the sign of `t` is read off
//! `i(λ, ab) = |t - m|`.
//!
//! Other signatures are supported by the enumerator (parity structure
//! comes from the pants graph) but not by the word conversion.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::holonomy::{Boundary, Holonomy, PantsDecomposition};
use crate::intersection::pairing_integral;
use crate::measure::HomogeneousFunctional;
use crate::words::{GroupPresentation, SurfaceSignature, WeightedCurveSystem};

/// Dehn–Thurston coordinates, one `(m, t)` pair per pants curve.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DTCoordinates {
    pairs: Vec<(i64, i64)>,
}

impl DTCoordinates {
    /// Coordinates without the pants-graph parity check (see
    /// [`DTCoordinates::validate`]).
    pub fn new(pairs: Vec<(i64, i64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Coordinates("no pants curves".into()));
        }
        if pairs.iter().all(|&p| p == (0, 0)) {
            return Err(Error::Coordinates("all coordinates are zero".into()));
        }
        for (i, &(m, t)) in pairs.iter().enumerate() {
            if m < 0 {
                return Err(Error::Coordinates(format!("m{} = {m} is negative", i + 1)));
            }
            if m == 0 && t < 0 {
                return Err(Error::Coordinates(format!(
                    "t{} = {t} must be nonnegative when m{} = 0",
                    i + 1,
                    i + 1
                )));
            }
        }
        Ok(DTCoordinates { pairs })
    }

    /// Single-curve coordinates `(m, t)` on the once-punctured torus.
    pub fn torus(m: i64, t: i64) -> Result<Self> {
        DTCoordinates::new(vec![(m, t)])
    }

    pub fn pairs(&self) -> &[(i64, i64)] {
        &self.pairs
    }

    /// `max(|m_i|, |t_i|)`.
    pub fn norm(&self) -> i64 {
        self.pairs.iter().map(|&(m, t)| m.max(t.abs())).max().unwrap_or(0)
    }

    pub fn scaled(&self, k: i64) -> Result<Self> {
        if k <= 0 {
            return Err(Error::Coordinates(format!("scale {k} is not positive")));
        }
        DTCoordinates::new(self.pairs.iter().map(|&(m, t)| (k * m, k * t)).collect())
    }

    /// Checks the curve count and the parity around every pair of pants.
    pub fn validate(&self, pants: &PantsDecomposition) -> Result<()> {
        if self.pairs.len() != pants.curve_count() {
            return Err(Error::Coordinates(format!(
                "{} coordinate pairs for {} pants curves",
                self.pairs.len(),
                pants.curve_count()
            )));
        }
        for (k, cuffs) in pants.pants.iter().enumerate() {
            let total: i64 = cuffs
                .iter()
                .map(|b| match b {
                    Boundary::Curve(i) => self.pairs[*i].0,
                    Boundary::Cusp(_) => 0,
                })
                .sum();
            if total % 2 != 0 {
                return Err(Error::Coordinates(format!(
                    "odd intersection total {total} around pair of pants {k}"
                )));
            }
        }
        Ok(())
    }

    /// Flat integer vector `[m1, t1, m2, t2, …]`.
    pub fn to_flat(&self) -> Vec<i64> {
        self.pairs.iter().flat_map(|&(m, t)| [m, t]).collect()
    }

    pub fn from_flat(values: &[i64]) -> Result<Self> {
        if values.len() % 2 != 0 {
            return Err(Error::Coordinates(format!("odd number of values ({})", values.len())));
        }
        DTCoordinates::new(values.chunks(2).map(|c| (c[0], c[1])).collect())
    }
}

impl fmt::Display for DTCoordinates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.to_flat().iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

impl Serialize for DTCoordinates {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_flat().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DTCoordinates {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<i64>::deserialize(d)?;
        DTCoordinates::from_flat(&v).map_err(serde::de::Error::custom)
    }
}

/// Parity structure of the `m` coordinates: variables are split into free
/// ones and pivots whose parity is forced by the free ones.
#[derive(Debug, Clone)]
struct ParitySolver {
    /// For each variable, `None` if free, or the free variables whose sum
    /// (mod 2) its parity equals.
    pivots: Vec<Option<Vec<usize>>>,
    order: Vec<usize>,
}

impl ParitySolver {
    fn new(pants: &PantsDecomposition) -> Self {
        let n = pants.curve_count();
        // each pants gives a row over GF(2)
        let mut rows: Vec<Vec<u8>> = pants
            .pants
            .iter()
            .map(|cuffs| {
                let mut row = vec![0u8; n];
                for b in cuffs {
                    if let Boundary::Curve(i) = b {
                        row[*i] ^= 1;
                    }
                }
                row
            })
            .filter(|r| r.iter().any(|&x| x == 1))
            .collect();
        let mut pivot_cols = Vec::new();
        let mut r = 0;
        for col in 0..n {
            if let Some(p) = (r..rows.len()).find(|&i| rows[i][col] == 1) {
                rows.swap(r, p);
                for i in 0..rows.len() {
                    if i != r && rows[i][col] == 1 {
                        let pivot_row = rows[r].clone();
                        for (x, y) in rows[i].iter_mut().zip(pivot_row) {
                            *x ^= y;
                        }
                    }
                }
                pivot_cols.push((col, r));
                r += 1;
            }
        }
        let mut pivots: Vec<Option<Vec<usize>>> = vec![None; n];
        for &(col, row) in &pivot_cols {
            let deps: Vec<usize> = (0..n)
                .filter(|&j| j != col && rows[row][j] == 1)
                .collect();
            pivots[col] = Some(deps);
        }
        // free variables first, then pivots (which only depend on free ones)
        let mut order: Vec<usize> = (0..n).filter(|&i| pivots[i].is_none()).collect();
        order.extend((0..n).filter(|&i| pivots[i].is_some()));
        ParitySolver { pivots, order }
    }
}

/// Deterministic enumeration of all valid coordinates with norm `≤ N`.
/// Parity is built into the stepping of the pivot `m` values.
pub struct MulticurveEnumerator {
    bound: i64,
    solver: ParitySolver,
    m: Vec<i64>,
    t: Vec<i64>,
    started: bool,
    done: bool,
}

impl MulticurveEnumerator {
    fn m_start(&self, var: usize) -> i64 {
        match &self.solver.pivots[var] {
            None => 0,
            Some(deps) => deps.iter().map(|&j| self.m[j]).sum::<i64>().rem_euclid(2),
        }
    }

    fn m_step(&self, var: usize) -> i64 {
        if self.solver.pivots[var].is_some() {
            2
        } else {
            1
        }
    }

    fn reset_from(&mut self, pos: usize) {
        // reset m variables after position `pos` in solver order
        for k in pos..self.solver.order.len() {
            let v = self.solver.order[k];
            self.m[v] = self.m_start(v);
        }
    }

    fn t_start(&self, i: usize) -> i64 {
        if self.m[i] == 0 {
            0
        } else {
            -self.bound
        }
    }

    fn reset_t(&mut self) {
        for i in 0..self.t.len() {
            self.t[i] = self.t_start(i);
        }
    }

    fn advance_t(&mut self) -> bool {
        for i in (0..self.t.len()).rev() {
            if self.t[i] < self.bound {
                self.t[i] += 1;
                return true;
            }
            self.t[i] = self.t_start(i);
        }
        false
    }

    fn advance_m(&mut self) -> bool {
        let order = self.solver.order.clone();
        for pos in (0..order.len()).rev() {
            let v = order[pos];
            let step = self.m_step(v);
            if self.m[v] + step <= self.bound {
                self.m[v] += step;
                self.reset_from(pos + 1);
                return true;
            }
        }
        false
    }

    fn step(&mut self) -> bool {
        if !self.started {
            self.started = true;
            self.reset_from(0);
            if self.m.iter().any(|&m| m > self.bound) {
                return false;
            }
            self.reset_t();
            return true;
        }
        if self.advance_t() {
            return true;
        }
        loop {
            if !self.advance_m() {
                return false;
            }
            if self.m.iter().all(|&m| m <= self.bound) {
                self.reset_t();
                return true;
            }
        }
    }
}

impl Iterator for MulticurveEnumerator {
    type Item = DTCoordinates;

    fn next(&mut self) -> Option<DTCoordinates> {
        while !self.done {
            if !self.step() {
                self.done = true;
                break;
            }
            if self.m.iter().all(|&m| m == 0) && self.t.iter().all(|&t| t == 0) {
                continue;
            }
            let pairs = self.m.iter().copied().zip(self.t.iter().copied()).collect();
            return Some(DTCoordinates { pairs });
        }
        None
    }
}

/// All coordinates with `max(|m_i|, |t_i|) ≤ bound`, each exactly once, in
/// a fixed lexicographic order of (`m` in solver order, then `t`).
pub fn enumerate_multicurves(pants: &PantsDecomposition, bound: i64) -> MulticurveEnumerator {
    let n = pants.curve_count();
    MulticurveEnumerator {
        bound: bound.max(0),
        solver: ParitySolver::new(pants),
        m: vec![0; n],
        t: vec![0; n],
        started: false,
        done: bound < 1,
    }
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

/// Balanced word with `p` letters `x` and `q` letters `y` (`p, q` coprime):
/// the cutting sequence of a line of slope `q/p`.
fn christoffel(p: i64, q: i64, x: &str, y: &str) -> String {
    let n = p + q;
    (0..n)
        .map(|k| if ((k + 1) * q) / n > (k * q) / n { y } else { x })
        .collect::<Vec<_>>()
        .join(" ")
}

fn require_torus(sig: SurfaceSignature, what: &'static str) -> Result<()> {
    if (sig.genus, sig.punctures) == (1, 1) {
        Ok(())
    } else {
        Err(Error::Unsupported {
            genus: sig.genus,
            punctures: sig.punctures,
            what,
        })
    }
}

/// The multicurve with coordinates `c`, as a system of canonical words
/// with integer multiplicities.
pub fn dt_to_system(presentation: &GroupPresentation, c: &DTCoordinates) -> Result<WeightedCurveSystem> {
    require_torus(presentation.signature(), "Dehn-Thurston to word conversion")?;
    c.validate(&PantsDecomposition::punctured_torus())?;
    let (m, t) = c.pairs[0];
    let g = gcd(m, t);
    let (mp, tp) = (m / g, t / g);
    let text = if mp == 0 {
        "a1".to_string()
    } else {
        let letter = if tp < 0 { "A1" } else { "a1" };
        christoffel(tp.abs(), mp, letter, "b1")
    };
    let curve = presentation.parse_curve(&text)?;
    presentation.system(vec![(curve, g as f64)])
}

/// Recomputes coordinates from intersection numbers with the pants curve
/// `a`, its dual `b` and `ab`.
pub fn coordinates_of(x: &Holonomy, s: &WeightedCurveSystem) -> Result<DTCoordinates> {
    let p = x.presentation();
    require_torus(p.signature(), "Dehn-Thurston coordinates of a system")?;
    let probe = |text: &str| -> Result<u64> {
        let c = p.system(vec![(p.parse_curve(text)?, 1.0)])?;
        pairing_integral(x, s, &c)
    };
    let m = probe("a1")? as i64;
    let t_abs = probe("b1")? as i64;
    let diag = probe("a1 b1")? as i64;
    let t = if m > 0 && t_abs > 0 && diag == t_abs + m { -t_abs } else { t_abs };
    DTCoordinates::torus(m, t)
}

/// `F(λ)` for the multicurve `λ` with coordinates `c`.
pub fn evaluate_functional(f: &HomogeneousFunctional, c: &DTCoordinates) -> Result<f64> {
    let s = dt_to_system(f.holonomy().presentation(), c)?;
    f.evaluate(&s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn small_torus_enumeration() {
        let pants = PantsDecomposition::punctured_torus();
        let all: Vec<DTCoordinates> = enumerate_multicurves(&pants, 1).collect();
        let flat: Vec<Vec<i64>> = all.iter().map(|c| c.to_flat()).collect();
        assert_eq!(flat, vec![vec![0, 1], vec![1, -1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn parity_is_structural_in_genus_two() {
        let pants = PantsDecomposition::genus_two();
        let all: Vec<DTCoordinates> = enumerate_multicurves(&pants, 3).collect();
        let unique: HashSet<&DTCoordinates> = all.iter().collect();
        assert_eq!(unique.len(), all.len());
        // brute force over the box with the constraints applied as a filter
        let mut expected = 0;
        let r = -3..=3i64;
        for m1 in 0..=3 {
            for m2 in 0..=3 {
                for m3 in 0..=3 {
                    for t1 in r.clone() {
                        for t2 in r.clone() {
                            for t3 in r.clone() {
                                let pairs = vec![(m1, t1), (m2, t2), (m3, t3)];
                                if let Ok(c) = DTCoordinates::new(pairs) {
                                    if c.validate(&pants).is_ok() {
                                        expected += 1;
                                        assert!(unique.contains(&c), "{c}");
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(all.len(), expected);
        for c in &all {
            c.validate(&pants).unwrap();
        }
    }

    #[test]
    fn invalid_coordinates() {
        assert!(DTCoordinates::torus(0, 0).is_err());
        assert!(DTCoordinates::torus(0, -1).is_err());
        assert!(DTCoordinates::torus(-1, 2).is_err());
        let c = DTCoordinates::new(vec![(0, 1), (1, 0), (0, 1)]).unwrap();
        assert!(c.validate(&PantsDecomposition::genus_two()).is_err());
    }

    #[test]
    fn marking_table() {
        let x = Holonomy::modular_torus();
        let p = x.presentation();
        let word = |m, t| p.format_system(&dt_to_system(p, &DTCoordinates::torus(m, t).unwrap()).unwrap());
        assert_eq!(word(1, 0), format!("1:{}", p.format_cyclic(&p.parse_curve("b1").unwrap())));
        assert_eq!(word(0, 3), format!("3:{}", p.format_cyclic(&p.parse_curve("a1").unwrap())));
        assert_eq!(word(1, 1), format!("1:{}", p.format_cyclic(&p.parse_curve("b1 a1").unwrap())));
        assert_eq!(word(2, 4), format!("2:{}", p.format_cyclic(&p.parse_curve("a1 a1 b1").unwrap())));
    }

    #[test]
    fn serialization_is_flat() {
        let c = DTCoordinates::new(vec![(2, -1), (0, 3), (2, 0)]).unwrap();
        assert_eq!(serde_json::to_string(&c).unwrap(), "[2,-1,0,3,2,0]");
        let back: DTCoordinates = serde_json::from_str("[2,-1,0,3,2,0]").unwrap();
        assert_eq!(back, c);
        assert_eq!(c.to_string(), "[2 -1 0 3 2 0]");
    }
}
