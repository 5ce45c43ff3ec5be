//! Discrete faithful representations into `SL(2,R)` built from
//! Fenchel–Nielsen data, and the translation-length / axis evaluators.
//!
//! Supported pants graphs:
//!
//! * once-punctured torus: one pants `(α, α, cusp)`;
//! * genus two: two one-holed tori `(α1, α1, γ)` and `(α2, α2, γ)` glued
//!   along the separating curve `γ`.
//!
//! Twists are measured in hyperbolic length. On the punctured torus, moving
//! the twist from `τ` to `τ + ℓ` gives the marked structure `ρ ∘ Ta⁻¹`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intersection::OrbitNet;
use crate::words::{cyclic_reduce, CyclicWord, GroupPresentation, Letter, SurfaceSignature, WeightedCurveSystem};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn diag(x: f64, y: f64) -> Self {
        Mat2::new(x, 0.0, 0.0, y)
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Inverse of a determinant-one matrix.
    pub fn inv(&self) -> Mat2 {
        Mat2::new(self.d, -self.b, -self.c, self.a)
    }

    /// General inverse (any nonzero determinant).
    pub fn inv_general(&self) -> Mat2 {
        let det = self.det();
        Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det)
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    /// Max-entry distance to `±I`.
    pub fn identity_residual(&self) -> f64 {
        let plus = (self.a - 1.0).abs().max(self.b.abs()).max(self.c.abs()).max((self.d - 1.0).abs());
        let minus = (self.a + 1.0).abs().max(self.b.abs()).max(self.c.abs()).max((self.d + 1.0).abs());
        plus.min(minus)
    }

    pub fn apply(&self, p: BoundaryPoint) -> BoundaryPoint {
        BoundaryPoint::new(self.a * p.x + self.b * p.y, self.c * p.x + self.d * p.y)
    }

    /// Möbius action on the upper half plane.
    pub fn apply_complex(&self, z: (f64, f64)) -> (f64, f64) {
        // (a z + b) / (c z + d)
        let (x, y) = z;
        let nr = self.a * x + self.b;
        let ni = self.a * y;
        let dr = self.c * x + self.d;
        let di = self.c * y;
        let den = dr * dr + di * di;
        ((nr * dr + ni * di) / den, (ni * dr - nr * di) / den)
    }

    /// Fixed points `(attracting, repelling)` of a hyperbolic matrix.
    pub fn fixed_points(&self) -> Option<(BoundaryPoint, BoundaryPoint)> {
        let t = self.trace();
        if t.abs() <= 2.0 {
            return None;
        }
        let root = (t * t - 4.0).sqrt();
        let (big, small) = if t > 0.0 {
            ((t + root) / 2.0, 2.0 / (t + root))
        } else {
            ((t - root) / 2.0, 2.0 / (t - root))
        };
        Some((self.eigenvector(big), self.eigenvector(small)))
    }

    fn eigenvector(&self, lambda: f64) -> BoundaryPoint {
        // (A - λ)v = 0: v = (b, λ - a) or (λ - d, c)
        let v1 = (self.b, lambda - self.a);
        let v2 = (lambda - self.d, self.c);
        let n1 = v1.0.abs().max(v1.1.abs());
        let n2 = v2.0.abs().max(v2.1.abs());
        if n1 >= n2 {
            BoundaryPoint::new(v1.0, v1.1)
        } else {
            BoundaryPoint::new(v2.0, v2.1)
        }
    }
}

/// A point of the real projective line, in homogeneous coordinates with
/// `x² + y² = 1` and `y ≥ 0` (the point at infinity is `(1, 0)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub x: f64,
    pub y: f64,
}

impl BoundaryPoint {
    pub fn new(x: f64, y: f64) -> Self {
        let n = x.hypot(y);
        let (mut x, mut y) = (x / n, y / n);
        if y < 0.0 || (y == 0.0 && x < 0.0) {
            x = -x;
            y = -y;
        }
        BoundaryPoint { x, y }
    }

    pub fn from_real(r: f64) -> Self {
        if r.is_infinite() {
            BoundaryPoint::new(1.0, 0.0)
        } else {
            BoundaryPoint::new(r, 1.0)
        }
    }

    pub fn infinity() -> Self {
        BoundaryPoint { x: 1.0, y: 0.0 }
    }

    pub fn to_real(self) -> f64 {
        if self.y == 0.0 {
            f64::INFINITY
        } else {
            self.x / self.y
        }
    }

    /// Angle on the circle `RP¹ ≅ R/πZ`, in `[0, π)`.
    pub fn angle(self) -> f64 {
        let t = self.y.atan2(self.x);
        if t >= std::f64::consts::PI {
            t - std::f64::consts::PI
        } else {
            t
        }
    }
}

/// One boundary slot of a pair of pants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Curve(usize),
    Cusp(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PantsDecomposition {
    pub signature: SurfaceSignature,
    pub pants: Vec<[Boundary; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GluingShape {
    PuncturedTorus,
    TwoHandles { left: usize, middle: usize, right: usize },
}

impl PantsDecomposition {
    pub fn punctured_torus() -> Self {
        PantsDecomposition {
            signature: SurfaceSignature { genus: 1, punctures: 1 },
            pants: vec![[Boundary::Curve(0), Boundary::Curve(0), Boundary::Cusp(0)]],
        }
    }

    /// Curves: 0 = `a1`, 1 = separating `[a1,b1]`, 2 = `a2`.
    pub fn genus_two() -> Self {
        PantsDecomposition {
            signature: SurfaceSignature { genus: 2, punctures: 0 },
            pants: vec![
                [Boundary::Curve(0), Boundary::Curve(0), Boundary::Curve(1)],
                [Boundary::Curve(2), Boundary::Curve(2), Boundary::Curve(1)],
            ],
        }
    }

    pub fn curve_count(&self) -> usize {
        self.signature.pants_curves()
    }

    /// Validates the trivalent gluing: right number of pants, every curve
    /// glued exactly twice, every cusp used once, connected.
    pub fn validate(&self) -> Result<()> {
        let sig = SurfaceSignature::new(self.signature.genus, self.signature.punctures)?;
        let expected = (2 * sig.genus + sig.punctures - 2) as usize;
        if self.pants.len() != expected {
            return Err(Error::Structure(format!(
                "expected {expected} pants, found {}",
                self.pants.len()
            )));
        }
        let curves = sig.pants_curves();
        let mut uses = vec![0usize; curves];
        let mut cusps = vec![0usize; sig.punctures as usize];
        for slot in self.pants.iter().flatten() {
            match *slot {
                Boundary::Curve(i) if i < curves => uses[i] += 1,
                Boundary::Cusp(j) if j < cusps.len() => cusps[j] += 1,
                other => return Err(Error::Structure(format!("slot {other:?} out of range"))),
            }
        }
        if let Some(i) = uses.iter().position(|&u| u != 2) {
            return Err(Error::Structure(format!(
                "curve {i} glued {} times, expected 2",
                uses[i]
            )));
        }
        if cusps.iter().any(|&u| u != 1) {
            return Err(Error::Structure("each cusp must appear once".into()));
        }
        // connectivity through shared curves
        let mut seen = vec![false; self.pants.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(p) = stack.pop() {
            for (q, other) in self.pants.iter().enumerate() {
                if !seen[q]
                    && self.pants[p]
                        .iter()
                        .any(|s| matches!(s, Boundary::Curve(_)) && other.contains(s))
                {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Structure("pants graph is disconnected".into()));
        }
        Ok(())
    }

    fn shape(&self) -> Result<GluingShape> {
        self.validate()?;
        let sig = self.signature;
        match (sig.genus, sig.punctures) {
            (1, 1) => Ok(GluingShape::PuncturedTorus),
            (2, 0) => {
                let handle = |p: &[Boundary; 3]| -> Option<(usize, usize)> {
                    let ids: Vec<usize> = p
                        .iter()
                        .map(|s| match s {
                            Boundary::Curve(i) => *i,
                            Boundary::Cusp(_) => usize::MAX,
                        })
                        .collect();
                    for k in 0..3 {
                        let (x, y, z) = (ids[k], ids[(k + 1) % 3], ids[(k + 2) % 3]);
                        if x == y && z != x {
                            return Some((x, z));
                        }
                    }
                    None
                };
                match (handle(&self.pants[0]), handle(&self.pants[1])) {
                    (Some((l, m1)), Some((r, m2))) if m1 == m2 => Ok(GluingShape::TwoHandles {
                        left: l,
                        middle: m1,
                        right: r,
                    }),
                    _ => Err(Error::Unsupported {
                        genus: 2,
                        punctures: 0,
                        what: "pants graphs other than two glued handles",
                    }),
                }
            }
            (g, n) => Err(Error::Unsupported {
                genus: g,
                punctures: n,
                what: "holonomy construction",
            }),
        }
    }
}

/// Fenchel–Nielsen coordinates relative to a pants decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FenchelNielsen {
    pub pants: PantsDecomposition,
    pub lengths: Vec<f64>,
    pub twists: Vec<f64>,
}

impl FenchelNielsen {
    pub fn new(pants: PantsDecomposition, lengths: Vec<f64>, twists: Vec<f64>) -> Result<Self> {
        let fnc = FenchelNielsen {
            pants,
            lengths,
            twists,
        };
        fnc.validate()?;
        Ok(fnc)
    }

    pub fn punctured_torus(length: f64, twist: f64) -> Result<Self> {
        FenchelNielsen::new(PantsDecomposition::punctured_torus(), vec![length], vec![twist])
    }

    pub fn genus_two(lengths: [f64; 3], twists: [f64; 3]) -> Result<Self> {
        FenchelNielsen::new(PantsDecomposition::genus_two(), lengths.to_vec(), twists.to_vec())
    }

    pub fn validate(&self) -> Result<()> {
        self.pants.validate()?;
        let k = self.pants.curve_count();
        if self.lengths.len() != k || self.twists.len() != k {
            return Err(Error::Structure(format!(
                "expected {k} lengths and twists, found {} and {}",
                self.lengths.len(),
                self.twists.len()
            )));
        }
        if let Some(l) = self.lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::Structure(format!("pants curve length {l} must be positive")));
        }
        if self.twists.iter().any(|t| !t.is_finite()) {
            return Err(Error::Structure("twists must be finite".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let fnc: FenchelNielsen =
            serde_json::from_str(text).map_err(|e| Error::Structure(e.to_string()))?;
        fnc.validate()?;
        Ok(fnc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// A representation of the surface group, one matrix per generator.
#[derive(Debug, Clone)]
pub struct Holonomy {
    presentation: GroupPresentation,
    matrices: Vec<Mat2>,
    inverses: Vec<Mat2>,
    source: Option<FenchelNielsen>,
    tolerance: f64,
    net: OnceLock<Arc<OrbitNet>>,
}

/// Traces `(tr A, tr B, tr AB)` of a one-holed torus with pants curve of
/// length `length`, twist `twist` and boundary length `boundary` (0 = cusp).
pub fn one_holed_torus_traces(length: f64, twist: f64, boundary: f64) -> (f64, f64, f64) {
    let h = length / 2.0;
    let x = 2.0 * h.cosh();
    let k = (x * x + 2.0 * (boundary / 2.0).cosh() - 2.0).sqrt() / h.sinh();
    let s = twist / 2.0;
    (x, k * s.cosh(), k * (s - h).cosh())
}

/// Matrices `(A, B)` realising the traces `(x, y, tr AB = z)`.
pub fn matrices_from_traces(x: f64, y: f64, z: f64) -> (Mat2, Mat2) {
    let root = (x * x - 4.0).sqrt();
    let lambda = (x + root) / 2.0;
    let a = Mat2::diag(lambda, 1.0 / lambda);
    // λ - 1/λ = √(x² - 4)
    let p = (z - y / lambda) / root;
    let s = y - p;
    let qr = p * s - 1.0;
    let q = qr.abs().sqrt().max(1e-300) * if qr < 0.0 { -1.0 } else { 1.0 };
    let r = if qr == 0.0 { 0.0 } else { qr / q };
    (a, Mat2::new(p, if qr == 0.0 { 1.0 } else { q }, r, s))
}

fn commutator(a: &Mat2, b: &Mat2) -> Mat2 {
    a.mul(b).mul(&a.inv()).mul(&b.inv())
}

/// Eigen-decomposition `M = P diag(μ, 1/μ) P⁻¹` with `|μ| > 1`, `det P = 1`.
fn diagonalize(m: &Mat2) -> (Mat2, f64) {
    let (attr, rep) = m.fixed_points().expect("hyperbolic");
    let mut p = Mat2::new(attr.x, rep.x, attr.y, rep.y);
    let det = p.det();
    if det < 0.0 {
        p.b = -p.b;
        p.d = -p.d;
    }
    let s = p.det().abs().sqrt();
    p = Mat2::new(p.a / s, p.b / s, p.c / s, p.d / s);
    let t = m.trace();
    let mu = if t > 0.0 {
        (t + (t * t - 4.0).sqrt()) / 2.0
    } else {
        (t - (t * t - 4.0).sqrt()) / 2.0
    };
    (p, mu)
}

impl Holonomy {
    /// Representation from explicit generator matrices; runs the holonomy
    /// self-checks.
    pub fn from_matrices(
        presentation: GroupPresentation,
        matrices: Vec<Mat2>,
        tolerance: f64,
    ) -> Result<Self> {
        if matrices.len() != presentation.rank() {
            return Err(Error::Mismatch(format!(
                "{} matrices for rank {}",
                matrices.len(),
                presentation.rank()
            )));
        }
        let inverses = matrices.iter().map(|m| m.inv_general()).collect();
        let h = Holonomy {
            presentation,
            matrices,
            inverses,
            source: None,
            tolerance,
            net: OnceLock::new(),
        };
        h.self_check()?;
        Ok(h)
    }

    /// The modular torus: `A = [[1,1],[1,2]]`, `B = [[1,-1],[-1,2]]`.
    pub fn modular_torus() -> Self {
        let p = GroupPresentation::new(SurfaceSignature { genus: 1, punctures: 1 });
        Holonomy::from_matrices(
            p,
            vec![Mat2::new(1.0, 1.0, 1.0, 2.0), Mat2::new(1.0, -1.0, -1.0, 2.0)],
            DEFAULT_TOLERANCE,
        )
        .expect("modular torus preset is valid")
    }

    /// Genus two with all pants curves of length 2 and no twisting.
    pub fn genus2_regular() -> Self {
        let fnc = FenchelNielsen::genus_two([2.0, 2.0, 2.0], [0.0, 0.0, 0.0]).expect("valid");
        build_holonomy(&fnc).expect("regular genus two preset is valid")
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "modular_torus" => Ok(Holonomy::modular_torus()),
            "genus2_regular" => Ok(Holonomy::genus2_regular()),
            other => Err(Error::Structure(format!("unknown preset `{other}`"))),
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn presentation(&self) -> &GroupPresentation {
        &self.presentation
    }

    pub fn signature(&self) -> SurfaceSignature {
        self.presentation.signature()
    }

    pub fn matrices(&self) -> &[Mat2] {
        &self.matrices
    }

    pub fn source(&self) -> Option<&FenchelNielsen> {
        self.source.as_ref()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Orbit data of the base point `i` used by closed-surface crossing
    /// sweeps, computed on first use.
    pub fn orbit_net(&self) -> &OrbitNet {
        self.net.get_or_init(|| Arc::new(OrbitNet::compute(self)))
    }

    pub fn letter_matrix(&self, l: Letter) -> &Mat2 {
        if l.is_inverse() {
            &self.inverses[l.generator()]
        } else {
            &self.matrices[l.generator()]
        }
    }

    pub fn evaluate(&self, w: &[Letter]) -> Mat2 {
        w.iter()
            .fold(Mat2::IDENTITY, |acc, &l| acc.mul(self.letter_matrix(l)))
    }

    /// Residual of the relator image from `±I` (closed surfaces).
    pub fn relator_residual(&self) -> f64 {
        if self.presentation.relator().is_empty() {
            0.0
        } else {
            self.evaluate(self.presentation.relator()).identity_residual()
        }
    }

    /// `max | |tr ρ(p)| - 2 |` over boundary loops.
    pub fn peripheral_residual(&self) -> f64 {
        self.presentation
            .peripheral_words()
            .iter()
            .map(|w| (self.evaluate(w).trace().abs() - 2.0).abs())
            .fold(0.0, f64::max)
    }

    fn self_check(&self) -> Result<()> {
        let det = self
            .matrices
            .iter()
            .map(|m| (m.det() - 1.0).abs())
            .fold(0.0, f64::max);
        let rel = self.relator_residual();
        let per = self.peripheral_residual();
        // rounding in the relator product grows with its partial products
        let mut scale = 1.0f64;
        let mut acc = Mat2::IDENTITY;
        for &l in self.presentation.relator() {
            acc = acc.mul(self.letter_matrix(l));
            scale = scale.max(acc.max_abs());
        }
        if det > self.tolerance || rel > self.tolerance * scale || per > self.tolerance * scale {
            return Err(Error::ConstructionFailed(format!(
                "determinant residual {det:.3e}, relator residual {rel:.3e}, peripheral residual {per:.3e}"
            )));
        }
        // short nonperipheral classes must be hyperbolic
        let rank = self.presentation.rank();
        let letters: Vec<Letter> = (0..rank)
            .flat_map(|k| [Letter::new(k, false), Letter::new(k, true)])
            .collect();
        let mut words: Vec<Vec<Letter>> = vec![vec![]];
        for _ in 0..3 {
            let mut next = Vec::new();
            for w in &words {
                for &l in &letters {
                    if w.last() != Some(&l.inverse()) {
                        let mut v = w.clone();
                        v.push(l);
                        next.push(v);
                    }
                }
            }
            for w in &next {
                let r = cyclic_reduce(w);
                if r.is_empty() {
                    continue;
                }
                let Ok(c) = self.presentation.cyclic_canonical(&r, true) else {
                    continue;
                };
                if self.presentation.is_peripheral(&c) {
                    continue;
                }
                let t = self.evaluate(c.letters()).trace().abs();
                if t <= 2.0 + self.tolerance {
                    return Err(Error::ConstructionFailed(format!(
                        "`{}` has |trace| {t}",
                        self.presentation.format_cyclic(&c)
                    )));
                }
            }
            words = next;
        }
        Ok(())
    }

    pub fn trace(&self, w: &[Letter]) -> f64 {
        self.evaluate(w).trace()
    }

    /// Hyperbolic translation length `2·arccosh(|tr|/2)`.
    pub fn geodesic_length(&self, gamma: &CyclicWord) -> Result<f64> {
        self.word_length(gamma.letters())
    }

    pub fn word_length(&self, w: &[Letter]) -> Result<f64> {
        let t = self.evaluate(w).trace().abs();
        if t <= 2.0 + self.tolerance {
            return Err(Error::NotHyperbolic {
                word: self.presentation.format_word(w),
                trace: t,
            });
        }
        Ok(2.0 * (t / 2.0).acosh())
    }

    /// Liouville pairing `Σ weight · ℓ(component)`.
    pub fn liouville_intersection(&self, s: &WeightedCurveSystem) -> Result<f64> {
        s.components()
            .iter()
            .map(|(w, x)| self.geodesic_length(w).map(|l| x * l))
            .sum()
    }

    /// `(attracting, repelling)` fixed points of `ρ(w)`.
    pub fn axis(&self, w: &[Letter]) -> Result<(BoundaryPoint, BoundaryPoint)> {
        let m = self.evaluate(w);
        axis_of(&m).ok_or_else(|| Error::NotHyperbolic {
            word: self.presentation.format_word(w),
            trace: m.trace().abs(),
        })
    }
}

pub fn axis_of(m: &Mat2) -> Option<(BoundaryPoint, BoundaryPoint)> {
    m.fixed_points()
}

impl fmt::Display for Holonomy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, m) in self.matrices.iter().enumerate() {
            writeln!(
                f,
                "{}: [[{}, {}], [{}, {}]]",
                self.presentation.generator_name(k),
                m.a,
                m.b,
                m.c,
                m.d
            )?;
        }
        Ok(())
    }
}

fn unit_determinant(m: &Mat2) -> Mat2 {
    let s = m.det().sqrt();
    Mat2::new(m.a / s, m.b / s, m.c / s, m.d / s)
}

/// Conjugates the generators so that `Σ ‖Mᵢ‖²` is (nearly) minimal, i.e.
/// the base point `i` sits where the generators displace it least. Keeps
/// the entries, and so the rounding in long products, small.
fn balance(matrices: Vec<Mat2>) -> Vec<Mat2> {
    let conj = |x: f64, ly: f64| {
        let sy = (ly / 2.0).exp();
        // P maps i to x + i·y
        let p = Mat2::new(sy, x / sy, 0.0, 1.0 / sy);
        (p, p.inv())
    };
    let cost = |v: [f64; 2]| -> f64 {
        let (p, pi) = conj(v[0], v[1]);
        matrices
            .iter()
            .map(|m| {
                let c = pi.mul(m).mul(&p);
                c.a * c.a + c.b * c.b + c.c * c.c + c.d * c.d
            })
            .sum()
    };
    // Nelder–Mead on (x, ln y)
    let mut simplex = [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]];
    let mut values = simplex.map(cost);
    for _ in 0..400 {
        let mut order = [0, 1, 2];
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        let (best, mid, worst) = (order[0], order[1], order[2]);
        let centroid = [
            (simplex[best][0] + simplex[mid][0]) / 2.0,
            (simplex[best][1] + simplex[mid][1]) / 2.0,
        ];
        let along = |t: f64| {
            [
                centroid[0] + t * (simplex[worst][0] - centroid[0]),
                centroid[1] + t * (simplex[worst][1] - centroid[1]),
            ]
        };
        let reflected = along(-1.0);
        let fr = cost(reflected);
        if fr < values[best] {
            let expanded = along(-2.0);
            let fe = cost(expanded);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[mid] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            let contracted = along(0.5);
            let fc = cost(contracted);
            if fc < values[worst] {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                for k in [mid, worst] {
                    simplex[k] = [
                        (simplex[k][0] + simplex[best][0]) / 2.0,
                        (simplex[k][1] + simplex[best][1]) / 2.0,
                    ];
                    values[k] = cost(simplex[k]);
                }
            }
        }
        if (values[worst] - values[best]).abs() < 1e-14 * values[best] {
            break;
        }
    }
    let best = (0..3).min_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap();
    let (p, pi) = conj(simplex[best][0], simplex[best][1]);
    matrices
        .iter()
        .map(|m| unit_determinant(&pi.mul(m).mul(&p)))
        .collect()
}

/// Builds the holonomy of a Fenchel–Nielsen structure by gluing one-holed
/// tori (trace coordinates) along their boundaries.
pub fn build_holonomy(fnc: &FenchelNielsen) -> Result<Holonomy> {
    fnc.validate()?;
    let presentation = GroupPresentation::new(fnc.pants.signature);
    let matrices = match fnc.pants.shape()? {
        GluingShape::PuncturedTorus => {
            let (x, y, z) = one_holed_torus_traces(fnc.lengths[0], fnc.twists[0], 0.0);
            let (a, b) = matrices_from_traces(x, y, z);
            vec![a, b]
        }
        GluingShape::TwoHandles {
            left,
            middle,
            right,
        } => {
            let lc = fnc.lengths[middle];
            let (x1, y1, z1) = one_holed_torus_traces(fnc.lengths[left], fnc.twists[left], lc);
            let (a1, b1) = matrices_from_traces(x1, y1, z1);
            let (x2, y2, z2) = one_holed_torus_traces(fnc.lengths[right], fnc.twists[right], lc);
            let (a2, b2) = matrices_from_traces(x2, y2, z2);
            let c1 = commutator(&a1, &b1);
            let c2 = commutator(&a2, &b2);
            // conjugate the second handle so that [A2,B2] = [A1,B1]⁻¹
            let (p1, _) = diagonalize(&c1.inv());
            let (p2, _) = diagonalize(&c2);
            let shift = fnc.twists[middle] / 2.0;
            let slide = p1
                .mul(&Mat2::diag(shift.exp(), (-shift).exp()))
                .mul(&p1.inv());
            let m = slide.mul(&p1).mul(&p2.inv());
            let conj = |x: &Mat2| m.mul(x).mul(&m.inv());
            vec![a1, b1, conj(&a2), conj(&b2)]
        }
    };
    let matrices = balance(matrices.iter().map(unit_determinant).collect());
    let mut h = Holonomy::from_matrices(presentation, matrices, DEFAULT_TOLERANCE)?;
    h.source = Some(fnc.clone());
    Ok(h)
}
