//! Mapping classes as automorphisms of the surface group.
//!
//! Twist generators are hard-coded per signature family:
//!
//! * `(1,1)`: `Ta: b ↦ b·a` and `Tb: a ↦ a·B`. On first homology these are the
//!   two elementary unipotent matrices generating `SL(2,Z)`.
//! * `(2,0)`: the Humphries chain `a1, b1, m, b2, a2` where `m` is the curve
//!   homologous to `a1 + a2` crossing `b1` and `b2` once. `Ta: b ↦ b·a`,
//!   `Tb: a ↦ a·B`, `Tm: b1 ↦ a2·a1·b1, b2 ↦ a1·a2·b2`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::words::{
    free_reduce, CyclicWord, GroupPresentation, Letter, SurfaceSignature,
    WeightedCurveSystem, Word,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Twist {
    pub name: String,
    forward: Vec<Word>,
    backward: Vec<Word>,
}

/// Surface group together with its twist generating set.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingClassGroup {
    presentation: GroupPresentation,
    twists: Vec<Twist>,
}

/// An automorphism of the surface group with a replayable factorization
/// into twist generators. Factorization entries are `(twist id, ±1)`,
/// applied right to left like function composition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MappingClass {
    images: Vec<Word>,
    factorization: Vec<(usize, i32)>,
}

fn substitute(images: &[Word], w: &[Letter]) -> Word {
    let mut out = Vec::with_capacity(w.len() * 2);
    for &l in w {
        let image = &images[l.generator()];
        if l.is_inverse() {
            out.extend(image.iter().rev().map(|x| x.inverse()));
        } else {
            out.extend_from_slice(image);
        }
    }
    free_reduce(&out)
}

fn cyclic_key(w: &[Letter]) -> Word {
    let r = crate::words::cyclic_reduce(w);
    let n = r.len();
    let start = crate::words::least_rotation(&r);
    (0..n).map(|i| r[(start + i) % n]).collect()
}

/// Generating twists of the mapping class group of `sig`.
pub fn twist_generators(sig: SurfaceSignature) -> Result<MappingClassGroup> {
    let presentation = GroupPresentation::new(sig);
    let p = &presentation;
    let w = |s: &str| p.parse_word(s).expect("static word");
    let gens = |list: &[&str]| list.iter().map(|s| w(s)).collect::<Vec<_>>();
    let twists = match (sig.genus, sig.punctures) {
        (0, n) if n <= 3 => {
            return Err(Error::NoFillingSystems {
                genus: 0,
                punctures: n,
            })
        }
        (1, 1) => vec![
            Twist {
                name: "Ta".into(),
                forward: gens(&["a1", "b1 a1"]),
                backward: gens(&["a1", "b1 A1"]),
            },
            Twist {
                name: "Tb".into(),
                forward: gens(&["a1 B1", "b1"]),
                backward: gens(&["a1 b1", "b1"]),
            },
        ],
        (2, 0) => vec![
            Twist {
                name: "Ta1".into(),
                forward: gens(&["a1", "b1 a1", "a2", "b2"]),
                backward: gens(&["a1", "b1 A1", "a2", "b2"]),
            },
            Twist {
                name: "Tb1".into(),
                forward: gens(&["a1 B1", "b1", "a2", "b2"]),
                backward: gens(&["a1 b1", "b1", "a2", "b2"]),
            },
            Twist {
                name: "Tm".into(),
                forward: gens(&["a1", "a2 a1 b1", "a2", "a1 a2 b2"]),
                backward: gens(&["a1", "A1 A2 b1", "a2", "A2 A1 b2"]),
            },
            Twist {
                name: "Tb2".into(),
                forward: gens(&["a1", "b1", "a2 B2", "b2"]),
                backward: gens(&["a1", "b1", "a2 b2", "b2"]),
            },
            Twist {
                name: "Ta2".into(),
                forward: gens(&["a1", "b1", "a2", "b2 a2"]),
                backward: gens(&["a1", "b1", "a2", "b2 A2"]),
            },
        ],
        (g, n) => {
            return Err(Error::Unsupported {
                genus: g,
                punctures: n,
                what: "twist generators",
            })
        }
    };
    Ok(MappingClassGroup {
        presentation,
        twists,
    })
}

impl MappingClassGroup {
    pub fn presentation(&self) -> &GroupPresentation {
        &self.presentation
    }

    pub fn twists(&self) -> &[Twist] {
        &self.twists
    }

    pub fn identity(&self) -> MappingClass {
        MappingClass {
            images: (0..self.presentation.rank())
                .map(|k| vec![Letter::new(k, false)])
                .collect(),
            factorization: Vec::new(),
        }
    }

    /// `T_k^{exponent}` for `exponent = ±1`.
    pub fn twist(&self, id: usize, exponent: i32) -> MappingClass {
        let t = &self.twists[id];
        let images = if exponent > 0 {
            t.forward.clone()
        } else {
            t.backward.clone()
        };
        MappingClass {
            images,
            factorization: vec![(id, exponent.signum())],
        }
    }

    /// Every twist followed by its inverse: `T0, T0⁻¹, T1, T1⁻¹, …`.
    pub fn generators(&self) -> Vec<MappingClass> {
        (0..self.twists.len())
            .flat_map(|k| [self.twist(k, 1), self.twist(k, -1)])
            .collect()
    }

    /// Replays a factorization `[(id, ±1), …]` (leftmost applied last).
    pub fn from_factorization(&self, factors: &[(usize, i32)]) -> MappingClass {
        let mut phi = self.identity();
        for &(id, e) in factors.iter().rev() {
            for _ in 0..e.unsigned_abs() {
                phi = self.compose(&self.twist(id, e.signum()), &phi);
            }
        }
        phi
    }

    /// `compose(φ, ψ)` acts as `φ ∘ ψ`.
    pub fn compose(&self, phi: &MappingClass, psi: &MappingClass) -> MappingClass {
        let images = psi.images.iter().map(|w| substitute(&phi.images, w)).collect();
        let mut factorization = phi.factorization.clone();
        factorization.extend_from_slice(&psi.factorization);
        MappingClass {
            images,
            factorization,
        }
    }

    pub fn invert(&self, phi: &MappingClass) -> MappingClass {
        let inverse: Vec<(usize, i32)> = phi
            .factorization
            .iter()
            .rev()
            .map(|&(id, e)| (id, -e))
            .collect();
        self.from_factorization(&inverse)
    }

    pub fn apply_word(&self, phi: &MappingClass, w: &[Letter]) -> Word {
        substitute(&phi.images, w)
    }

    pub fn apply_curve(&self, phi: &MappingClass, w: &CyclicWord) -> CyclicWord {
        let image = substitute(&phi.images, w.letters());
        self.presentation
            .cyclic_canonical(&image, w.is_unoriented())
            .expect("automorphisms preserve nontrivial classes")
    }

    /// Pushes a curve system forward; weights are unchanged.
    pub fn apply_system(
        &self,
        phi: &MappingClass,
        s: &WeightedCurveSystem,
    ) -> WeightedCurveSystem {
        let parts = s
            .components()
            .iter()
            .map(|(w, x)| (self.apply_curve(phi, w), *x))
            .collect();
        self.presentation
            .system(parts)
            .expect("automorphisms preserve curve systems")
    }

    /// Checks the automorphism invariant: the relator (closed case) or each
    /// boundary loop (punctured case) maps to a conjugate of a relator or
    /// boundary loop, exactly in the free group.
    pub fn is_automorphism(&self, phi: &MappingClass) -> bool {
        if phi.images.len() != self.presentation.rank() {
            return false;
        }
        let p = &self.presentation;
        if p.signature().is_closed() {
            let image = substitute(&phi.images, p.relator());
            cyclic_key(&image) == cyclic_key(p.relator())
        } else {
            let keys: Vec<Word> = p.peripheral_words().iter().map(|w| cyclic_key(w)).collect();
            p.peripheral_words()
                .iter()
                .all(|w| keys.contains(&cyclic_key(&substitute(&phi.images, w))))
        }
    }

    /// Action on first homology as an integer matrix (column k = image of
    /// generator k).
    pub fn homology_matrix(&self, phi: &MappingClass) -> Vec<Vec<i64>> {
        let r = self.presentation.rank();
        let mut m = vec![vec![0i64; r]; r];
        for (k, image) in phi.images.iter().enumerate() {
            for l in image {
                m[l.generator()][k] += if l.is_inverse() { -1 } else { 1 };
            }
        }
        m
    }
}

impl MappingClass {
    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn factorization(&self) -> &[(usize, i32)] {
        &self.factorization
    }

    pub fn is_identity_factorization(&self) -> bool {
        self.factorization.is_empty()
    }
}

/// Shared handle used by the counting code.
pub type SharedGroup = Arc<MappingClassGroup>;
