//! Surface group presentations and conjugacy classes of words.
//!
//! Generators are `a1 b1 … ag bg` followed by `c1 … c(n-1)` for punctured
//! surfaces; the last boundary loop is eliminated through the relator so the
//! group is free of rank `2g+n-1`. Closed surfaces keep the one relator
//! `[a1,b1]…[ag,bg]` and words are shortened with Dehn's algorithm.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurfaceSignature {
    pub genus: u32,
    pub punctures: u32,
}

impl SurfaceSignature {
    pub fn new(genus: u32, punctures: u32) -> Result<Self> {
        let chi = 2 - 2 * genus as i64 - punctures as i64;
        if chi >= 0 {
            return Err(Error::Signature {
                genus,
                punctures,
                reason: "Euler characteristic must be negative",
            });
        }
        if 6 * genus + 2 * punctures <= 6 {
            return Err(Error::Signature {
                genus,
                punctures,
                reason: "lamination space must have positive dimension",
            });
        }
        Ok(SurfaceSignature { genus, punctures })
    }

    /// Real dimension of the space of measured laminations, `6g+2n-6`.
    pub fn dimension(&self) -> u32 {
        6 * self.genus + 2 * self.punctures - 6
    }

    /// Number of curves in a pants decomposition, `3g-3+n`.
    pub fn pants_curves(&self) -> usize {
        (3 * self.genus + self.punctures - 3) as usize
    }

    pub fn is_closed(&self) -> bool {
        self.punctures == 0
    }

    /// Number of generators in the working alphabet.
    pub fn rank(&self) -> usize {
        if self.punctures == 0 {
            2 * self.genus as usize
        } else {
            (2 * self.genus + self.punctures - 1) as usize
        }
    }
}

impl fmt::Display for SurfaceSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(g={}, n={})", self.genus, self.punctures)
    }
}

/// A generator or its inverse. The code is `±(index+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter(i8);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        let code = generator as i8 + 1;
        Letter(if inverse { -code } else { code })
    }

    pub fn generator(self) -> usize {
        (self.0.unsigned_abs() - 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    /// Position in the alphabet order `a1 < A1 < b1 < B1 < …`.
    pub fn rank_key(self) -> u8 {
        2 * self.generator() as u8 + self.is_inverse() as u8
    }

    pub fn code(self) -> i8 {
        self.0
    }

    pub fn from_code(code: i8) -> Option<Self> {
        (code != 0).then_some(Letter(code))
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank_key().cmp(&other.rank_key())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub type Word = Vec<Letter>;

pub fn inverse_word(w: &[Letter]) -> Word {
    w.iter().rev().map(|l| l.inverse()).collect()
}

/// Free reduction: cancels adjacent inverse pairs.
pub fn free_reduce(w: &[Letter]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Free and cyclic reduction.
pub fn cyclic_reduce(w: &[Letter]) -> Word {
    let w = free_reduce(w);
    let mut lo = 0;
    let mut hi = w.len();
    while hi - lo >= 2 && w[lo] == w[hi - 1].inverse() {
        lo += 1;
        hi -= 1;
    }
    w[lo..hi].to_vec()
}

/// Start index of the lexicographically least rotation (Booth's algorithm).
pub fn least_rotation(w: &[Letter]) -> usize {
    let n = w.len();
    if n == 0 {
        return 0;
    }
    let s: Vec<u8> = w.iter().chain(w.iter()).map(|l| l.rank_key()).collect();
    let mut f = vec![-1i64; 2 * n];
    let mut k = 0usize;
    for j in 1..2 * n {
        let sj = s[j];
        let mut i = f[j - k - 1];
        while i != -1 && sj != s[k + i as usize + 1] {
            if sj < s[k + i as usize + 1] {
                k = j - i as usize - 1;
            }
            i = f[i as usize];
        }
        if i == -1 && sj != s[k] {
            if sj < s[k] {
                k = j;
            }
            f[j - k] = -1;
        } else {
            f[j - k] = i + 1;
        }
    }
    k % n
}

fn rotate(w: &[Letter], start: usize) -> Word {
    w[start..].iter().chain(w[..start].iter()).copied().collect()
}

fn least_rotated(w: &[Letter]) -> Word {
    rotate(w, least_rotation(w))
}

/// A conjugacy class stored in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicWord {
    letters: Word,
    unoriented: bool,
}

impl CyclicWord {
    /// Canonical form of an already cyclically reduced word.
    fn from_reduced(w: Word, unoriented: bool) -> Self {
        let forward = least_rotated(&w);
        let letters = if unoriented {
            let backward = least_rotated(&inverse_word(&w));
            std::cmp::min(forward, backward)
        } else {
            forward
        };
        CyclicWord {
            letters,
            unoriented,
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_unoriented(&self) -> bool {
        self.unoriented
    }

    /// The class of the inverse word.
    pub fn inverse(&self) -> CyclicWord {
        CyclicWord::from_reduced(inverse_word(&self.letters), self.unoriented)
    }

    /// Returns `(root, k)` with `self = root^k` as cyclic words and `root`
    /// not a proper power of a shorter word.
    pub fn primitive_root(&self) -> (CyclicWord, usize) {
        let n = self.letters.len();
        for period in 1..=n {
            if n % period != 0 {
                continue;
            }
            if (period..n).all(|i| self.letters[i] == self.letters[i - period]) {
                let root = CyclicWord {
                    letters: self.letters[..period].to_vec(),
                    unoriented: self.unoriented,
                };
                return (root, n / period);
            }
        }
        unreachable!("a word is always a power of itself")
    }

    pub fn power(&self, k: usize) -> CyclicWord {
        let letters: Word = (0..k).flat_map(|_| self.letters.iter().copied()).collect();
        CyclicWord {
            letters,
            unoriented: self.unoriented,
        }
    }
}

/// Generator names and the relator / boundary data of one surface group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPresentation {
    signature: SurfaceSignature,
    names: Vec<String>,
    relator: Word,
    peripheral: Vec<Word>,
    relator_rotations: Vec<Word>,
}

impl GroupPresentation {
    pub fn new(signature: SurfaceSignature) -> Self {
        let g = signature.genus as usize;
        let n = signature.punctures as usize;
        let rank = signature.rank();
        let names: Vec<String> = (0..rank)
            .map(|k| {
                if k < 2 * g {
                    format!("{}{}", if k % 2 == 0 { 'a' } else { 'b' }, k / 2 + 1)
                } else {
                    format!("c{}", k - 2 * g + 1)
                }
            })
            .collect();
        // ∏[a_i,b_i] ∏ c_j
        let mut product: Word = Vec::new();
        for i in 0..g {
            let a = Letter::new(2 * i, false);
            let b = Letter::new(2 * i + 1, false);
            product.extend([a, b, a.inverse(), b.inverse()]);
        }
        let (relator, peripheral) = if n == 0 {
            (product, Vec::new())
        } else {
            let mut peripheral: Vec<Word> = (0..n - 1)
                .map(|j| vec![Letter::new(2 * g + j, false)])
                .collect();
            for j in 0..n - 1 {
                product.push(Letter::new(2 * g + j, false));
            }
            peripheral.push(inverse_word(&product));
            (Vec::new(), peripheral)
        };
        let relator_rotations = if relator.is_empty() {
            Vec::new()
        } else {
            let inv = inverse_word(&relator);
            (0..relator.len())
                .flat_map(|s| [rotate(&relator, s), rotate(&inv, s)])
                .collect()
        };
        GroupPresentation {
            signature,
            names,
            relator,
            peripheral,
            relator_rotations,
        }
    }

    pub fn signature(&self) -> SurfaceSignature {
        self.signature
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn generator_name(&self, k: usize) -> &str {
        &self.names[k]
    }

    /// Relator word; empty for punctured surfaces.
    pub fn relator(&self) -> &[Letter] {
        &self.relator
    }

    pub fn peripheral_words(&self) -> &[Word] {
        &self.peripheral
    }

    pub fn letter(&self, token: &str) -> Result<Letter> {
        let mut chars = token.chars();
        let head = chars.next().ok_or_else(|| Error::Alphabet(token.into()))?;
        let lower = head.to_ascii_lowercase();
        let index: usize = chars
            .as_str()
            .parse()
            .map_err(|_| Error::Alphabet(token.into()))?;
        let name = format!("{lower}{index}");
        let k = self
            .names
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| Error::Alphabet(token.into()))?;
        Ok(Letter::new(k, head.is_ascii_uppercase()))
    }

    /// Parses `a1 b1 A1 B1`; whitespace between letters is optional.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let mut out = Vec::new();
        let mut current = String::new();
        for ch in text.chars() {
            if ch.is_whitespace() || ch == '.' || ch == '*' {
                continue;
            }
            if ch.is_ascii_alphabetic() {
                if !current.is_empty() {
                    out.push(self.letter(&current)?);
                    current.clear();
                }
                current.push(ch);
            } else if ch.is_ascii_digit() && !current.is_empty() {
                current.push(ch);
            } else {
                return Err(Error::Alphabet(ch.to_string()));
            }
        }
        if !current.is_empty() {
            out.push(self.letter(&current)?);
        }
        Ok(out)
    }

    pub fn format_word(&self, w: &[Letter]) -> String {
        w.iter()
            .map(|l| {
                let name = &self.names[l.generator()];
                if l.is_inverse() {
                    name.to_ascii_uppercase()
                } else {
                    name.clone()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn format_cyclic(&self, w: &CyclicWord) -> String {
        self.format_word(w.letters())
    }

    fn check_alphabet(&self, w: &[Letter]) -> Result<()> {
        match w.iter().find(|l| l.generator() >= self.rank()) {
            Some(l) => Err(Error::Alphabet(format!("generator #{}", l.generator() + 1))),
            None => Ok(()),
        }
    }

    pub fn free_reduce(&self, w: &[Letter]) -> Result<Word> {
        self.check_alphabet(w)?;
        Ok(free_reduce(w))
    }

    /// Cyclic reduction followed, on closed surfaces, by Dehn's algorithm:
    /// any cyclic subword longer than half a relator is replaced by the
    /// shorter complement until none remains.
    pub fn reduce_cyclic(&self, w: &[Letter]) -> Word {
        let mut w = cyclic_reduce(w);
        if self.relator.is_empty() {
            return w;
        }
        let r = self.relator.len();
        'outer: loop {
            let n = w.len();
            if n == 0 {
                return w;
            }
            for start in 0..n {
                for rot in &self.relator_rotations {
                    let mut k = 0;
                    while k < r && k < n && w[(start + k) % n] == rot[k] {
                        k += 1;
                    }
                    if 2 * k > r {
                        // rot = s·t with s = rot[..k]; s ≡ t⁻¹
                        let replacement = inverse_word(&rot[k..]);
                        let mut next: Word = replacement;
                        next.extend((k..n).map(|i| w[(start + i) % n]));
                        w = cyclic_reduce(&next);
                        continue 'outer;
                    }
                }
            }
            return w;
        }
    }

    /// Canonical representative of the conjugacy class of `w`.
    pub fn cyclic_canonical(&self, w: &[Letter], unoriented: bool) -> Result<CyclicWord> {
        self.check_alphabet(w)?;
        let reduced = self.reduce_cyclic(w);
        if reduced.is_empty() {
            return Err(Error::TrivialClass);
        }
        Ok(CyclicWord::from_reduced(reduced, unoriented))
    }

    pub fn parse_curve(&self, text: &str) -> Result<CyclicWord> {
        self.cyclic_canonical(&self.parse_word(text)?, true)
    }

    /// True when `w` is conjugate to a power of a boundary loop.
    pub fn is_peripheral(&self, w: &CyclicWord) -> bool {
        let (root, _) = w.primitive_root();
        self.peripheral.iter().any(|p| {
            CyclicWord::from_reduced(cyclic_reduce(p), true).letters
                == CyclicWord::from_reduced(root.letters.clone(), true).letters
        })
    }

    /// Builds a curve system, merging repeated components and rejecting
    /// peripheral ones.
    pub fn system(&self, parts: Vec<(CyclicWord, f64)>) -> Result<WeightedCurveSystem> {
        let mut parts = parts;
        for (w, weight) in &parts {
            if !(weight.is_finite() && *weight > 0.0) {
                return Err(Error::CurveSystem(format!(
                    "weight {weight} of `{}` must be positive",
                    self.format_cyclic(w)
                )));
            }
            if w.is_empty() {
                return Err(Error::TrivialClass);
            }
            self.check_alphabet(w.letters())?;
            if self.is_peripheral(w) {
                return Err(Error::Peripheral(self.format_cyclic(w)));
            }
        }
        for (w, _) in parts.iter_mut() {
            if !w.unoriented {
                *w = CyclicWord::from_reduced(w.letters.clone(), true);
            }
        }
        parts.sort_by(|x, y| x.0.cmp(&y.0));
        let mut merged: Vec<(CyclicWord, f64)> = Vec::with_capacity(parts.len());
        for (w, weight) in parts {
            match merged.last_mut() {
                Some((last, total)) if *last == w => *total += weight,
                _ => merged.push((w, weight)),
            }
        }
        Ok(WeightedCurveSystem { components: merged })
    }

    /// Parses `weight:word` entries (one per line or separated by `;`).
    /// A bare word has weight 1.
    pub fn parse_system(&self, text: &str) -> Result<WeightedCurveSystem> {
        let mut parts = Vec::new();
        for entry in text.split(['\n', ';']) {
            let entry = entry.trim();
            if entry.is_empty() || entry.starts_with('#') {
                continue;
            }
            let (weight, word) = match entry.split_once(':') {
                Some((w, rest)) => (
                    w.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::CurveSystem(format!("bad weight in `{entry}`")))?,
                    rest,
                ),
                None => (1.0, entry),
            };
            parts.push((self.parse_curve(word)?, weight));
        }
        self.system(parts)
    }

    pub fn format_system(&self, s: &WeightedCurveSystem) -> String {
        s.components
            .iter()
            .map(|(w, weight)| format!("{}:{}", format_weight(*weight), self.format_cyclic(w)))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

fn format_weight(w: f64) -> String {
    if w.fract() == 0.0 && w.abs() < 1e15 {
        format!("{}", w as i64)
    } else {
        format!("{w:?}")
    }
}

/// A finite positive combination of closed curves (unoriented).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCurveSystem {
    components: Vec<(CyclicWord, f64)>,
}

impl WeightedCurveSystem {
    pub fn empty() -> Self {
        WeightedCurveSystem {
            components: Vec::new(),
        }
    }

    pub fn components(&self) -> &[(CyclicWord, f64)] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> WeightedCurveSystem {
        assert!(factor > 0.0, "scaling factor must be positive");
        WeightedCurveSystem {
            components: self
                .components
                .iter()
                .map(|(w, x)| (w.clone(), x * factor))
                .collect(),
        }
    }

    /// Total word length, used as a cheap size measure.
    pub fn total_letters(&self) -> usize {
        self.components.iter().map(|(w, _)| w.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus() -> GroupPresentation {
        GroupPresentation::new(SurfaceSignature::new(1, 1).unwrap())
    }

    #[test]
    fn signature_validation() {
        assert!(SurfaceSignature::new(0, 3).is_err());
        assert!(SurfaceSignature::new(1, 0).is_err());
        assert_eq!(SurfaceSignature::new(1, 1).unwrap().dimension(), 2);
        assert_eq!(SurfaceSignature::new(2, 0).unwrap().dimension(), 6);
        assert_eq!(SurfaceSignature::new(0, 4).unwrap().rank(), 3);
    }

    #[test]
    fn free_reduction_examples() {
        let p = torus();
        let w = p.parse_word("a1 A1 b1").unwrap();
        assert_eq!(p.free_reduce(&w).unwrap(), p.parse_word("b1").unwrap());
        assert!(p.free_reduce(&[]).unwrap().is_empty());
        let w = p.parse_word("a1 b1 B1 a1").unwrap();
        assert_eq!(p.format_word(&p.free_reduce(&w).unwrap()), "a1 a1");
        assert!(matches!(p.parse_word("a1 d1"), Err(Error::Alphabet(_))));
        assert!(matches!(p.parse_word("c1"), Err(Error::Alphabet(_))));
    }

    #[test]
    fn canonical_examples() {
        let p = torus();
        let ba = p.parse_word("b1 a1").unwrap();
        assert_eq!(p.format_cyclic(&p.cyclic_canonical(&ba, false).unwrap()), "a1 b1");
        let ab_inv = p.parse_word("A1 B1").unwrap();
        assert_eq!(
            p.format_cyclic(&p.cyclic_canonical(&ab_inv, true).unwrap()),
            "a1 b1"
        );
        assert_eq!(
            p.cyclic_canonical(&p.parse_word("a1 A1").unwrap(), true),
            Err(Error::TrivialClass)
        );
    }

    #[test]
    fn least_rotation_matches_brute_force() {
        let p = torus();
        let w = p.parse_word("b1 a1 b1 a1 a1 b1 a1").unwrap();
        let brute = (0..w.len()).map(|s| rotate(&w, s)).min().unwrap();
        assert_eq!(least_rotated(&w), brute);
    }

    #[test]
    fn peripheral_detection() {
        let p = torus();
        let c = p.parse_curve("a1 b1 A1 B1").unwrap();
        assert!(p.is_peripheral(&c));
        assert!(p.is_peripheral(&c.power(2)));
        assert!(!p.is_peripheral(&p.parse_curve("a1 b1").unwrap()));
        assert!(matches!(
            p.system(vec![(c, 1.0)]),
            Err(Error::Peripheral(_))
        ));
    }

    #[test]
    fn primitive_roots() {
        let p = torus();
        let w = p.parse_curve("a1 b1 a1 b1 a1 b1").unwrap();
        let (root, k) = w.primitive_root();
        assert_eq!(k, 3);
        assert_eq!(p.format_cyclic(&root), "a1 b1");
    }

    #[test]
    fn dehn_reduction_on_genus_two() {
        let p = GroupPresentation::new(SurfaceSignature::new(2, 0).unwrap());
        // five relator letters become `b2 a2 B2`, conjugate to `a2`
        let w = p.parse_word("a1 b1 A1 B1 a2").unwrap();
        let r = p.reduce_cyclic(&w);
        assert_eq!(p.format_word(&r), "a2");
        assert!(p
            .cyclic_canonical(p.relator(), true)
            .is_err());
    }

    #[test]
    fn system_merges_and_parses() {
        let p = torus();
        let s = p.parse_system("1:a1\n2: b1 a1 ; 0.5:A1 B1\n").unwrap();
        assert_eq!(s.components().len(), 2);
        assert_eq!(p.format_system(&s), "1:a1; 2.5:a1 b1");
        assert!(p.parse_system("-1:a1").is_err());
    }
}
