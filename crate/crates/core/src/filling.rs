//! Filling certificate for curve systems.
//!
//! The geodesic representatives of the components form a 4-valent graph on
//! the surface. With rotation systems read off the crossing signs, tracing
//! faces gives the genus `g'` of the thickened graph with its faces capped.
//! The graph fills the closed-up surface exactly when it is connected and
//! `g' = g`; with one puncture every face is then a disk or a once-punctured
//! disk. When the test fails a disjoint simple curve is searched for.

use std::collections::HashMap;

use crate::dehn_thurston::{dt_to_system, DTCoordinates};
use crate::error::Result;
use crate::holonomy::Holonomy;
use crate::intersection::{crossings, pairing_integral};
use crate::mapping_class::twist_generators;
use crate::measure::simple_curve_lengths;
use crate::words::{CyclicWord, GroupPresentation, WeightedCurveSystem};

/// Positions closer than this along one geodesic are treated as a tie and
/// broken by crossing id.
const TIE: f64 = 1e-9;

/// A simple curve disjoint from a system.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Dt(DTCoordinates),
    Word(CyclicWord),
}

impl Witness {
    pub fn describe(&self, p: &GroupPresentation) -> String {
        match self {
            Witness::Dt(c) => match crate::dehn_thurston::dt_to_system(p, c) {
                Ok(s) => format!("simple curve {c} `{}`", p.format_cyclic(&s.components()[0].0)),
                Err(_) => format!("simple curve {c}"),
            },
            Witness::Word(w) => format!("simple curve `{}`", p.format_cyclic(w)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FillingStatus {
    Filling {
        vertices: usize,
        faces: usize,
        /// Near-coincident crossings along a geodesic that were ordered by
        /// crossing id.
        perturbations: usize,
    },
    NotFilling(Witness),
    Unknown(String),
}

impl FillingStatus {
    pub fn is_filling(&self) -> bool {
        matches!(self, FillingStatus::Filling { .. })
    }
}

struct Vertex {
    components: [usize; 2],
    positions: [f64; 2],
    sign: i8,
}

enum Certificate {
    Filling { vertices: usize, faces: usize, perturbations: usize },
    Fails,
    Untrusted(String),
}

fn certificate(x: &Holonomy, roots: &[CyclicWord]) -> Result<Certificate> {
    let sig = x.signature();
    if sig.punctures > 1 {
        return Ok(Certificate::Untrusted(
            "face test cannot tell punctures apart on surfaces with several punctures".into(),
        ));
    }
    let mut vertices = Vec::new();
    for i in 0..roots.len() {
        for j in i..roots.len() {
            for c in crossings(x, &roots[i], &roots[j])? {
                if c.exact_fallback {
                    return Ok(Certificate::Untrusted(
                        "a crossing position was resolved only combinatorially".into(),
                    ));
                }
                vertices.push(Vertex {
                    components: [i, j],
                    positions: [c.first, c.second],
                    sign: c.sign,
                });
            }
        }
    }
    let v = vertices.len();
    if v == 0 {
        return Ok(Certificate::Fails);
    }
    // half-edge id: 4·vertex + slot, slots 0/1 = first out/in, 2/3 = second out/in
    let mut incidences: Vec<Vec<(f64, usize, usize)>> = vec![Vec::new(); roots.len()];
    for (id, vx) in vertices.iter().enumerate() {
        for branch in 0..2 {
            incidences[vx.components[branch]].push((vx.positions[branch], id, branch));
        }
    }
    let mut perturbations = 0;
    let mut next_edge = vec![usize::MAX; 4 * v];
    for list in incidences.iter_mut() {
        if list.is_empty() {
            return Ok(Certificate::Fails);
        }
        list.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        for k in 0..list.len() {
            let (p, vid, br) = list[k];
            let (q, wid, bw) = list[(k + 1) % list.len()];
            if k + 1 < list.len() && (q - p).abs() < TIE {
                perturbations += 1;
            }
            let out = 4 * vid + 2 * br;
            let inn = 4 * wid + 2 * bw + 1;
            next_edge[out] = inn;
            next_edge[inn] = out;
        }
    }
    // counterclockwise rotation at each vertex
    let mut rotate = vec![0usize; 4 * v];
    for (id, vx) in vertices.iter().enumerate() {
        let b = 4 * id;
        let cycle = if vx.sign > 0 {
            [b, b + 3, b + 1, b + 2]
        } else {
            [b, b + 2, b + 1, b + 3]
        };
        for k in 0..4 {
            rotate[cycle[k]] = cycle[(k + 1) % 4];
        }
    }
    let mut seen = vec![false; 4 * v];
    let mut faces = 0;
    for start in 0..4 * v {
        if seen[start] {
            continue;
        }
        faces += 1;
        let mut h = start;
        while !seen[h] {
            seen[h] = true;
            h = rotate[next_edge[h]];
        }
    }
    // connectivity of the components through crossings
    let mut parent: Vec<usize> = (0..roots.len()).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for vx in &vertices {
        let (a, b) = (find(&mut parent, vx.components[0]), find(&mut parent, vx.components[1]));
        parent[a] = b;
    }
    let root = find(&mut parent, 0);
    let connected = (0..roots.len()).all(|i| find(&mut parent, i) == root);
    // χ = V - E + F with E = 2V
    let chi = faces as i64 - v as i64;
    let genus = (2 - chi) / 2;
    if connected && (2 - chi) % 2 == 0 && genus == sig.genus as i64 {
        Ok(Certificate::Filling {
            vertices: v,
            faces,
            perturbations,
        })
    } else {
        Ok(Certificate::Fails)
    }
}

/// Looks for a simple curve `c` with `pairing(s, c) = 0`: coordinates of
/// norm `≤ bound` on the punctured torus, images of the pants curves under
/// short twist words otherwise.
fn find_witness(x: &Holonomy, s: &WeightedCurveSystem, bound: i64) -> Result<Option<Witness>> {
    let p = x.presentation();
    let sig = x.signature();
    if (sig.genus, sig.punctures) == (1, 1) {
        for (c, _) in simple_curve_lengths(x, bound)? {
            let sys = dt_to_system(p, &c)?;
            if pairing_integral(x, s, &sys)? == 0 {
                return Ok(Some(Witness::Dt(c)));
            }
        }
        return Ok(None);
    }
    let group = match twist_generators(sig) {
        Ok(g) => g,
        Err(_) => return Ok(None),
    };
    let mut seeds: Vec<CyclicWord> = Vec::new();
    for text in ["a1", "b1", "a1 b1 A1 B1"] {
        if let Ok(c) = p.parse_curve(text) {
            if !p.is_peripheral(&c) {
                seeds.push(c);
            }
        }
    }
    let mut maps = vec![group.identity()];
    let gens = group.generators();
    for _ in 0..bound.clamp(0, 2) {
        let mut next = Vec::new();
        for phi in &maps {
            for g in &gens {
                next.push(group.compose(g, phi));
            }
        }
        maps.extend(next);
    }
    let mut tried: HashMap<CyclicWord, ()> = HashMap::new();
    for phi in &maps {
        for seed in &seeds {
            let c = group.apply_curve(phi, seed);
            if tried.insert(c.clone(), ()).is_some() {
                continue;
            }
            let sys = p.system(vec![(c.clone(), 1.0)])?;
            if pairing_integral(x, s, &sys)? == 0 {
                return Ok(Some(Witness::Word(c)));
            }
        }
    }
    Ok(None)
}

/// Decides whether `s` fills, with a certificate or a disjoint simple curve.
pub fn is_filling(x: &Holonomy, s: &WeightedCurveSystem, simple_bound: i64) -> Result<FillingStatus> {
    let mut roots: Vec<CyclicWord> = Vec::new();
    for (c, _) in s.components() {
        let (r, _) = c.primitive_root();
        if !roots.iter().any(|q| *q == r || *q == r.inverse()) {
            roots.push(r);
        }
    }
    let reason = if roots.is_empty() {
        "empty system".to_string()
    } else {
        match certificate(x, &roots)? {
            Certificate::Filling {
                vertices,
                faces,
                perturbations,
            } => {
                return Ok(FillingStatus::Filling {
                    vertices,
                    faces,
                    perturbations,
                })
            }
            Certificate::Fails => "complementary regions are not all disks".to_string(),
            Certificate::Untrusted(r) => r,
        }
    };
    match find_witness(x, s, simple_bound)? {
        Some(w) => Ok(FillingStatus::NotFilling(w)),
        None => Ok(FillingStatus::Unknown(format!(
            "{reason}; no disjoint simple curve found up to bound {simple_bound}"
        ))),
    }
}
