//! Mapping-class orbits of a filling system under a functional budget.
//!
//! The search visits `φ(α)` for words `φ` in the twist generators. A node
//! is expanded when its value is at most the search bound `B`; the visited
//! set is the connected component of `α` inside `{F ≤ B}` together with the
//! neighbours of that component, which does not depend on the order of
//! expansion. Batches are formed from the lowest-value unexpanded nodes,
//! expanded in parallel and merged in a fixed order, so node ids and
//! checkpoints are identical for any number of worker threads.
//!
//! The recorded adjacency lets one search at bound `B` answer every count
//! at a smaller bound `B' ≤ B` by replaying the restricted closure.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filling::{is_filling, FillingStatus};
use crate::holonomy::{build_holonomy, FenchelNielsen, Holonomy};
use crate::mapping_class::{twist_generators, MappingClass, MappingClassGroup};
use crate::measure::{HomogeneousFunctional, FILLING_CHECK_BOUND};
use crate::words::{GroupPresentation, WeightedCurveSystem};

pub const CHECKPOINT_HEADER: &str = "# orbitcount-checkpoint v1";
pub const DEFAULT_CHECKPOINT_EVERY: u64 = 100_000;
const BATCH: usize = 512;

/// One orbit point `φ(α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitNode {
    pub system: WeightedCurveSystem,
    pub value: f64,
    pub depth: u32,
    /// Factorization of `φ` into twist generators, rightmost applied first.
    pub witness: Vec<(usize, i32)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrontierStats {
    pub visited: u64,
    pub expanded: u64,
    pub max_depth: u32,
    /// Largest value among nodes admitted to the count.
    pub max_counted_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    pub l: f64,
    pub count_orbit: u64,
    /// `count_orbit × stabilizer_order`, counted modulo mapping classes
    /// acting trivially on curves; `None` when the stabilizer is unknown.
    pub count_group: Option<u64>,
    pub stabilizer_order: u64,
    pub stabilizer_certified: bool,
    pub margin: f64,
    pub saturated: bool,
    pub stats: FrontierStats,
}

/// Options controlling one search.
#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub checkpoint_path: Option<PathBuf>,
    pub checkpoint_every: u64,
    /// Stop (after writing a checkpoint) once this many nodes are visited.
    pub node_budget: Option<usize>,
    /// Opaque identifier of the run configuration, stored in checkpoints.
    pub config_hash: String,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            checkpoint_path: None,
            checkpoint_every: DEFAULT_CHECKPOINT_EVERY,
            node_budget: None,
            config_hash: String::new(),
        }
    }
}

#[derive(Debug, Clone)]
struct StoredNode {
    system: WeightedCurveSystem,
    value: f64,
    depth: u32,
    parent: Option<(u32, u16)>,
    expanded: bool,
    children: Vec<u32>,
}

/// How orbit points are identified.
#[derive(Debug, Clone)]
enum Dedupe {
    /// Canonical words are unique in a free group.
    Exact,
    /// Closed surfaces: lengths under two fixed generic structures.
    Fingerprint(Arc<Holonomy>, Arc<Holonomy>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Exact(Vec<(Vec<i8>, u64)>),
    Cell(i64, i64),
}

type Fingerprint = Vec<(f64, f64, f64)>;

fn fingerprint(s: &WeightedCurveSystem, x1: &Holonomy, x2: &Holonomy) -> Result<Fingerprint> {
    let mut fp = Vec::with_capacity(s.components().len());
    for (c, w) in s.components() {
        fp.push((*w, x1.geodesic_length(c)?, x2.geodesic_length(c)?));
    }
    fp.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    Ok(fp)
}

fn fingerprint_cell(fp: &Fingerprint) -> (i64, i64) {
    let s1: f64 = fp.iter().map(|(w, a, _)| w * a).sum();
    let s2: f64 = fp.iter().map(|(w, _, b)| w * b).sum();
    ((s1.ln() * 1e7).floor() as i64, (s2.ln() * 1e7).floor() as i64)
}

fn same_fingerprint(a: &Fingerprint, b: &Fingerprint) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.0 == y.0 && (x.1 - y.1).abs() <= 1e-8 * x.1.max(1.0) && (x.2 - y.2).abs() <= 1e-8 * x.2.max(1.0)
        })
}

/// Two fixed structures used for fingerprints on closed surfaces. Their
/// parameters are arbitrary but pinned so that checkpoints stay valid.
fn fingerprint_structures(sig_genus: u32) -> Result<(Arc<Holonomy>, Arc<Holonomy>)> {
    if sig_genus != 2 {
        return Err(Error::Unsupported {
            genus: sig_genus,
            punctures: 0,
            what: "orbit fingerprints",
        });
    }
    let x1 = build_holonomy(&FenchelNielsen::genus_two([1.37, 1.91, 1.53], [0.29, -0.43, 0.71])?)?;
    let x2 = build_holonomy(&FenchelNielsen::genus_two([2.11, 1.23, 1.67], [-0.61, 0.37, 0.19])?)?;
    Ok((Arc::new(x1), Arc::new(x2)))
}

/// Visited-set index.
struct Index {
    mode: Dedupe,
    exact: HashMap<Key, u32>,
    cells: HashMap<(i64, i64), Vec<(u32, Fingerprint)>>,
}

enum Lookup {
    Found(u32),
    Missing(Key, Option<Fingerprint>),
}

impl Index {
    fn new(mode: Dedupe) -> Self {
        Index {
            mode,
            exact: HashMap::new(),
            cells: HashMap::new(),
        }
    }

    fn key(&self, s: &WeightedCurveSystem) -> Result<(Key, Option<Fingerprint>)> {
        match &self.mode {
            Dedupe::Exact => Ok((
                Key::Exact(
                    s.components()
                        .iter()
                        .map(|(c, w)| (c.letters().iter().map(|l| l.code()).collect(), w.to_bits()))
                        .collect(),
                ),
                None,
            )),
            Dedupe::Fingerprint(x1, x2) => {
                let fp = fingerprint(s, x1, x2)?;
                let (a, b) = fingerprint_cell(&fp);
                Ok((Key::Cell(a, b), Some(fp)))
            }
        }
    }

    fn lookup(&self, key: Key, fp: Option<Fingerprint>) -> Lookup {
        match (&key, &fp) {
            (Key::Cell(a, b), Some(f)) => {
                for da in -1..=1 {
                    for db in -1..=1 {
                        if let Some(list) = self.cells.get(&(a + da, b + db)) {
                            for (id, g) in list {
                                if same_fingerprint(f, g) {
                                    return Lookup::Found(*id);
                                }
                            }
                        }
                    }
                }
                Lookup::Missing(key, fp)
            }
            _ => match self.exact.get(&key) {
                Some(&id) => Lookup::Found(id),
                None => Lookup::Missing(key, fp),
            },
        }
    }

    fn insert(&mut self, key: Key, fp: Option<Fingerprint>, id: u32) {
        match (key, fp) {
            (Key::Cell(a, b), Some(f)) => self.cells.entry((a, b)).or_default().push((id, f)),
            (key, _) => {
                self.exact.insert(key, id);
            }
        }
    }
}

/// The explored part of an orbit at a given search bound.
pub struct SearchState {
    nodes: Vec<StoredNode>,
    index: Index,
    bound: f64,
    expansions: u64,
    complete: bool,
}

impl SearchState {
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn visited(&self) -> usize {
        self.nodes.len()
    }

    pub fn expansions(&self) -> u64 {
        self.expansions
    }

    /// Node `id` with its generator path from the root.
    pub fn node(&self, id: usize, generators: &[MappingClass]) -> OrbitNode {
        let n = &self.nodes[id];
        let mut witness = Vec::new();
        let mut cur = id;
        while let Some((p, g)) = self.nodes[cur].parent {
            witness.extend_from_slice(generators[g as usize].factorization());
            cur = p as usize;
        }
        OrbitNode {
            system: n.system.clone(),
            value: n.value,
            depth: n.depth,
            witness,
        }
    }

    /// Ids of the nodes with value `≤ l` in the closure at bound
    /// `expand_bound` (which must not exceed the search bound).
    pub fn counted(&self, l: f64, expand_bound: f64) -> Vec<usize> {
        assert!(expand_bound <= self.bound, "replay bound exceeds search bound");
        let mut seen = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        if self.nodes.is_empty() {
            return out;
        }
        seen[0] = true;
        queue.push_back(0usize);
        while let Some(id) = queue.pop_front() {
            let n = &self.nodes[id];
            if n.value <= l {
                out.push(id);
            }
            if n.value <= expand_bound {
                for &c in &n.children {
                    if !seen[c as usize] {
                        seen[c as usize] = true;
                        queue.push_back(c as usize);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn stats_for(&self, counted: &[usize]) -> FrontierStats {
        FrontierStats {
            visited: self.nodes.len() as u64,
            expanded: self.expansions,
            max_depth: counted.iter().map(|&i| self.nodes[i].depth).max().unwrap_or(0),
            max_counted_value: counted.iter().map(|&i| self.nodes[i].value).fold(0.0, f64::max),
        }
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|n| n.value)
    }
}

/// Orbit counting problem: a filling system, a functional and the twist
/// generators of its surface.
pub struct OrbitCounter {
    group: Arc<MappingClassGroup>,
    generators: Vec<MappingClass>,
    functional: HomogeneousFunctional,
    alpha: WeightedCurveSystem,
    dedupe: Dedupe,
}

impl OrbitCounter {
    /// Rejects `α` unless it is certified filling.
    pub fn new(alpha: WeightedCurveSystem, functional: HomogeneousFunctional) -> Result<Self> {
        let x = functional.holonomy();
        match is_filling(x, &alpha, FILLING_CHECK_BOUND)? {
            FillingStatus::Filling { .. } => {}
            FillingStatus::NotFilling(_) => return Err(Error::NotFilling),
            FillingStatus::Unknown(reason) => {
                return Err(Error::NotPositive(format!("filling not certified: {reason}")))
            }
        }
        let sig = x.signature();
        let group = Arc::new(twist_generators(sig)?);
        let dedupe = if sig.is_closed() {
            let (a, b) = fingerprint_structures(sig.genus)?;
            Dedupe::Fingerprint(a, b)
        } else {
            Dedupe::Exact
        };
        Ok(OrbitCounter {
            generators: group.generators(),
            group,
            functional,
            alpha,
            dedupe,
        })
    }

    pub fn group(&self) -> &MappingClassGroup {
        &self.group
    }

    pub fn generators(&self) -> &[MappingClass] {
        &self.generators
    }

    pub fn alpha(&self) -> &WeightedCurveSystem {
        &self.alpha
    }

    pub fn functional(&self) -> &HomogeneousFunctional {
        &self.functional
    }

    pub fn presentation(&self) -> &GroupPresentation {
        self.group.presentation()
    }

    fn fresh_state(&self, bound: f64) -> Result<SearchState> {
        let mut index = Index::new(self.dedupe.clone());
        let (key, fp) = index.key(&self.alpha)?;
        index.insert(key, fp, 0);
        let root = StoredNode {
            system: self.alpha.clone(),
            value: self.functional.evaluate(&self.alpha)?,
            depth: 0,
            parent: None,
            expanded: false,
            children: Vec::new(),
        };
        Ok(SearchState {
            nodes: vec![root],
            index,
            bound,
            expansions: 0,
            complete: false,
        })
    }

    /// Runs (or continues) the closure search at `bound`.
    pub fn explore(&self, bound: f64, opts: &SearchOptions, resume: Option<SearchState>) -> Result<SearchState> {
        let mut state = match resume {
            Some(s) => {
                if s.bound != bound {
                    return Err(Error::Checkpoint(format!(
                        "checkpoint was taken at bound {} but {} was requested",
                        s.bound, bound
                    )));
                }
                s
            }
            None => self.fresh_state(bound)?,
        };
        let mut queue: BTreeSet<(u64, u32)> = state
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| !n.expanded && n.value <= bound)
            .map(|(i, n)| (n.value.to_bits(), i as u32))
            .collect();
        let mut since_checkpoint = 0u64;
        while !queue.is_empty() {
            let batch: Vec<u32> = (0..BATCH).map_while(|_| queue.pop_first().map(|(_, id)| id)).collect();
            let expanded: Vec<Result<Vec<(u16, WeightedCurveSystem, f64)>>> = batch
                .par_iter()
                .map(|&id| {
                    let s = &state.nodes[id as usize].system;
                    self.generators
                        .iter()
                        .enumerate()
                        .map(|(g, phi)| {
                            let child = self.group.apply_system(phi, s);
                            let v = self.functional.evaluate(&child)?;
                            Ok((g as u16, child, v))
                        })
                        .collect()
                })
                .collect();
            let keyed: Vec<Result<Vec<(u16, WeightedCurveSystem, f64, Key, Option<Fingerprint>)>>> = expanded
                .into_par_iter()
                .map(|r| {
                    r?.into_iter()
                        .map(|(g, s, v)| {
                            let (k, fp) = state.index.key(&s)?;
                            Ok((g, s, v, k, fp))
                        })
                        .collect()
                })
                .collect();
            for (&id, children) in batch.iter().zip(keyed) {
                let depth = state.nodes[id as usize].depth + 1;
                let mut ids = Vec::with_capacity(self.generators.len());
                for (g, system, value, key, fp) in children? {
                    let cid = match state.index.lookup(key, fp) {
                        Lookup::Found(c) => c,
                        Lookup::Missing(key, fp) => {
                            let c = state.nodes.len() as u32;
                            state.index.insert(key, fp, c);
                            state.nodes.push(StoredNode {
                                system,
                                value,
                                depth,
                                parent: Some((id, g)),
                                expanded: false,
                                children: Vec::new(),
                            });
                            if value <= bound {
                                queue.insert((value.to_bits(), c));
                            }
                            c
                        }
                    };
                    ids.push(cid);
                }
                let node = &mut state.nodes[id as usize];
                node.children = ids;
                node.expanded = true;
            }
            state.expansions += batch.len() as u64;
            since_checkpoint += batch.len() as u64;
            let over_budget = opts.node_budget.is_some_and(|b| state.nodes.len() >= b);
            if since_checkpoint >= opts.checkpoint_every || over_budget {
                if let Some(path) = &opts.checkpoint_path {
                    write_checkpoint(&state, self.presentation(), &opts.config_hash, path)?;
                }
                since_checkpoint = 0;
            }
            if over_budget && !queue.is_empty() {
                return Ok(state);
            }
        }
        state.complete = true;
        if let Some(path) = &opts.checkpoint_path {
            write_checkpoint(&state, self.presentation(), &opts.config_hash, path)?;
        }
        Ok(state)
    }

    /// `count_sublevel` at one `L`: the search runs at `2M·L` and both the
    /// `M` and `2M` closures are replayed from it.
    pub fn count_sublevel(&self, l: f64, margin: f64, stabilizer: (u64, bool), opts: &SearchOptions) -> Result<CountRecord> {
        Ok(self.count_grid(&[l], margin, stabilizer, opts, None)?.remove(0))
    }

    /// Counts for every `L` in `grid` from a single search at
    /// `2M·max(grid)`.
    pub fn count_grid(
        &self,
        grid: &[f64],
        margin: f64,
        stabilizer: (u64, bool),
        opts: &SearchOptions,
        resume: Option<SearchState>,
    ) -> Result<Vec<CountRecord>> {
        if !(margin >= 1.0) {
            return Err(Error::NotPositive(format!("margin {margin} is below 1")));
        }
        let l_max = grid.iter().copied().fold(0.0, f64::max);
        let state = self.explore(2.0 * margin * l_max, opts, resume)?;
        Ok(records_from(&state, grid, margin, stabilizer))
    }
}

/// Count records for `grid` from an explored state. Incomplete states give
/// unsaturated records.
pub fn records_from(state: &SearchState, grid: &[f64], margin: f64, stabilizer: (u64, bool)) -> Vec<CountRecord> {
    grid.iter()
        .map(|&l| {
            let at_m = state.counted(l, (margin * l).min(state.bound));
            let at_2m = state.counted(l, (2.0 * margin * l).min(state.bound));
            let count = at_m.len() as u64;
            let (order, certified) = stabilizer;
            CountRecord {
                l,
                count_orbit: count,
                count_group: certified.then_some(count * order),
                stabilizer_order: order,
                stabilizer_certified: certified,
                margin,
                saturated: state.complete && at_m.len() == at_2m.len(),
                stats: state.stats_for(&at_m),
            }
        })
        .collect()
}

fn write_checkpoint(state: &SearchState, p: &GroupPresentation, config_hash: &str, path: &Path) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let file = fs::File::create(&tmp)?;
        let mut w = BufWriter::new(file);
        writeln!(w, "{CHECKPOINT_HEADER}")?;
        writeln!(w, "config {config_hash}")?;
        writeln!(w, "bound {:016x}", state.bound.to_bits())?;
        writeln!(w, "expansions {}", state.expansions)?;
        writeln!(w, "nodes {}", state.nodes.len())?;
        for (id, n) in state.nodes.iter().enumerate() {
            let parent = match n.parent {
                Some((p, g)) => format!("{p} {g}"),
                None => "- -".into(),
            };
            let children = if n.children.is_empty() {
                "-".to_string()
            } else {
                n.children.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
            };
            writeln!(
                w,
                "{id} {parent} {} {:016x} {} {children} {}",
                n.depth,
                n.value.to_bits(),
                u8::from(n.expanded),
                p.format_system(&n.system)
            )?;
        }
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

impl OrbitCounter {
    /// Reads a checkpoint written by a search of this counter.
    pub fn load_checkpoint(&self, path: &Path, config_hash: &str) -> Result<SearchState> {
        let bad = |msg: String| Error::Checkpoint(format!("{}: {msg}", path.display()));
        let file = fs::File::open(path)?;
        let mut lines = BufReader::new(file).lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Checkpoint(format!("{}: truncated", path.display())))?
                .map_err(Error::from)
        };
        let header = next()?;
        if header != CHECKPOINT_HEADER {
            return Err(bad(format!("unknown header `{header}`")));
        }
        let field = |line: String, name: &str| -> Result<String> {
            line.strip_prefix(name)
                .and_then(|r| r.strip_prefix(' ').or(Some(r)))
                .map(|s| s.to_string())
                .ok_or_else(|| Error::Checkpoint(format!("expected `{name}`, found `{line}`")))
        };
        let hash = field(next()?, "config")?;
        if hash != config_hash {
            return Err(bad(format!("written for configuration {hash}, not {config_hash}")));
        }
        let hex = |s: &str| u64::from_str_radix(s, 16).map_err(|e| Error::Checkpoint(format!("`{s}`: {e}")));
        let bound = f64::from_bits(hex(&field(next()?, "bound")?)?);
        let expansions: u64 = field(next()?, "expansions")?
            .parse()
            .map_err(|e| bad(format!("expansions: {e}")))?;
        let count: usize = field(next()?, "nodes")?
            .parse()
            .map_err(|e| bad(format!("nodes: {e}")))?;
        let p = self.presentation();
        let mut index = Index::new(self.dedupe.clone());
        let mut nodes = Vec::with_capacity(count);
        for expected in 0..count {
            let line = next()?;
            let mut parts = line.splitn(8, ' ');
            let mut take = |what: &str| {
                parts
                    .next()
                    .map(|s| s.to_string())
                    .ok_or_else(|| Error::Checkpoint(format!("node {expected}: missing {what}")))
            };
            let num = |s: String, what: &str| -> Result<u64> {
                s.parse::<u64>().map_err(|e| Error::Checkpoint(format!("node {expected}: {what}: {e}")))
            };
            let id = num(take("id")?, "id")?;
            if id != expected as u64 {
                return Err(bad(format!("node {expected} out of order")));
            }
            let (ps, gs) = (take("parent")?, take("generator")?);
            let parent = if ps == "-" {
                None
            } else {
                Some((num(ps, "parent")? as u32, num(gs, "generator")? as u16))
            };
            let depth = num(take("depth")?, "depth")? as u32;
            let value = f64::from_bits(hex(&take("value")?)?);
            let expanded = take("expanded")? == "1";
            let cs = take("children")?;
            let children = if cs == "-" {
                Vec::new()
            } else {
                cs.split(',').map(|c| num(c.to_string(), "child").map(|v| v as u32)).collect::<Result<_>>()?
            };
            let system = p.parse_system(&take("system")?)?;
            let (key, fp) = index.key(&system)?;
            index.insert(key, fp, expected as u32);
            nodes.push(StoredNode {
                system,
                value,
                depth,
                parent,
                expanded,
                children,
            });
        }
        Ok(SearchState {
            nodes,
            index,
            bound,
            expansions,
            complete: false,
        })
    }
}

/// Probe curves that separate mapping classes modulo the centre.
fn probe_curves(p: &GroupPresentation) -> Vec<WeightedCurveSystem> {
    let texts: &[&str] = match (p.signature().genus, p.signature().punctures) {
        (1, 1) => &["a1", "b1", "a1 b1"],
        _ => &[
            "a1", "b1", "a2", "b2", "a1 a2", "a1 b1", "a2 b2", "a1 b2", "b1 a2", "a1 b1 A1 B1", "b1 b2",
        ],
    };
    texts
        .iter()
        .filter_map(|t| p.parse_curve(t).ok())
        .filter(|c| !p.is_peripheral(c))
        .filter_map(|c| p.system(vec![(c, 1.0)]).ok())
        .collect()
}

impl OrbitCounter {
    fn action_key(&self, phi: &MappingClass, probes: &[WeightedCurveSystem], index: &Index) -> Result<Vec<Key>> {
        probes
            .iter()
            .map(|s| {
                let (k, fp) = index.key(&self.group.apply_system(phi, s))?;
                Ok(match fp {
                    // fingerprints compare by cell; fine-grained enough for probes
                    Some(f) => {
                        let (a, b) = fingerprint_cell(&f);
                        Key::Cell(a / 10, b / 10)
                    }
                    None => k,
                })
            })
            .collect()
    }

    /// Mapping classes (modulo those acting trivially on curves) fixing
    /// `α`, found among twist words of length `≤ radius`. Certified when the
    /// elements found are closed under composition.
    pub fn stabilizer_order(&self, radius: usize) -> Result<(u64, bool)> {
        let index = Index::new(self.dedupe.clone());
        let probes = probe_curves(self.presentation());
        let (alpha_key, alpha_fp) = index.key(&self.alpha)?;
        let fixes = |phi: &MappingClass| -> Result<bool> {
            let image = self.group.apply_system(phi, &self.alpha);
            let (k, fp) = index.key(&image)?;
            Ok(match (&fp, &alpha_fp) {
                (Some(a), Some(b)) => same_fingerprint(a, b),
                _ => k == alpha_key,
            })
        };
        let mut seen: HashMap<Vec<Key>, MappingClass> = HashMap::new();
        let id = self.group.identity();
        seen.insert(self.action_key(&id, &probes, &index)?, id.clone());
        let mut frontier = vec![id];
        let mut stabilizer: Vec<MappingClass> = vec![self.group.identity()];
        for _ in 0..radius {
            let mut next = Vec::new();
            for phi in &frontier {
                for g in &self.generators {
                    let psi = self.group.compose(g, phi);
                    let key = self.action_key(&psi, &probes, &index)?;
                    if seen.contains_key(&key) {
                        continue;
                    }
                    seen.insert(key, psi.clone());
                    if fixes(&psi)? {
                        stabilizer.push(psi.clone());
                    }
                    next.push(psi);
                }
            }
            frontier = next;
        }
        let keys: Vec<Vec<Key>> = stabilizer
            .iter()
            .map(|s| self.action_key(s, &probes, &index))
            .collect::<Result<_>>()?;
        let mut closed = true;
        'outer: for a in &stabilizer {
            for b in &stabilizer {
                let k = self.action_key(&self.group.compose(a, b), &probes, &index)?;
                if !keys.contains(&k) {
                    closed = false;
                    break 'outer;
                }
            }
        }
        Ok((stabilizer.len() as u64, closed))
    }
}
