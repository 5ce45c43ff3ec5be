//! Experiment configuration: a JSON object with the fields below. Unknown
//! fields are rejected.
//!
//! ```json
//! {
//!   "surface": { "preset": "modular_torus" },
//!   "alpha": "1:a1; 1:b1",
//!   "functional": { "kind": "length" },
//!   "l_grid": [20, 40, 80],
//!   "margin": 1.25,
//!   "output_dir": "out"
//! }
//! ```
//!
//! A surface is either a preset (`modular_torus`, `genus2_regular`) or
//! `{genus, punctures, lengths, twists}` in Fenchel–Nielsen coordinates.
//! Second surfaces, systems and functionals (`surface2`, `alpha2`,
//! `functional2`) default to the first ones.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use orbitcount_core::{
    build_holonomy, FenchelNielsen, Holonomy, HomogeneousFunctional, PantsDecomposition, SurfaceSignature,
    WeightedCurveSystem,
};
use serde::{Deserialize, Serialize};

use crate::{Failure, Subcommand};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genus: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub punctures: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twists: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionalSpec {
    Length,
    Intersect { alpha: String },
    ThurstonRatio { bound: i64 },
}

fn default_margin() -> f64 {
    1.25
}
fn default_radius() -> usize {
    4
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}
fn default_every() -> u64 {
    orbitcount_core::orbit::DEFAULT_CHECKPOINT_EVERY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Intended subcommand, checked by `validate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    pub surface: SurfaceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface2: Option<SurfaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<FunctionalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional2: Option<FunctionalSpec>,
    /// Curves for `length` and `intersect`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub l_grid: Vec<f64>,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default = "default_radius")]
    pub stabilizer_radius: usize,
    /// Sublevel bound for lattice estimates of `m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure_l: Option<f64>,
    /// Coordinate bounds for `thurston-distance`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bounds: Vec<i64>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_every")]
    pub checkpoint_every: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

/// A parsed configuration with the directory relative paths resolve from.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: Config,
    pub raw: Vec<u8>,
    pub base: PathBuf,
}

impl Loaded {
    pub fn output_dir(&self) -> PathBuf {
        if self.config.output_dir.is_absolute() {
            self.config.output_dir.clone()
        } else {
            self.base.join(&self.config.output_dir)
        }
    }
}

pub fn load(path: &Path) -> Result<Loaded, Failure> {
    let raw = std::fs::read(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let config: Config = serde_json::from_slice(&raw).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { config, raw, base })
}

/// Field-level problems for `cmd`; empty when the configuration is usable.
pub fn schema_errors(c: &Config, cmd: Subcommand) -> Vec<String> {
    let mut errs = Vec::new();
    if let Some(e) = &c.experiment {
        if Subcommand::from_name(e).is_none() {
            errs.push(format!("field `experiment`: unknown experiment `{e}`"));
        }
    }
    surface_errors(&c.surface, "surface", &mut errs);
    if let Some(s) = &c.surface2 {
        surface_errors(s, "surface2", &mut errs);
    }
    let need = |ok: bool, field: &str, errs: &mut Vec<String>| {
        if !ok {
            errs.push(format!("missing field `{field}` required by `{}`", cmd.name()));
        }
    };
    match cmd {
        Subcommand::Length | Subcommand::Intersect => need(!c.curves.is_empty(), "curves", &mut errs),
        Subcommand::OrbitCount | Subcommand::Exponent => {
            need(c.alpha.is_some(), "alpha", &mut errs);
            need(!c.l_grid.is_empty(), "l_grid", &mut errs);
        }
        Subcommand::Ratio => {
            need(c.alpha.is_some(), "alpha", &mut errs);
            need(!c.l_grid.is_empty(), "l_grid", &mut errs);
            need(
                c.alpha2.is_some() || c.surface2.is_some() || c.functional2.is_some(),
                "alpha2, surface2 or functional2",
                &mut errs,
            );
            need(c.measure_l.is_some(), "measure_l", &mut errs);
        }
        Subcommand::MEstimate => {
            need(c.functional.is_some(), "functional", &mut errs);
            need(c.measure_l.is_some(), "measure_l", &mut errs);
        }
        Subcommand::ThurstonDistance => {
            need(c.surface2.is_some(), "surface2", &mut errs);
            need(!c.bounds.is_empty(), "bounds", &mut errs);
        }
        Subcommand::Validate => {}
    }
    if c.l_grid.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        errs.push("field `l_grid`: values must be positive and finite".into());
    }
    if !(c.margin >= 1.0 && c.margin.is_finite()) {
        errs.push(format!("field `margin`: {} is below 1", c.margin));
    }
    if c.measure_l.is_some_and(|l| !(l > 0.0 && l.is_finite())) {
        errs.push("field `measure_l`: must be positive".into());
    }
    if c.bounds.iter().any(|&b| b < 1) {
        errs.push("field `bounds`: values must be at least 1".into());
    }
    if c.checkpoint_every == 0 {
        errs.push("field `checkpoint_every`: must be positive".into());
    }
    if c.tolerance.is_some_and(|t| !(t > 0.0)) {
        errs.push("field `tolerance`: must be positive".into());
    }
    errs
}

fn surface_errors(s: &SurfaceSpec, field: &str, errs: &mut Vec<String>) {
    match &s.preset {
        Some(p) => {
            if !matches!(p.as_str(), "modular_torus" | "genus2_regular") {
                errs.push(format!("field `{field}.preset`: unknown preset `{p}`"));
            }
            if s.genus.is_some() || s.punctures.is_some() || s.lengths.is_some() || s.twists.is_some() {
                errs.push(format!("field `{field}`: a preset excludes explicit coordinates"));
            }
        }
        None => {
            for (name, present) in [
                ("genus", s.genus.is_some()),
                ("punctures", s.punctures.is_some()),
                ("lengths", s.lengths.is_some()),
                ("twists", s.twists.is_some()),
            ] {
                if !present {
                    errs.push(format!("missing field `{field}.{name}`"));
                }
            }
        }
    }
}

pub fn build_surface(s: &SurfaceSpec, tolerance: Option<f64>) -> Result<Holonomy, Failure> {
    let x = match &s.preset {
        Some(p) => Holonomy::preset(p).map_err(|e| Failure::Config(e.to_string()))?,
        None => {
            let missing = |f: &str| Failure::Config(format!("missing field `surface.{f}`"));
            let sig = SurfaceSignature::new(s.genus.ok_or_else(|| missing("genus"))?, s.punctures.ok_or_else(|| missing("punctures"))?)
                .map_err(|e| Failure::Config(e.to_string()))?;
            let pants = match (sig.genus, sig.punctures) {
                (1, 1) => PantsDecomposition::punctured_torus(),
                (2, 0) => PantsDecomposition::genus_two(),
                (g, n) => return Err(Failure::Config(format!("surface ({g}, {n}) has no Fenchel–Nielsen model"))),
            };
            let lengths = s.lengths.clone().ok_or_else(|| missing("lengths"))?;
            let twists = s.twists.clone().ok_or_else(|| missing("twists"))?;
            let fnc = FenchelNielsen::new(pants, lengths, twists).map_err(|e| Failure::Config(e.to_string()))?;
            build_holonomy(&fnc).map_err(|e| Failure::Runtime(e.to_string()))?
        }
    };
    Ok(match tolerance {
        Some(t) => x.with_tolerance(t),
        None => x,
    })
}

pub fn parse_system(x: &Holonomy, text: &str, field: &str) -> Result<WeightedCurveSystem, Failure> {
    x.presentation()
        .parse_system(text)
        .map_err(|e| Failure::Config(format!("field `{field}`: {e}")))
}

pub fn build_functional(x: &Arc<Holonomy>, f: Option<&FunctionalSpec>) -> Result<HomogeneousFunctional, Failure> {
    match f.unwrap_or(&FunctionalSpec::Length) {
        FunctionalSpec::Length => Ok(HomogeneousFunctional::length(x.clone())),
        FunctionalSpec::Intersect { alpha } => {
            let a = parse_system(x, alpha, "functional.alpha")?;
            HomogeneousFunctional::intersect(x.clone(), a).map_err(|e| Failure::Config(e.to_string()))
        }
        FunctionalSpec::ThurstonRatio { bound } => {
            HomogeneousFunctional::thurston_ratio(x.clone(), *bound).map_err(|e| Failure::Config(e.to_string()))
        }
    }
}
