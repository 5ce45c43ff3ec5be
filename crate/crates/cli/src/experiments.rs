use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use orbitcount_core::orbit::records_from;
use orbitcount_core::report::{count_table, CsvTable};
use orbitcount_core::{
    estimate_m, fit_exponent, geometric_intersection, is_filling, ratio_experiment, self_intersection,
    thurston_distance, CountRecord, FillingStatus, Holonomy, HomogeneousFunctional, OrbitCounter, PantsDecomposition,
    SearchOptions,
};
use serde_json::{json, Value};

use crate::config::{build_functional, build_surface, load, parse_system, schema_errors, Loaded};
use crate::manifest::{problem_hash, Manifest};
use crate::{Failure, Invocation, Subcommand, THREADS_ENV};

/// Artifacts written by one run and a short human-readable summary.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
}

struct Context<'a> {
    loaded: &'a Loaded,
    out: PathBuf,
    tolerance: Option<f64>,
    resume: Option<&'a Path>,
}

impl Context<'_> {
    fn surface(&self) -> Result<Arc<Holonomy>, Failure> {
        Ok(Arc::new(build_surface(&self.loaded.config.surface, self.tolerance)?))
    }

    fn surface2(&self) -> Result<Arc<Holonomy>, Failure> {
        match &self.loaded.config.surface2 {
            Some(s) => Ok(Arc::new(build_surface(s, self.tolerance)?)),
            None => self.surface(),
        }
    }

    fn write(&self, name: &str, text: &str, artifacts: &mut Vec<PathBuf>) -> Result<(), Failure> {
        let path = self.out.join(name);
        std::fs::write(&path, text)?;
        artifacts.push(path);
        Ok(())
    }

    fn write_json(&self, name: &str, v: &Value, artifacts: &mut Vec<PathBuf>) -> Result<(), Failure> {
        self.write(name, &(serde_json::to_string_pretty(v).expect("json") + "\n"), artifacts)
    }
}

fn pants_for(x: &Holonomy) -> Result<PantsDecomposition, Failure> {
    let s = x.signature();
    match (s.genus, s.punctures) {
        (1, 1) => Ok(PantsDecomposition::punctured_torus()),
        (2, 0) => Ok(PantsDecomposition::genus_two()),
        (g, n) => Err(Failure::Config(format!("no pants decomposition for ({g}, {n})"))),
    }
}

/// Worker count from the flag, then the environment, then all cores.
pub fn resolve_threads(flag: Option<usize>) -> Result<usize, Failure> {
    if let Some(n) = flag {
        return if n > 0 { Ok(n) } else { Err(Failure::Config("--threads must be positive".into())) };
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::Config(format!("{THREADS_ENV}=`{v}` is not a positive integer"))),
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

/// Runs the experiment named by `inv.command` and writes its manifest.
pub fn run(inv: &Invocation) -> Result<Outcome, Failure> {
    if inv.command == Subcommand::Validate {
        let report = validate(&inv.config)?;
        return Ok(Outcome {
            artifacts: Vec::new(),
            summary: report,
        });
    }
    let started = Instant::now();
    let loaded = load(&inv.config)?;
    let errs = schema_errors(&loaded.config, inv.command);
    if !errs.is_empty() {
        return Err(Failure::Config(errs.join("; ")));
    }
    if inv.resume.is_some() && !matches!(inv.command, Subcommand::OrbitCount | Subcommand::Exponent) {
        return Err(Failure::Config(format!("--resume is not supported by `{}`", inv.command.name())));
    }
    let threads = resolve_threads(inv.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    let out = loaded.output_dir();
    std::fs::create_dir_all(&out)?;
    let ctx = Context {
        loaded: &loaded,
        out: out.clone(),
        tolerance: inv.tolerance.or(loaded.config.tolerance),
        resume: inv.resume.as_deref(),
    };
    let mut artifacts = Vec::new();
    let summary = pool.install(|| match inv.command {
        Subcommand::Length => lengths(&ctx, &mut artifacts),
        Subcommand::Intersect => intersections(&ctx, &mut artifacts),
        Subcommand::OrbitCount => orbit_count(&ctx, &mut artifacts).map(|(s, _)| s),
        Subcommand::Exponent => exponent(&ctx, &mut artifacts),
        Subcommand::MEstimate => m_estimate(&ctx, &mut artifacts),
        Subcommand::Ratio => ratio(&ctx, &mut artifacts),
        Subcommand::ThurstonDistance => distance(&ctx, &mut artifacts),
        Subcommand::Validate => unreachable!(),
    })?;
    let manifest = Manifest {
        command: inv.command.name(),
        config: &loaded.config,
        raw_config: &loaded.raw,
        threads,
        resumed_from: inv.resume.as_deref(),
        artifacts: &artifacts,
        runtime: started.elapsed(),
    };
    artifacts.push(manifest.write(&out)?);
    Ok(Outcome { artifacts, summary })
}

fn lengths(ctx: &Context, artifacts: &mut Vec<PathBuf>) -> Result<String, Failure> {
    let x = ctx.surface()?;
    let p = x.presentation();
    let mut rows = Vec::new();
    for text in &ctx.loaded.config.curves {
        let c = p.parse_curve(text).map_err(|e| Failure::Config(format!("field `curves`: {e}")))?;
        let l = x.geodesic_length(&c).map_err(|e| Failure::Runtime(format!("`{text}`: {e}")))?;
        rows.push(json!({ "curve": p.format_cyclic(&c), "length": l, "trace": x.trace(c.letters()) }));
    }
    let n = rows.len();
    ctx.write_json("lengths.json", &json!({ "curves": rows }), artifacts)?;
    Ok(format!("{n} lengths"))
}

fn intersections(ctx: &Context, artifacts: &mut Vec<PathBuf>) -> Result<String, Failure> {
    let x = ctx.surface()?;
    let p = x.presentation();
    let curves = ctx
        .loaded
        .config
        .curves
        .iter()
        .map(|t| p.parse_curve(t).map_err(|e| Failure::Config(format!("field `curves`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut matrix = Vec::new();
    for u in &curves {
        let mut row = Vec::new();
        for v in &curves {
            row.push(geometric_intersection(&x, u, v)?);
        }
        matrix.push(row);
    }
    let selfs = curves.iter().map(|c| self_intersection(&x, c)).collect::<Result<Vec<_>, _>>()?;
    let names: Vec<String> = curves.iter().map(|c| p.format_cyclic(c)).collect();
    ctx.write_json(
        "intersections.json",
        &json!({ "curves": names, "intersection": matrix, "self_intersection": selfs }),
        artifacts,
    )?;
    Ok(format!("{}×{} intersection matrix", curves.len(), curves.len()))
}

fn counter(x: &Arc<Holonomy>, alpha: &str, field: &str, f: HomogeneousFunctional) -> Result<OrbitCounter, Failure> {
    let a = parse_system(x, alpha, field)?;
    OrbitCounter::new(a, f).map_err(|e| match e {
        orbitcount_core::Error::NotFilling | orbitcount_core::Error::NotPositive(_) => {
            Failure::Config(format!("field `{field}`: {e}"))
        }
        other => Failure::Runtime(other.to_string()),
    })
}

fn record_json(r: &CountRecord) -> Value {
    json!({
        "L": r.l,
        "count_orbit": r.count_orbit,
        "count_group": r.count_group,
        "stabilizer_order": r.stabilizer_order,
        "stabilizer_certified": r.stabilizer_certified,
        "margin": r.margin,
        "saturated": r.saturated,
        "frontier": {
            "visited": r.stats.visited,
            "expanded": r.stats.expanded,
            "max_depth": r.stats.max_depth,
            "max_counted_value": r.stats.max_counted_value,
        },
    })
}

fn orbit_count(ctx: &Context, artifacts: &mut Vec<PathBuf>) -> Result<(String, Vec<CountRecord>), Failure> {
    let c = &ctx.loaded.config;
    let x = ctx.surface()?;
    let f = build_functional(&x, c.functional.as_ref())?;
    let oc = counter(&x, c.alpha.as_deref().unwrap_or_default(), "alpha", f)?;
    let stabilizer = oc.stabilizer_order(c.stabilizer_radius)?;
    let hash = problem_hash(c);
    let opts = SearchOptions {
        checkpoint_path: Some(ctx.out.join("orbit.ckpt")),
        checkpoint_every: c.checkpoint_every,
        node_budget: c.node_budget,
        config_hash: hash.clone(),
    };
    let state = match ctx.resume {
        Some(path) => Some(oc.load_checkpoint(path, &hash).map_err(|e| Failure::Config(e.to_string()))?),
        None => None,
    };
    let l_max = c.l_grid.iter().copied().fold(0.0, f64::max);
    let explored = oc.explore(2.0 * c.margin * l_max, &opts, state)?;
    artifacts.push(ctx.out.join("orbit.ckpt"));
    let records = records_from(&explored, &c.l_grid, c.margin, stabilizer);
    ctx.write("counts.csv", &count_table("orbit-count", &records).render(), artifacts)?;
    ctx.write_json(
        "counts.json",
        &json!({
            "alpha": oc.presentation().format_system(oc.alpha()),
            "functional": oc.functional().label(),
            "complete": explored.is_complete(),
            "records": records.iter().map(record_json).collect::<Vec<_>>(),
        }),
        artifacts,
    )?;
    let saturated = records.iter().filter(|r| r.saturated).count();
    let mut s = format!("{} L values, {saturated} saturated", records.len());
    if !explored.is_complete() {
        s.push_str("; node budget reached, checkpoint written");
    }
    Ok((s, records))
}

fn exponent(ctx: &Context, artifacts: &mut Vec<PathBuf>) -> Result<String, Failure> {
    let (_, records) = orbit_count(ctx, artifacts)?;
    let fit = fit_exponent(&records)?;
    let d = ctx.surface()?.signature().dimension();
    ctx.write_json(
        "fit.json",
        &json!({ "slope": fit.slope, "intercept": fit.intercept, "stderr": fit.stderr, "points": fit.points, "expected": d }),
        artifacts,
    )?;
    Ok(format!("slope {:.4} ± {:.4} (expected {d})", fit.slope, fit.stderr))
}

fn m_estimate(ctx: &Context, artifacts: &mut Vec<PathBuf>) -> Result<String, Failure> {
    let c = &ctx.loaded.config;
    let x = ctx.surface()?;
    let f = build_functional(&x, c.functional.as_ref())?;
    let l = c.measure_l.expect("checked by schema");
    let est = estimate_m(&f, l, &pants_for(&x)?)?;
    let mut t = CsvTable::new("m-estimate", &["L", "count", "estimate"]);
    for (lk, n, e) in &est.convergence_series {
        t.push(vec![lk.to_string(), n.to_string(), e.to_string()])?;
    }
    ctx.write("series.csv", &t.render(), artifacts)?;
    let masses: Vec<Value> = [0.1, 0.05, 0.01]
        .iter()
        .map(|&eps| json!({ "eps": eps, "mass": est.boundary_mass(eps) }))
        .collect();
    ctx.write_json(
        "m_estimate.json",
        &json!({
            "functional": f.label(),
            "value": est.value,
            "L": est.l_used,
            "count": est.count,
            "dimension": est.dimension,
            "box_bound": est.box_bound,
            "boundary_mass": masses,
        }),
        artifacts,
    )?;
    Ok(format!("m ≈ {:.6} from {} points", est.value, est.count))
}

fn ratio(ctx: &Context, artifacts: &mut Vec<PathBuf>) -> Result<String, Failure> {
    let c = &ctx.loaded.config;
    let x1 = ctx.surface()?;
    let x2 = ctx.surface2()?;
    let alpha1 = c.alpha.as_deref().unwrap_or_default();
    let alpha2 = c.alpha2.as_deref().unwrap_or(alpha1);
    let f1 = build_functional(&x1, c.functional.as_ref())?;
    let f2 = build_functional(&x2, c.functional2.as_ref().or(c.functional.as_ref()))?;
    let first = counter(&x1, alpha1, "alpha", f1)?;
    let second = counter(&x2, alpha2, "alpha2", f2)?;
    let e = ratio_experiment(
        &first,
        &second,
        &c.l_grid,
        c.margin,
        c.stabilizer_radius,
        c.measure_l.expect("checked by schema"),
        &SearchOptions {
            node_budget: c.node_budget,
            ..SearchOptions::default()
        },
    )?;
    let mut t = CsvTable::new("ratio", &["L", "count_group_1", "count_group_2", "ratio", "saturated"]);
    for r in &e.rows {
        let group = |rec: &CountRecord| rec.count_group.map(|g| g.to_string()).unwrap_or_default();
        t.push(vec![
            r.l.to_string(),
            group(&r.first),
            group(&r.second),
            r.ratio.to_string(),
            (r.first.saturated && r.second.saturated).to_string(),
        ])?;
    }
    ctx.write("ratio.csv", &t.render(), artifacts)?;
    ctx.write_json(
        "ratio.json",
        &json!({
            "target": e.target,
            "relative_error": e.relative_error,
            "first": e.rows.iter().map(|r| record_json(&r.first)).collect::<Vec<_>>(),
            "second": e.rows.iter().map(|r| record_json(&r.second)).collect::<Vec<_>>(),
        }),
        artifacts,
    )?;
    let last = e.rows.last().map(|r| r.ratio).unwrap_or(f64::NAN);
    Ok(format!("terminal ratio {last:.4}, target {:.4}", e.target))
}

fn distance(ctx: &Context, artifacts: &mut Vec<PathBuf>) -> Result<String, Failure> {
    let x = ctx.surface()?;
    let y = ctx.surface2()?;
    let mut t = CsvTable::new("thurston-distance", &["B", "d_xy", "d_yx"]);
    let mut rows = Vec::new();
    for &b in &ctx.loaded.config.bounds {
        let xy = thurston_distance(&x, &y, b)?;
        let yx = thurston_distance(&y, &x, b)?;
        t.push(vec![b.to_string(), xy.value.to_string(), yx.value.to_string()])?;
        rows.push(json!({
            "B": b,
            "d_xy": xy.value,
            "d_yx": yx.value,
            "argmax_xy": xy.argmax.to_string(),
            "argmax_yx": yx.argmax.to_string(),
            "curves": xy.curves,
        }));
    }
    ctx.write("distance.csv", &t.render(), artifacts)?;
    ctx.write_json("distance.json", &json!({ "lower_bounds": rows }), artifacts)?;
    Ok(format!("{} bounds", rows.len()))
}

/// Node count of a pilot search, extrapolated to the configured grid.
fn resource_estimate(oc: &OrbitCounter, margin: f64, l_max: f64, dimension: u32) -> Result<(f64, f64), Failure> {
    let mut l = l_max / 4.0;
    for _ in 0..6 {
        let opts = SearchOptions {
            node_budget: Some(20_000),
            ..SearchOptions::default()
        };
        let state = oc.explore(2.0 * margin * l, &opts, None)?;
        if state.is_complete() {
            let scale = (l_max / l).powi(dimension as i32);
            let nodes = state.visited() as f64 * scale;
            let letters = oc.alpha().total_letters() as f64 * l_max / l.max(1e-9);
            let bytes = nodes * (160.0 + letters + 4.0 * oc.generators().len() as f64);
            return Ok((nodes, bytes));
        }
        l /= 2.0;
    }
    Ok((f64::INFINITY, f64::INFINITY))
}

/// Schema check, filling dry run and a resource estimate.
pub fn validate(path: &Path) -> Result<String, Failure> {
    let loaded = load(path)?;
    let c = &loaded.config;
    let cmd = c.experiment.as_deref().and_then(Subcommand::from_name).unwrap_or(Subcommand::Validate);
    let errs = schema_errors(c, cmd);
    if !errs.is_empty() {
        return Err(Failure::Config(errs.join("; ")));
    }
    let mut report = String::new();
    let _ = writeln!(report, "schema: ok ({})", cmd.name());
    let x = Arc::new(build_surface(&c.surface, c.tolerance)?);
    let _ = writeln!(report, "surface: genus {}, {} punctures", x.signature().genus, x.signature().punctures);
    let mut alphas = vec![];
    if let Some(a) = &c.alpha {
        alphas.push(("alpha", a.clone()));
    }
    if let Some(a) = &c.alpha2 {
        alphas.push(("alpha2", a.clone()));
    }
    let mut filling_ok = true;
    for (field, text) in &alphas {
        let s = parse_system(&x, text, field)?;
        match is_filling(&x, &s, orbitcount_core::measure::FILLING_CHECK_BOUND)? {
            FillingStatus::Filling { vertices, faces, .. } => {
                let _ = writeln!(report, "{field}: fills ({vertices} crossings, {faces} faces)");
            }
            FillingStatus::NotFilling(w) => {
                filling_ok = false;
                let _ = writeln!(report, "warning: {field} does not fill; it misses {}", w.describe(x.presentation()));
            }
            FillingStatus::Unknown(r) => {
                filling_ok = false;
                let _ = writeln!(report, "warning: {field}: filling not certified ({r})");
            }
        }
    }
    if let (true, Some(a), false) = (filling_ok, &c.alpha, c.l_grid.is_empty()) {
        let f = build_functional(&x, c.functional.as_ref())?;
        let oc = counter(&x, a, "alpha", f)?;
        let l_max = c.l_grid.iter().copied().fold(0.0, f64::max);
        let (nodes, bytes) = resource_estimate(&oc, c.margin, l_max, x.signature().dimension())?;
        let _ = writeln!(
            report,
            "estimate: ~{nodes:.0} orbit nodes, ~{:.1} MiB at search bound {}",
            bytes / (1024.0 * 1024.0),
            2.0 * c.margin * l_max
        );
    }
    if let (Some(l), Some(_)) = (c.measure_l, &c.functional) {
        let d = x.signature().dimension();
        let f = build_functional(&x, c.functional.as_ref())?;
        let est = estimate_m(&f, l / 8.0, &pants_for(&x)?)?;
        let _ = writeln!(report, "estimate: ~{:.0} lattice points at L = {l}", est.count as f64 * 8f64.powi(d as i32));
    }
    let _ = writeln!(report, "{}", if filling_ok { "ok" } else { "ok with warnings" });
    Ok(report)
}
