//! Growth exponents, count ratios and the Thurston asymmetric distance.

use crate::dehn_thurston::DTCoordinates;
use crate::error::{Error, Result};
use crate::holonomy::{Holonomy, PantsDecomposition};
use crate::measure::{estimate_m, simple_curve_lengths, HomogeneousFunctional};
use crate::orbit::{CountRecord, OrbitCounter, SearchOptions};

/// Minimum number of usable records for an exponent fit.
pub const MIN_FIT_POINTS: usize = 4;
/// Minimum count for a record to enter a fit.
pub const MIN_FIT_COUNT: u64 = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub points: usize,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<ExponentFit> {
    if points.len() < 2 {
        return Err(Error::FitRefused(format!("{} points", points.len())));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::FitRefused("all L values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = if points.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(ExponentFit {
        slope,
        intercept,
        stderr,
        points: points.len(),
    })
}

/// Fits `log count_orbit` against `log L` over saturated records with at
/// least `MIN_FIT_COUNT` points; refuses with fewer than `MIN_FIT_POINTS`.
pub fn fit_exponent(records: &[CountRecord]) -> Result<ExponentFit> {
    let usable: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.saturated && r.count_orbit >= MIN_FIT_COUNT)
        .map(|r| (r.l, r.count_orbit as f64))
        .collect();
    if usable.len() < MIN_FIT_POINTS {
        return Err(Error::FitRefused(format!(
            "{} saturated records with count ≥ {MIN_FIT_COUNT}, need {MIN_FIT_POINTS}",
            usable.len()
        )));
    }
    fit_loglog(&usable)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub l: f64,
    pub first: CountRecord,
    pub second: CountRecord,
    /// Ratio of group counts.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioExperiment {
    pub rows: Vec<RatioRow>,
    /// Limit predicted from lattice measures of the two problems.
    pub target: f64,
    /// Relative deviation of the last saturated row from the target.
    pub relative_error: Option<f64>,
}

/// Measure of `{λ : i(α, λ) ≤ 1}` times the measure of the sublevel set of
/// the counting functional, estimated at `measure_l`.
fn weight(c: &OrbitCounter, measure_l: f64) -> Result<f64> {
    let f = c.functional();
    let pants = match (f.holonomy().signature().genus, f.holonomy().signature().punctures) {
        (1, 1) => PantsDecomposition::punctured_torus(),
        (g, n) => {
            return Err(Error::Unsupported {
                genus: g,
                punctures: n,
                what: "ratio targets",
            })
        }
    };
    let alpha_f = HomogeneousFunctional::intersect(f.shared_holonomy(), c.alpha().clone())?;
    let m_alpha = estimate_m(&alpha_f, measure_l, &pants)?.value;
    let m_f = estimate_m(f, measure_l * scale_hint(f)?, &pants)?.value;
    Ok(m_alpha * m_f)
}

/// Chooses a sublevel bound for `m(F)` giving a count comparable to an
/// intersection functional at the same nominal `L`.
fn scale_hint(f: &HomogeneousFunctional) -> Result<f64> {
    if f.is_length() {
        let shortest = simple_curve_lengths(f.holonomy(), 2)?
            .into_iter()
            .map(|(_, l)| l)
            .fold(f64::INFINITY, f64::min);
        Ok(shortest)
    } else {
        Ok(1.0)
    }
}

/// Compares group counts of two orbit problems over `grid` with the ratio
/// of their measure weights. Stabilizers are searched up to `radius`.
pub fn ratio_experiment(
    first: &OrbitCounter,
    second: &OrbitCounter,
    grid: &[f64],
    margin: f64,
    radius: usize,
    measure_l: f64,
    opts: &SearchOptions,
) -> Result<RatioExperiment> {
    let s1 = first.stabilizer_order(radius)?;
    let s2 = second.stabilizer_order(radius)?;
    let r1 = first.count_grid(grid, margin, s1, opts, None)?;
    let r2 = second.count_grid(grid, margin, s2, opts, None)?;
    let target = weight(first, measure_l)? / weight(second, measure_l)?;
    let rows: Vec<RatioRow> = r1
        .into_iter()
        .zip(r2)
        .map(|(a, b)| {
            let ratio = match (a.count_group, b.count_group) {
                (Some(x), Some(y)) if y > 0 => x as f64 / y as f64,
                _ => f64::NAN,
            };
            RatioRow {
                l: a.l,
                first: a,
                second: b,
                ratio,
            }
        })
        .collect();
    let relative_error = rows
        .iter()
        .rev()
        .find(|r| r.first.saturated && r.second.saturated && r.ratio.is_finite())
        .map(|r| (r.ratio / target - 1.0).abs());
    Ok(RatioExperiment {
        rows,
        target,
        relative_error,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThurstonDistance {
    /// `log max ℓ_Y(γ)/ℓ_X(γ)` over the probed curves; a lower bound for
    /// the distance from `X` to `Y`.
    pub value: f64,
    pub argmax: DTCoordinates,
    pub bound: i64,
    pub curves: usize,
}

/// Thurston's asymmetric distance from `X` to `Y` over primitive simple
/// curves with coordinates of norm `≤ bound`. Punctured torus only.
pub fn thurston_distance(x: &Holonomy, y: &Holonomy, bound: i64) -> Result<ThurstonDistance> {
    if x.signature() != y.signature() {
        return Err(Error::Mismatch("structures live on different surfaces".into()));
    }
    let lx = simple_curve_lengths(x, bound)?;
    let ly = simple_curve_lengths(y, bound)?;
    let mut best: Option<(f64, DTCoordinates)> = None;
    for ((c, a), (_, b)) in lx.into_iter().zip(ly) {
        let r = b / a;
        if best.as_ref().map_or(true, |(v, _)| r > *v) {
            best = Some((r, c));
        }
    }
    let curves = simple_curve_lengths(x, bound)?.len();
    let (ratio, argmax) = best.ok_or_else(|| Error::NotPositive(format!("no simple curves up to {bound}")))?;
    Ok(ThurstonDistance {
        value: ratio.ln(),
        argmax,
        bound,
        curves,
    })
}
