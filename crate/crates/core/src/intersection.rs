//! Geometric intersection numbers of closed geodesics.
//!
//! Crossings between the geodesics of `u` and `v` correspond to double
//! cosets `⟨u⟩ g ⟨v⟩` for which the axes of `u` and `g v g⁻¹` cross, i.e.
//! their endpoints interleave on the circle at infinity.
//!
//! Candidate double cosets come from one of two enumerators:
//!
//! * punctured surfaces (free group): each lift of `v` that crosses the axis
//!   of `u` in the Cayley tree shares at least one vertex with it, so the
//!   pairs of letter positions `(i, j)` that start a maximal common segment
//!   are a complete, duplicate-free list of candidates. A combinatorial
//!   linking test on the ribbon structure decides crossings when the
//!   floating-point interleaving test is too close to call.
//! * closed surfaces: a breadth-first sweep of group elements `h` whose
//!   orbit point `h·o` lies in a tube around a fundamental segment of the
//!   axis of `u`; the tube radius is derived from `ℓ(v)` and the distance
//!   from `o` to the axis of `v`, the search slack from the generator
//!   displacements, and the slack is increased until the count is stable.
//!
//! Every crossing is keyed by its positions along both geodesics modulo
//! their lengths, which identifies the double coset exactly.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::holonomy::{BoundaryPoint, Holonomy, Mat2};
use crate::precise;
use crate::words::{inverse_word, CyclicWord, Letter, WeightedCurveSystem};

/// Safety factor on the rounding-error estimate of a frame coordinate.
const ROUNDING: f64 = 256.0 * f64::EPSILON;
/// Lifts of the same class whose endpoints both lie this close to the
/// reference axis endpoints are the reference axis itself.
const COINCIDENT: f64 = 1e-6;
/// Two crossings whose positions agree to this are the same double coset.
const SAME_POSITION: f64 = 1e-7;

/// A transverse crossing of two geodesics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    /// Position along the first geodesic, in `[0, ℓ)`.
    pub first: f64,
    /// Position along the second geodesic, in `[0, ℓ)`.
    pub second: f64,
    /// `+1` when the second geodesic crosses the first from left to right.
    pub sign: i8,
    /// The floating-point test was inconclusive and the exact test decided.
    pub exact_fallback: bool,
}

/// Frame sending the repelling fixed point of an axis to `0` and the
/// attracting one to `∞`, orientation preserving. The axis becomes the
/// imaginary axis and `ln y` is arc length along it.
#[derive(Debug, Clone, Copy)]
struct AxisFrame {
    to_frame: Mat2,
    length: f64,
}

impl AxisFrame {
    fn new(m: &Mat2) -> Option<Self> {
        let (a, r) = m.fixed_points()?;
        let mut basis = Mat2::new(a.x, r.x, a.y, r.y);
        if basis.det() < 0.0 {
            basis.b = -basis.b;
            basis.d = -basis.d;
        }
        let t = m.trace().abs();
        Some(AxisFrame {
            to_frame: basis.inv_general(),
            length: 2.0 * (t / 2.0).acosh(),
        })
    }


}

enum CrossTest {
    Disjoint,
    Cross { position: f64, sign: i8 },
    Ambiguous,
}

/// Crossing of the imaginary axis by the geodesic from `start` to `end`
/// (points already in the frame).
/// `err` bounds the rounding error of the normalised coordinates. When a
/// sign is uncertain the crossing, if any, sits at a height bounded by the
/// endpoint magnitudes; outside `window` it is irrelevant and reported as
/// disjoint.
fn cross_imaginary_axis(start: BoundaryPoint, end: BoundaryPoint, err: f64, window: (f64, f64)) -> CrossTest {
    let certain = |p: BoundaryPoint| p.x.abs() > err && p.y.abs() > err;
    if !(certain(start) && certain(end)) {
        let range = |p: BoundaryPoint| {
            let lo = (p.x.abs() - err).max(0.0) / (p.y.abs() + err);
            let hi = if p.y.abs() > err { (p.x.abs() + err) / (p.y.abs() - err) } else { f64::INFINITY };
            (lo, hi)
        };
        let (a0, a1) = range(start);
        let (b0, b1) = range(end);
        let low = 0.5 * (a0 * b0).ln();
        let high = 0.5 * (a1 * b1).ln();
        if high < window.0 - SAME_POSITION || low > window.1 + SAME_POSITION {
            return CrossTest::Disjoint;
        }
        return CrossTest::Ambiguous;
    }
    let e1 = start.x / start.y;
    let e2 = end.x / end.y;
    if e1 * e2 > 0.0 {
        return CrossTest::Disjoint;
    }
    CrossTest::Cross {
        position: 0.5 * (-e1 * e2).ln(),
        sign: if e1 < 0.0 { 1 } else { -1 },
    }
}

/// Orbit points a closed-surface sweep may visit. The count grows like
/// `ℓ(long)·exp(ℓ(short)/2)`.
const SWEEP_BUDGET: usize = 1_000_000;

const EVERYWHERE: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);

/// `frame · g · p` with a bound on the rounding error of the result.
fn frame_point(frame: &Mat2, g: &Mat2, p: BoundaryPoint) -> (BoundaryPoint, f64) {
    let m = frame.mul(g);
    let qx = m.a * p.x + m.b * p.y;
    let qy = m.c * p.x + m.d * p.y;
    let scale = 4.0 * frame.max_abs() * g.max_abs();
    let err = ROUNDING * scale / qx.hypot(qy);
    (BoundaryPoint::new(qx, qy), err)
}

fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if r >= period - SAME_POSITION * 0.5 {
        0.0
    } else {
        r
    }
}

/// Cyclic order of the outgoing half-edges at the single vertex of the
/// ribbon graph of a punctured surface.
#[derive(Debug, Clone)]
struct Ribbon {
    position: Vec<usize>,
    size: usize,
}

impl Ribbon {
    fn for_holonomy(x: &Holonomy) -> Result<Self> {
        let sig = x.signature();
        match (sig.genus, sig.punctures) {
            // a1, b1, A1, B1 counterclockwise; its single face reads a B A b
            (1, 1) => Ok(Ribbon {
                // indexed by rank_key: a1=0, A1=1, b1=2, B1=3
                position: vec![0, 2, 1, 3],
                size: 4,
            }),
            (g, n) => Err(Error::Unsupported {
                genus: g,
                punctures: n,
                what: "ribbon structure for intersection numbers",
            }),
        }
    }

    fn pos(&self, l: Letter) -> usize {
        self.position[l.rank_key() as usize]
    }

    /// Going counterclockwise from `from`, is `x` met before `y`?
    fn before(&self, from: Letter, x: Letter, y: Letter) -> bool {
        let f = self.pos(from);
        let dx = (self.pos(x) + self.size - f) % self.size;
        let dy = (self.pos(y) + self.size - f) % self.size;
        dx < dy
    }

    fn interleaved(&self, p: (Letter, Letter), q: (Letter, Letter)) -> bool {
        let inside = |x: Letter| self.before(p.0, x, p.1);
        inside(q.0) != inside(q.1)
    }
}

fn prefix_matrix(x: &Holonomy, w: &[Letter], len: usize) -> Mat2 {
    x.evaluate(&w[..len])
}

/// All crossings between the geodesics of primitive cyclically reduced
/// words `u` and `v` (`same` when they are the same class; then each
/// double point appears twice).
fn raw_crossings(x: &Holonomy, u: &[Letter], v: &[Letter], same: bool) -> Result<Vec<Crossing>> {
    if x.signature().is_closed() {
        closed_crossings(x, u, v, same)
    } else {
        free_crossings(x, u, v, same)
    }
}

fn not_hyperbolic(x: &Holonomy, w: &[Letter]) -> Error {
    Error::NotHyperbolic {
        word: x.presentation().format_word(w),
        trace: x.trace(w).abs(),
    }
}

fn free_crossings(x: &Holonomy, u: &[Letter], v: &[Letter], same: bool) -> Result<Vec<Crossing>> {
    let ribbon = Ribbon::for_holonomy(x)?;
    let mu = x.evaluate(u);
    let mv = x.evaluate(v);
    let fu = AxisFrame::new(&mu).ok_or_else(|| not_hyperbolic(x, u))?;
    let fv = AxisFrame::new(&mv).ok_or_else(|| not_hyperbolic(x, v))?;
    let nu = u.len();
    let at = |w: &[Letter], k: isize| w[k.rem_euclid(w.len() as isize) as usize];
    let bound = (u.len() + v.len() + 1) as isize;
    let reversed = inverse_word(v);
    let mut out = Vec::new();
    for pass in 0..2 {
        let w: &[Letter] = if pass == 0 { v } else { &reversed };
        let nw = w.len();
        for i in 0..nu as isize {
            for j in 0..nw as isize {
                if same && pass == 0 && i == j {
                    continue;
                }
                let mut k = 0isize;
                while k < bound && at(u, i + k) == at(w, j + k) {
                    k += 1;
                }
                if k == bound {
                    // coincident axes: only possible for the trivial coset
                    continue;
                }
                if at(u, i - 1) == at(w, j - 1) {
                    continue;
                }
                if k == 0 {
                    if pass == 1 {
                        continue;
                    }
                    if at(u, i) == at(w, j - 1).inverse() || at(u, i - 1) == at(w, j).inverse() {
                        continue;
                    }
                }
                let exact = if k == 0 {
                    ribbon.interleaved(
                        (at(u, i - 1).inverse(), at(u, i)),
                        (at(w, j - 1).inverse(), at(w, j)),
                    )
                } else {
                    let start = ribbon.before(at(u, i), at(u, i - 1).inverse(), at(w, j - 1).inverse());
                    let end = ribbon.before(at(u, i + k - 1).inverse(), at(u, i + k), at(w, j + k));
                    start == end
                };
                if !exact {
                    continue;
                }
                // Translating by the prefix up to the middle of the common
                // segment puts both axes through a bounded neighbourhood of
                // the basepoint, so no long prefix products enter the test.
                let m = k / 2;
                let iu = (i + m).rem_euclid(nu as isize) as usize;
                let jw = (j + m).rem_euclid(nw as isize) as usize;
                let ru: Vec<Letter> = u[iu..].iter().chain(&u[..iu]).copied().collect();
                let rw: Vec<Letter> = w[jw..].iter().chain(&w[..jw]).copied().collect();
                let (mr, mw) = (x.evaluate(&ru), x.evaluate(&rw));
                let fr = AxisFrame::new(&mr).ok_or_else(|| not_hyperbolic(x, u))?;
                let fw = AxisFrame::new(&mw).ok_or_else(|| not_hyperbolic(x, v))?;
                let (r_att, r_rep) = mr.fixed_points().expect("hyperbolic");
                let (w_att, w_rep) = mw.fixed_points().expect("hyperbolic");
                // orient the second axis along v
                let (v_start, v_end) = if pass == 0 { (w_rep, w_att) } else { (w_att, w_rep) };
                let id = Mat2::IDENTITY;
                let (start, e1) = frame_point(&fr.to_frame, &id, v_start);
                let (end, e2) = frame_point(&fr.to_frame, &id, v_end);
                let (back_rep, e3) = frame_point(&fw.to_frame, &id, r_rep);
                let (back_att, e4) = frame_point(&fw.to_frame, &id, r_att);
                let ahead = cross_imaginary_axis(start, end, e1.max(e2), EVERYWHERE);
                let back = cross_imaginary_axis(back_rep, back_att, e3.max(e4), EVERYWHERE);
                // carry the crossing point back to the frames of u and v
                let to_u = fu.to_frame.mul(&prefix_matrix(x, u, iu));
                let to_v = fv.to_frame.mul(&prefix_matrix(x, w, jw));
                let height = |t: &Mat2, z: (f64, f64)| {
                    let (a, b) = t.apply_complex(z);
                    0.5 * (a * a + b * b).ln()
                };
                let place = |z: (f64, f64), sign: i8, exact_fallback: bool| Crossing {
                    first: wrap(height(&to_u, z), fu.length),
                    second: wrap(height(&to_v, z), fv.length),
                    sign,
                    exact_fallback,
                };
                // the ribbon test is exact; arithmetic only places the crossing
                let crossing = match (ahead, back) {
                    (CrossTest::Cross { position, sign }, CrossTest::Cross { .. }) => {
                        place(fr.to_frame.inv_general().apply_complex((0.0, position.exp())), sign, false)
                    }
                    _ => match precise::local_crossing(x, &ru, &rw, pass == 1) {
                        Some((z, sign)) => place(z, sign, false),
                        None => {
                            let z = fr.to_frame.inv_general().apply_complex((0.0, ambiguous_position(start, end).exp()));
                            place(z, if start.x * start.y < 0.0 { 1 } else { -1 }, true)
                        }
                    },
                };
                out.push(crossing);
            }
        }
    }
    Ok(out)
}

/// Best-effort crossing height when one endpoint is numerically at 0 or ∞.
fn ambiguous_position(start: BoundaryPoint, end: BoundaryPoint) -> f64 {
    let e = |p: BoundaryPoint| (p.x.abs().max(1e-300)) / p.y.abs().max(1e-300);
    0.5 * (e(start) * e(end)).ln()
}

/// Hyperbolic distance between two points of the upper half plane.
fn distance(z: (f64, f64), w: (f64, f64)) -> f64 {
    let dx = z.0 - w.0;
    let dy = z.1 - w.1;
    (1.0 + (dx * dx + dy * dy) / (2.0 * z.1 * w.1)).acosh()
}

/// Distance from a frame point to the segment `{i·e^s : lo ≤ s ≤ hi}`.
fn segment_distance(z: (f64, f64), lo: f64, hi: f64) -> f64 {
    let s = (z.0.hypot(z.1)).ln();
    if s < lo {
        distance(z, (0.0, lo.exp()))
    } else if s > hi {
        distance(z, (0.0, hi.exp()))
    } else {
        (z.0.abs() / z.1).asinh()
    }
}

/// Nearby orbit of the base point `o = i`: the covering radius `D` of the
/// orbit (every point of H² lies within `D` of some `h·o`) and the elements
/// `s` with `d(o, s·o) ≤ 2D`. Those contain every Voronoi neighbour of `o`,
/// so any connected region is swept by stepping through them.
#[derive(Debug, Clone)]
pub struct OrbitNet {
    pub covering_radius: f64,
    pub steps: Vec<Mat2>,
}

const ORIGIN: (f64, f64) = (0.0, 1.0);

impl OrbitNet {
    pub(crate) fn compute(x: &Holonomy) -> OrbitNet {
        let generators: Vec<Mat2> = (0..x.presentation().rank())
            .flat_map(|k| [Letter::new(k, false), Letter::new(k, true)])
            .map(|l| *x.letter_matrix(l))
            .collect();
        if !x.signature().is_closed() {
            return OrbitNet {
                covering_radius: f64::INFINITY,
                steps: generators,
            };
        }
        let step = generators
            .iter()
            .map(|g| distance(ORIGIN, g.apply_complex(ORIGIN)))
            .fold(0.0, f64::max);
        let mut rho = 2.0f64;
        loop {
            let ball = orbit_ball(&generators, 2.0 * rho + 0.2, step);
            let covering = dirichlet_radius(&ball, rho) + 0.05;
            if covering <= rho || rho > 12.0 {
                let reach = 2.0 * covering + 0.1;
                let mut steps: Vec<Mat2> = ball
                    .into_iter()
                    .filter(|m| {
                        let d = distance(ORIGIN, m.apply_complex(ORIGIN));
                        d > 1e-9 && d <= reach
                    })
                    .collect();
                // closing the step set under itself guards against gaps
                // left by the generator walk
                loop {
                    let mut keys: HashSet<(i64, i64)> =
                        steps.iter().map(|m| disk_key(m.apply_complex(ORIGIN))).collect();
                    let mut added = Vec::new();
                    for a in &steps {
                        for b in &steps {
                            let m = a.mul(b);
                            let z = m.apply_complex(ORIGIN);
                            let d = distance(ORIGIN, z);
                            if d > 1e-9 && d <= reach && keys.insert(disk_key(z)) {
                                added.push(m);
                            }
                        }
                    }
                    if added.is_empty() {
                        break;
                    }
                    steps.extend(added);
                }
                return OrbitNet {
                    covering_radius: covering,
                    steps,
                };
            }
            rho = covering.max(rho + 1.0);
        }
    }
}

fn disk_key(z: (f64, f64)) -> (i64, i64) {
    ((z.0 * 1e6).round() as i64, (z.1.ln() * 1e6).round() as i64)
}

/// Group elements `h` with `d(o, h·o) ≤ radius`, found by a generator walk
/// that may pass through points up to `radius + step` away.
fn orbit_ball(generators: &[Mat2], radius: f64, step: f64) -> Vec<Mat2> {
    let mut seen: HashSet<(i64, i64)> = HashSet::new();
    seen.insert(disk_key(ORIGIN));
    let mut out = vec![Mat2::IDENTITY];
    let mut frontier = vec![Mat2::IDENTITY];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for h in frontier {
            for g in generators {
                let m = h.mul(g);
                let z = m.apply_complex(ORIGIN);
                let d = distance(ORIGIN, z);
                if d <= radius + step && seen.insert(disk_key(z)) {
                    next.push(m);
                    if d <= radius {
                        out.push(m);
                    }
                }
            }
        }
        frontier = next;
    }
    out
}

/// Largest distance from `o` to the boundary of its Dirichlet cell,
/// sampled over directions; the cell is star-shaped so each direction is
/// a bisection. Capped at `cap` when the ball is too small to tell.
fn dirichlet_radius(ball: &[Mat2], cap: f64) -> f64 {
    let points: Vec<(f64, f64)> = ball
        .iter()
        .map(|m| m.apply_complex(ORIGIN))
        .filter(|&z| distance(ORIGIN, z) > 1e-9)
        .collect();
    let directions = 2048;
    let mut worst = 0.0f64;
    for k in 0..directions {
        let theta = std::f64::consts::TAU * k as f64 / directions as f64;
        let at = |r: f64| -> (f64, f64) {
            // point at distance r from i in direction theta, via the disk model
            let t = (r / 2.0).tanh();
            let (wx, wy) = (t * theta.cos(), t * theta.sin());
            // Cayley map from the disk to the upper half plane
            let den = wx * wx + (1.0 - wy) * (1.0 - wy);
            (2.0 * wx / den, (1.0 - wx * wx - wy * wy) / den)
        };
        // d(z, p) is monotone in |z - p|² / Im p for fixed z
        let gap = |z: (f64, f64), p: (f64, f64)| ((z.0 - p.0).powi(2) + (z.1 - p.1).powi(2)) / p.1;
        let inside = |r: f64| {
            let z = at(r);
            let d0 = gap(z, ORIGIN);
            points.iter().all(|&p| gap(z, p) >= d0)
        };
        if inside(cap) {
            return cap + 1.0;
        }
        let (mut lo, mut hi) = (0.0, cap);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        worst = worst.max(hi);
    }
    worst
}

fn closed_crossings(x: &Holonomy, u: &[Letter], v: &[Letter], same: bool) -> Result<Vec<Crossing>> {
    let mu = x.evaluate(u);
    let mv = x.evaluate(v);
    let fu = AxisFrame::new(&mu).ok_or_else(|| not_hyperbolic(x, u))?;
    let fv = AxisFrame::new(&mv).ok_or_else(|| not_hyperbolic(x, v))?;
    // the swept tube grows like ℓ(u)·exp(ℓ(v)/2): sweep along the longer one
    if fv.length > fu.length + 1e-9 {
        let swapped = closed_sweep(x, (v, mv, fv), (u, mu, fu), same)?;
        return Ok(swapped
            .into_iter()
            .map(|c| Crossing {
                first: c.second,
                second: c.first,
                sign: -c.sign,
                exact_fallback: c.exact_fallback,
            })
            .collect());
    }
    closed_sweep(x, (u, mu, fu), (v, mv, fv), same)
}

type Axis<'a> = (&'a [Letter], Mat2, AxisFrame);

/// Conjugator `c` for which the axis of `c⁻¹·M·c` passes as close to `o`
/// as a greedy walk over the net finds, with that distance. `frame` is the
/// axis frame of `M`.
fn recenter(net: &OrbitNet, frame: &Mat2) -> (Mat2, f64) {
    let axis_distance = |f: &Mat2| {
        let z = f.apply_complex(ORIGIN);
        (z.0.abs() / z.1).asinh()
    };
    let mut conj = Mat2::IDENTITY;
    let mut best = axis_distance(frame);
    loop {
        let mut improved = false;
        for s in &net.steps {
            let m = conj.mul(s);
            let d = axis_distance(&frame.mul(&m));
            if d < best - 1e-12 {
                best = d;
                conj = m;
                improved = true;
            }
        }
        if !improved {
            return (conj, best);
        }
    }
}

fn closed_sweep(x: &Holonomy, first: Axis, second: Axis, same: bool) -> Result<Vec<Crossing>> {
    let (u, mu, fu) = first;
    let (v, mv, fv) = second;
    let net = x.orbit_net();
    // conjugate both so their axes pass within the covering radius of o;
    // frames are carried along so positions are unchanged
    let (cu, _) = recenter(net, &fu.to_frame);
    let (cv, to_axis_v) = recenter(net, &fv.to_frame);
    let fu = AxisFrame {
        to_frame: fu.to_frame.mul(&cu),
        length: fu.length,
    };
    let fv = AxisFrame {
        to_frame: fv.to_frame.mul(&cv),
        length: fv.length,
    };
    let mu = cu.inv_general().mul(&mu).mul(&cu);
    let mv = cv.inv_general().mul(&mv).mul(&cv);
    let (v_att, v_rep) = mv.fixed_points().ok_or_else(|| not_hyperbolic(x, v))?;
    let (u_att, u_rep) = mu.fixed_points().ok_or_else(|| not_hyperbolic(x, u))?;
    // fundamental segment of u centred at the projection of o, which keeps
    // the matrices in the sweep as small as possible
    let centre = {
        let z = fu.to_frame.apply_complex(ORIGIN);
        z.0.hypot(z.1).ln()
    };
    let lo = centre - 0.5 * fu.length;
    let hi = lo + fu.length;
    // every lift of v meeting the segment has an orbit point h·o (h in the
    // lift's coset) within this distance of the crossing
    let radius = to_axis_v + 0.5 * fv.length + SAME_POSITION;
    let reach = radius + net.covering_radius;
    let tube = |h: &Mat2| segment_distance(fu.to_frame.apply_complex(h.apply_complex(ORIGIN)), lo, hi);
    let h = Mat2::IDENTITY;
    if tube(&h) > reach {
        return Err(Error::NeedsExact("base point is not near the recentred axis".into()));
    }

    let key = |m: &Mat2| -> (i64, i64) {
        let z = fu.to_frame.apply_complex(m.apply_complex(ORIGIN));
        let s = z.0.hypot(z.1).ln();
        let t = (z.0 / z.1).asinh();
        ((s * 1e6).round() as i64, (t * 1e6).round() as i64)
    };
    let mut seen: HashSet<(i64, i64)> = HashSet::new();
    seen.insert(key(&h));
    let mut frontier = vec![h];
    let mut crossings: Vec<Crossing> = Vec::new();
    while !frontier.is_empty() {
        if seen.len() > SWEEP_BUDGET {
            return Err(Error::NeedsExact(format!(
                "crossing sweep for `{}` / `{}` exceeds {SWEEP_BUDGET} orbit points",
                x.presentation().format_word(u),
                x.presentation().format_word(v)
            )));
        }
        let mut next = Vec::new();
        for h in frontier {
            if tube(&h) <= radius {
                let (start, e1) = frame_point(&fu.to_frame, &h, v_rep);
                let (end, e2) = frame_point(&fu.to_frame, &h, v_att);
                let coincident = same
                    && start.x.abs().min(start.y.abs()) < COINCIDENT
                    && end.x.abs().min(end.y.abs()) < COINCIDENT;
                if !coincident {
                    match cross_imaginary_axis(start, end, e1.max(e2), (lo, hi)) {
                        CrossTest::Disjoint => {}
                        CrossTest::Ambiguous => {
                            return Err(Error::NeedsExact(format!(
                                "lift of `{}` ends within tolerance of the axis of `{}`",
                                x.presentation().format_word(v),
                                x.presentation().format_word(u)
                            )))
                        }
                        CrossTest::Cross { position, sign } => {
                            if position >= lo - SAME_POSITION && position < hi + SAME_POSITION {
                                let hi = h.inv_general();
                                let (back_rep, _) = frame_point(&fv.to_frame, &hi, u_rep);
                                let (back_att, _) = frame_point(&fv.to_frame, &hi, u_att);
                                let second = match cross_imaginary_axis(back_rep, back_att, 0.0, EVERYWHERE) {
                                    CrossTest::Cross { position, .. } => position,
                                    _ => 0.0,
                                };
                                crossings.push(Crossing {
                                    first: wrap(position, fu.length),
                                    second: wrap(second, fv.length),
                                    sign,
                                    exact_fallback: false,
                                });
                            }
                        }
                    }
                }
            }
            for s in &net.steps {
                let m = h.mul(s);
                if tube(&m) <= reach && seen.insert(key(&m)) {
                    next.push(m);
                }
            }
        }
        frontier = next;
    }
    Ok(dedupe(crossings, fu.length, fv.length))
}

fn circular_close(a: f64, b: f64, period: f64) -> bool {
    let d = (a - b).abs();
    d < SAME_POSITION || (period - d) < SAME_POSITION
}

fn dedupe(mut crossings: Vec<Crossing>, lu: f64, lv: f64) -> Vec<Crossing> {
    crossings.sort_by(|a, b| a.first.total_cmp(&b.first).then(a.second.total_cmp(&b.second)));
    let mut out: Vec<Crossing> = Vec::with_capacity(crossings.len());
    for c in crossings {
        if !out
            .iter()
            .any(|o| circular_close(o.first, c.first, lu) && circular_close(o.second, c.second, lv))
        {
            out.push(c);
        }
    }
    out
}

/// Crossings between primitive roots `r` and `s` of two classes. When the
/// classes agree the list holds each self-crossing once.
pub fn crossings(x: &Holonomy, u: &CyclicWord, v: &CyclicWord) -> Result<Vec<Crossing>> {
    let (ru, _) = u.primitive_root();
    let (rv, _) = v.primitive_root();
    check_nonperipheral(x, &ru)?;
    check_nonperipheral(x, &rv)?;
    if same_class(&ru, &rv) {
        let all = raw_crossings(x, ru.letters(), ru.letters(), true)?;
        // each double point appears as (s, t) and (t, s)
        Ok(all.into_iter().filter(|c| c.first < c.second).collect())
    } else {
        raw_crossings(x, ru.letters(), rv.letters(), false)
    }
}

fn same_class(a: &CyclicWord, b: &CyclicWord) -> bool {
    a == b || *a == b.inverse()
}

fn check_nonperipheral(x: &Holonomy, w: &CyclicWord) -> Result<()> {
    if x.presentation().is_peripheral(w) {
        return Err(Error::NotHyperbolic {
            word: x.presentation().format_cyclic(w),
            trace: x.trace(w.letters()).abs(),
        });
    }
    Ok(())
}

/// Minimal number of transverse intersections of the free homotopy
/// classes of `u` and `v`. For `u = v` this is the current self-pairing
/// `i(γ,γ) = 2·si(γ)`. Powers multiply: `i(r^k, s^m) = k·m·i(r, s)`.
pub fn geometric_intersection(x: &Holonomy, u: &CyclicWord, v: &CyclicWord) -> Result<u64> {
    let (ru, k) = u.primitive_root();
    let (rv, m) = v.primitive_root();
    check_nonperipheral(x, &ru)?;
    check_nonperipheral(x, &rv)?;
    let base = if same_class(&ru, &rv) {
        raw_crossings(x, ru.letters(), ru.letters(), true)?.len() as u64
    } else {
        raw_crossings(x, ru.letters(), rv.letters(), false)?.len() as u64
    };
    Ok(base * (k * m) as u64)
}

/// Number of transverse double points of the geodesic of `γ`. For a power
/// `r^k` of a primitive class this is `k²·si(r) + k - 1`.
pub fn self_intersection(x: &Holonomy, gamma: &CyclicWord) -> Result<u64> {
    let (root, k) = gamma.primitive_root();
    check_nonperipheral(x, &root)?;
    let doubled = raw_crossings(x, root.letters(), root.letters(), true)?.len() as u64;
    let k = k as u64;
    Ok(k * k * (doubled / 2) + k - 1)
}

/// Bilinear extension `Σ wᵢ·w'ⱼ·i(sᵢ, tⱼ)`.
pub fn pairing(x: &Holonomy, s: &WeightedCurveSystem, t: &WeightedCurveSystem) -> Result<f64> {
    let mut total = 0.0;
    for (u, wu) in s.components() {
        for (v, wv) in t.components() {
            let i = geometric_intersection(x, u, v)?;
            total += wu * wv * i as f64;
        }
    }
    Ok(total)
}

/// Integer-weight pairing used where exactness matters. Weights are
/// rounded; callers use it only for integral systems.
pub fn pairing_integral(x: &Holonomy, s: &WeightedCurveSystem, t: &WeightedCurveSystem) -> Result<u64> {
    let mut total = 0u64;
    for (u, wu) in s.components() {
        for (v, wv) in t.components() {
            let i = geometric_intersection(x, u, v)?;
            total += (wu.round() as u64) * (wv.round() as u64) * i;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holonomy::{build_holonomy, FenchelNielsen};

    fn torus() -> Holonomy {
        Holonomy::modular_torus()
    }

    fn curve(x: &Holonomy, s: &str) -> CyclicWord {
        x.presentation().parse_curve(s).unwrap()
    }

    #[test]
    fn ribbon_face_is_the_commutator() {
        let x = torus();
        let r = Ribbon::for_holonomy(&x).unwrap();
        let p = x.presentation();
        let letters: Vec<Letter> = p.parse_word("a1 A1 b1 B1").unwrap();
        // next counterclockwise half-edge
        let next = |h: Letter| {
            *letters
                .iter()
                .find(|&&l| (r.pos(l) + r.size - r.pos(h)) % r.size == 1)
                .unwrap()
        };
        let mut face = vec![letters[0]];
        let mut h = next(letters[0].inverse());
        while h != letters[0] {
            face.push(h);
            h = next(h.inverse());
        }
        assert_eq!(face.len(), 4);
        let c = p.cyclic_canonical(&face, true).unwrap();
        assert!(p.is_peripheral(&c));
    }

    #[test]
    fn basic_torus_intersections() {
        let x = torus();
        let i = |a: &str, b: &str| geometric_intersection(&x, &curve(&x, a), &curve(&x, b)).unwrap();
        assert_eq!(i("a1", "b1"), 1);
        assert_eq!(i("a1", "a1 b1"), 1);
        assert_eq!(i("a1", "a1"), 0);
        assert_eq!(i("a1 a1 b1", "b1"), 2);
        assert_eq!(i("a1 a1 b1", "a1 b1 b1"), 3);
        assert_eq!(i("a1 a1", "b1"), 2);
    }

    #[test]
    fn torus_self_intersections() {
        let x = torus();
        let si = |a: &str| self_intersection(&x, &curve(&x, a)).unwrap();
        assert_eq!(si("a1"), 0);
        assert_eq!(si("a1 b1"), 0);
        assert_eq!(si("a1 a1 b1 a1 b1"), 0);
        // a figure-eight: crosses itself once
        assert_eq!(si("a1 a1 b1 b1"), 1);
        assert_eq!(si("a1 b1 A1 b1"), 1);
        // power law
        assert_eq!(si("a1 a1"), 1);
    }

    #[test]
    fn peripheral_is_rejected() {
        let x = torus();
        let c = curve(&x, "a1 b1 A1 B1");
        assert!(matches!(
            geometric_intersection(&x, &c, &curve(&x, "a1")),
            Err(Error::NotHyperbolic { .. })
        ));
    }

    #[test]
    fn genus_two_chain_intersections() {
        let x = build_holonomy(&FenchelNielsen::genus_two([1.3, 1.7, 1.1], [0.2, 0.4, -0.3]).unwrap())
            .unwrap();
        let names = ["a1", "b1", "a1 a2", "b2", "a2"];
        let chain: Vec<CyclicWord> = names.iter().map(|s| curve(&x, s)).collect();
        for i in 0..5 {
            assert_eq!(self_intersection(&x, &chain[i]).unwrap(), 0, "{}", names[i]);
            for j in i + 1..5 {
                let expected = if j == i + 1 { 1 } else { 0 };
                assert_eq!(
                    geometric_intersection(&x, &chain[i], &chain[j]).unwrap(),
                    expected,
                    "{} / {}",
                    names[i],
                    names[j]
                );
            }
        }
        // separating curve misses the handle curves
        let c = curve(&x, "a1 b1 A1 B1");
        assert_eq!(geometric_intersection(&x, &c, &chain[0]).unwrap(), 0);
        assert_eq!(geometric_intersection(&x, &c, &chain[2]).unwrap(), 2);
    }
}
