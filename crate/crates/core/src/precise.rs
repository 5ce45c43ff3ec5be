//! Double-double evaluation of a crossing point when the double-precision
//! frame test cannot separate the axes from each other's endpoints.

use twofloat::TwoFloat;

use crate::holonomy::{Holonomy, Mat2};
use crate::words::Letter;

type T = TwoFloat;

#[derive(Clone, Copy)]
struct M {
    a: T,
    b: T,
    c: T,
    d: T,
}

impl M {
    fn from(m: &Mat2) -> M {
        M {
            a: T::from(m.a),
            b: T::from(m.b),
            c: T::from(m.c),
            d: T::from(m.d),
        }
    }

    fn mul(&self, o: &M) -> M {
        M {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

}

fn evaluate(x: &Holonomy, w: &[Letter]) -> M {
    w.iter().fold(M::from(&Mat2::IDENTITY), |acc, &l| acc.mul(&M::from(x.letter_matrix(l))))
}

/// Eigenvector for eigenvalue `lambda`, picking the better conditioned of
/// the two candidate columns.
fn eigenvector(m: &M, lambda: T) -> (T, T) {
    let first = (m.b, lambda - m.a);
    let second = (lambda - m.d, m.c);
    let size = |v: &(T, T)| v.0.hi().abs().max(v.1.hi().abs());
    if size(&first) >= size(&second) {
        first
    } else {
        second
    }
}

/// Attracting and repelling fixed points as homogeneous vectors.
fn fixed_points(m: &M) -> Option<((T, T), (T, T))> {
    let tr = m.a + m.d;
    let det = m.a * m.d - m.b * m.c;
    let disc = tr * tr - T::from(4.0) * det;
    if disc.hi() <= 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let big = if tr.hi() >= 0.0 { (tr + root) / 2.0 } else { (tr - root) / 2.0 };
    let small = det / big;
    Some((eigenvector(m, big), eigenvector(m, small)))
}

/// The crossing of the axes of `r` and `w` as a point of the upper half
/// plane, with the sign of the crossing when `w` is read along
/// `w_reversed ? w⁻¹ : w`. `None` when even this precision is not enough.
pub(crate) fn local_crossing(x: &Holonomy, r: &[Letter], w: &[Letter], w_reversed: bool) -> Option<((f64, f64), i8)> {
    let mr = evaluate(x, r);
    let mw = evaluate(x, w);
    let (ra, mut rr) = fixed_points(&mr)?;
    let (wa, wr) = fixed_points(&mw)?;
    let mut det: T = ra.0 * rr.1 - rr.0 * ra.1;
    if det.hi() < 0.0 {
        rr = (-rr.0, -rr.1);
        det = -det;
    }
    // frame coordinates x/y of a boundary vector, repelling end at 0
    let frame = |p: (T, T)| -> Option<T> {
        let qx = (rr.1 * p.0 - rr.0 * p.1) / det;
        let qy = (ra.0 * p.1 - ra.1 * p.0) / det;
        let size = |v: (T, T)| v.0.hi().abs().max(v.1.hi().abs());
        let err = 1e-29 * size(rr).max(size(ra)) * size(p) / det.hi().abs();
        if qx.hi().abs() <= err || qy.hi().abs() <= err {
            return None;
        }
        Some(qx / qy)
    };
    let (start, end) = if w_reversed { (wa, wr) } else { (wr, wa) };
    let e1 = frame(start)?;
    let e2 = frame(end)?;
    let product = -(e1 * e2);
    if product.hi() <= 0.0 {
        return None;
    }
    let h = product.sqrt();
    // basis columns (ra, rr) send ∞ to the attracting and 0 to the repelling point
    let (ba, bb, bc, bd) = (ra.0, rr.0, ra.1, rr.1);
    let denom = bd * bd + bc * bc * h * h;
    let re = (bb * bd + ba * bc * h * h) / denom;
    let im = det * h / denom;
    let sign = if e1.hi() < 0.0 { 1 } else { -1 };
    Some(((re.hi(), im.hi()), sign))
}
