//! Geometric backbone of the integrable family: fixed points, critical
//! level values, topology of the level sets `{V_{b,a} = h}` and their
//! projections on the x-axis.

use crate::dynamics::PlanePoint;
use crate::error::{Error, Result};
use crate::invariants::{eval_integral, IntegralSpec};
use crate::params::ParamPair;

/// Fixed points of `G_{b,a}`: the origin always, the symmetric pair `P_±`
/// exactly when `a*b < 1/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointSet {
    pub origin: PlanePoint,
    pub pair: Option<(PlanePoint, PlanePoint)>,
}

pub fn fixed_points(pp: &ParamPair) -> FixedPointSet {
    let pair = if pp.has_saddle() {
        let (a, b) = (pp.a(), pp.b());
        let x = (-b + 0.5 * (b / a).sqrt()).sqrt();
        let y = (-a + 0.5 * (a / b).sqrt()).sqrt();
        let p_plus = PlanePoint::new(x, y);
        Some((p_plus, p_plus.neg()))
    } else {
        None
    };
    FixedPointSet {
        origin: PlanePoint::ORIGIN,
        pair,
    }
}

/// The three distinguished level values.
///
/// `h_min` is the value of `V_{b,a}` at `P_±` (the bottom of the two wells);
/// `h_plus` and `h_minus` are the roots of
/// `P1(h) = 16 h^2 + (16 a^2 + 16 b^2 + 8) h + (4ab - 1)^2`, the levels at
/// which the x-axis projections of `{V_{b,a} = h}` and `{V_{a,b} = h}` touch.
/// For `a != b` the projections are disjoint on `(h_min, h_plus)` and overlap
/// on `[h_plus, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalValues {
    pub h_min: f64,
    pub h_plus: f64,
    pub h_minus: f64,
}

pub fn critical_values(pp: &ParamPair) -> CriticalValues {
    let (a, b) = (pp.a(), pp.b());
    let ab = pp.product();
    let h_min = -0.25 - ab + ab.sqrt();
    let s = (a + b) * ((a - b) * (a - b) + 1.0).sqrt();
    let m = -(a * a + b * b) - 0.5;
    CriticalValues {
        h_min,
        h_plus: 0.5 * (m + s),
        h_minus: 0.5 * (m - s),
    }
}

/// `P1(h)`, the quadratic whose roots are `h_±`.
pub fn p1_poly(pp: &ParamPair, h: f64) -> f64 {
    let (a, b) = (pp.a(), pp.b());
    16.0 * h * h + (16.0 * a * a + 16.0 * b * b + 8.0) * h + (4.0 * a * b - 1.0).powi(2)
}

/// `P2(h) = (h + ab + 1/4)^2 - ab`, the quadratic with root `h_min`.
pub fn p2_poly(pp: &ParamPair, h: f64) -> f64 {
    let ab = pp.product();
    (h + ab + 0.25).powi(2) - ab
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscriminantKind {
    R1,
    R2,
}

/// Discriminant in `y` of `V(x, y) - h`, as a polynomial in `x`.
///
/// `R1` belongs to `V_{b,a}`, `R2` to `V_{a,b}`; the non-negativity region of
/// the discriminant is exactly the x-axis projection of the level set.
pub fn discriminant_r(which: DiscriminantKind, x: f64, h: f64, pp: &ParamPair) -> f64 {
    let (a, b) = (pp.a(), pp.b());
    let (lead, tail) = match which {
        DiscriminantKind::R1 => (a, b),
        DiscriminantKind::R2 => (b, a),
    };
    let x2 = x * x;
    -4.0 * lead * x2 * x2 + (-4.0 * a * b + 4.0 * h + 1.0) * x2 + 4.0 * tail * h
}

/// Topology class of `{V_{b,a} = h}`, decided by exact comparisons of `h`
/// against `0` and `h_min` and of `a*b` against `1/4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelTopology {
    Empty,
    OriginOnly,
    SingleOval,
    TwoOvals,
    HomoclinicFigure,
    PointPair,
}

impl LevelTopology {
    pub fn name(&self) -> &'static str {
        match self {
            LevelTopology::Empty => "Empty",
            LevelTopology::OriginOnly => "OriginOnly",
            LevelTopology::SingleOval => "SingleOval",
            LevelTopology::TwoOvals => "TwoOvals",
            LevelTopology::HomoclinicFigure => "HomoclinicFigure",
            LevelTopology::PointPair => "PointPair",
        }
    }
}

pub fn level_topology(pp: &ParamPair, h: f64) -> LevelTopology {
    if h > 0.0 {
        return LevelTopology::SingleOval;
    }
    if !pp.has_saddle() {
        // V is non-negative: nothing below the origin level.
        return if h == 0.0 {
            LevelTopology::OriginOnly
        } else {
            LevelTopology::Empty
        };
    }
    if h == 0.0 {
        return LevelTopology::HomoclinicFigure;
    }
    let h_min = critical_values(pp).h_min;
    if h > h_min {
        LevelTopology::TwoOvals
    } else if h == h_min {
        LevelTopology::PointPair
    } else {
        LevelTopology::Empty
    }
}

/// An ordered union of disjoint closed intervals on the real line.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Self {
        intervals.retain(|(lo, hi)| lo <= hi);
        intervals.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        for w in intervals.windows(2) {
            debug_assert!(w[0].1 < w[1].0, "intervals must be disjoint");
        }
        IntervalSet { intervals }
    }

    pub fn empty() -> Self {
        IntervalSet::default()
    }

    pub fn count(&self) -> usize {
        self.intervals.len()
    }

    pub fn as_slice(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= x && x <= hi)
    }

    /// Total length of the union.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    /// Each interval grown by `eps` on both sides; overlaps merged.
    pub fn dilate(&self, eps: f64) -> IntervalSet {
        let grown: Vec<_> = self
            .intervals
            .iter()
            .map(|&(lo, hi)| (lo - eps, hi + eps))
            .collect();
        IntervalSet::union_of(grown)
    }

    /// Union with another set, merging overlaps.
    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        IntervalSet::union_of(all)
    }

    /// Whether every interval of `self` sits inside some interval of `other`.
    pub fn contained_in(&self, other: &IntervalSet) -> bool {
        self.intervals
            .iter()
            .all(|&(lo, hi)| other.intervals.iter().any(|&(a, b)| a <= lo && hi <= b))
    }

    fn union_of(mut intervals: Vec<(f64, f64)>) -> IntervalSet {
        intervals.retain(|(lo, hi)| lo <= hi);
        intervals.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (lo, hi) in intervals {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        IntervalSet { intervals: merged }
    }
}

/// Which of the two first integrals a projection refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionSide {
    VBa,
    VAb,
}

/// x-axis projection of `{V = h}` for the requested parameter order.
///
/// Solves the quadratic (in `u = x^2`) part of the discriminant in closed
/// form with the sign-aware quadratic formula, then maps the `u`-interval
/// back to `x`. One symmetric interval containing 0 for `h >= 0`; two
/// symmetric intervals for `h_min < h < 0`; single points at `h = h_min`.
pub fn level_projection(pp: &ParamPair, h: f64, which: ProjectionSide) -> Result<IntervalSet> {
    let (a, b) = (pp.a(), pp.b());
    let (lead, tail) = match which {
        ProjectionSide::VBa => (a, b),
        ProjectionSide::VAb => (b, a),
    };
    // R(u) = -4*lead*u^2 + (1 - 4ab + 4h) u + 4*tail*h, u = x^2.
    let qa = -4.0 * lead;
    let qb = 1.0 - 4.0 * a * b + 4.0 * h;
    let qc = 4.0 * tail * h;
    let h_min = critical_values(pp).h_min;
    let empty = || Error::EmptyLevel { h, h_min };

    if h == 0.0 {
        // R(u) = u (qb - 4*lead*u): projection [0, qb / (4 lead)] or {0}.
        if qb <= 0.0 {
            return Ok(IntervalSet::new(vec![(0.0, 0.0)]));
        }
        let xm = (qb / (4.0 * lead)).sqrt();
        return Ok(IntervalSet::new(vec![(-xm, xm)]));
    }

    let mut disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        // Exactly at h = h_min the discriminant is a true zero and rounding
        // may land just below it; trust the exact topology split there.
        if level_topology(pp, h) != LevelTopology::Empty {
            disc = 0.0;
        } else {
            return Err(empty());
        }
    }
    // Roots of the downward parabola, qa < 0. Sign-aware form: q carries the
    // large root to avoid cancellation when |qb| >> sqrt(disc)*0.
    let sq = disc.sqrt();
    let q = -0.5 * (qb + qb.signum() * sq);
    let (mut u_lo, mut u_hi) = if q == 0.0 {
        (0.0, 0.0)
    } else {
        let r1 = q / qa;
        let r2 = qc / q;
        (r1.min(r2), r1.max(r2))
    };
    // The region {R >= 0} is [u_lo, u_hi]; intersect with u >= 0.
    if u_hi < 0.0 {
        return Err(empty());
    }
    u_lo = u_lo.max(0.0);
    u_hi = u_hi.max(0.0);
    if h > 0.0 {
        // u_lo == 0 after clamping (R(0) = 4*tail*h > 0).
        Ok(IntervalSet::new(vec![(-u_hi.sqrt(), u_hi.sqrt())]))
    } else {
        // Two symmetric intervals, possibly degenerate (h == h_min).
        let (lo, hi) = (u_lo.sqrt(), u_hi.sqrt());
        if lo == hi {
            if lo == 0.0 {
                return Ok(IntervalSet::new(vec![(0.0, 0.0)]));
            }
            return Ok(IntervalSet::new(vec![(-hi, -lo), (lo, hi)]));
        }
        Ok(IntervalSet::new(vec![(-hi, -lo), (lo, hi)]))
    }
}

/// Full description of one level: its class and both projections.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelDescriptor {
    pub h: f64,
    pub topology: LevelTopology,
    pub projection_v_ba: IntervalSet,
    pub projection_v_ab: IntervalSet,
}

pub fn level_descriptor(pp: &ParamPair, h: f64) -> LevelDescriptor {
    let topology = level_topology(pp, h);
    let proj = |side| level_projection(pp, h, side).unwrap_or_else(|_| IntervalSet::empty());
    LevelDescriptor {
        h,
        topology,
        projection_v_ba: proj(ProjectionSide::VBa),
        projection_v_ab: proj(ProjectionSide::VAb),
    }
}

/// Which connected component of a level set to work on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// The single closed curve of a positive level (or the origin itself on
    /// the `h = 0`, `ab >= 1/4` level).
    Main,
    /// The component around `P_+` (right loop / right oval / `P_+` itself).
    PositiveOval,
    /// The mirror component around `P_-`.
    NegativeOval,
}

impl Branch {
    pub fn name(&self) -> &'static str {
        match self {
            Branch::Main => "Main",
            Branch::PositiveOval => "PositiveOval",
            Branch::NegativeOval => "NegativeOval",
        }
    }
}

/// A point on `{V_{b,a} = h}` with `|V - h| <= 1e-12 * max(1, |h|)`.
///
/// Positive levels are entered along `x = 0`; negative levels and the
/// homoclinic figure along `x = x_+` (both choices keep the seeding quadratic
/// well conditioned), followed by a Newton polish in `y`.
pub fn point_on_level(pp: &ParamPair, h: f64, branch: Branch) -> Result<PlanePoint> {
    let topology = level_topology(pp, h);
    let mismatch = || Error::BranchMismatch {
        branch: branch.name(),
        topology: topology.name(),
    };
    let point = match (topology, branch) {
        (LevelTopology::Empty, _) => {
            return Err(Error::EmptyLevel {
                h,
                h_min: critical_values(pp).h_min,
            })
        }
        (LevelTopology::OriginOnly, Branch::Main) => PlanePoint::ORIGIN,
        (LevelTopology::OriginOnly, _) => return Err(mismatch()),
        (LevelTopology::SingleOval, Branch::Main) => {
            PlanePoint::new(0.0, (h / pp.b()).sqrt())
        }
        (LevelTopology::SingleOval, _) => return Err(mismatch()),
        (LevelTopology::PointPair, Branch::PositiveOval) => fixed_points(pp).pair.unwrap().0,
        (LevelTopology::PointPair, Branch::NegativeOval) => fixed_points(pp).pair.unwrap().1,
        (LevelTopology::PointPair, Branch::Main) => return Err(mismatch()),
        (LevelTopology::TwoOvals | LevelTopology::HomoclinicFigure, Branch::Main) => {
            return Err(mismatch())
        }
        (LevelTopology::TwoOvals | LevelTopology::HomoclinicFigure, side) => {
            let (p_plus, _) = fixed_points(pp).pair.unwrap();
            let x = p_plus.x;
            // (x^2 + b) y^2 - x y + (a x^2 - h) = 0, upper root. The
            // discriminant is a true zero at h = h_min and can round just
            // below it for levels within an ulp of the bottom; the topology
            // split already vouched for non-emptiness.
            let qa = x * x + pp.b();
            let qb = -x;
            let qc = pp.a() * x * x - h;
            let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
            let y = (-qb + disc.sqrt()) / (2.0 * qa);
            let p = PlanePoint::new(x, y);
            match side {
                Branch::PositiveOval => p,
                Branch::NegativeOval => p.neg(),
                Branch::Main => unreachable!(),
            }
        }
    };
    Ok(polish_onto_level(pp, h, point))
}

/// Newton iteration in `y` driving `V(x0, y) - h` to zero.
fn polish_onto_level(pp: &ParamPair, h: f64, p: PlanePoint) -> PlanePoint {
    let v = IntegralSpec::v(*pp);
    let mut y = p.y;
    let x = p.x;
    let tol = 1e-13 * 1.0_f64.max(h.abs());
    for _ in 0..8 {
        let f = eval_integral(&v, PlanePoint::new(x, y)) - h;
        if f.abs() <= tol {
            break;
        }
        let dv = 2.0 * y * (x * x + pp.b()) - x;
        if dv == 0.0 {
            break;
        }
        y -= f / dv;
    }
    PlanePoint::new(x, y)
}
