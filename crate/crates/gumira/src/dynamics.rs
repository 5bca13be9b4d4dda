//! The elementary maps, their inverses and 2-periodic compositions, and
//! orbit / scalar-sequence generation in both time directions.
//!
//! Two one-parameter families act on the plane:
//!
//! ```text
//! F_alpha(x, y) = (y, -x + alpha*y / (1 + y^2))
//! G_beta(x, y)  = (y, -x + y / (beta + y^2))
//! ```
//!
//! Alternating two parameter values gives the composed maps
//! `G_{b,a} = G_b ∘ G_a` and `F_{b,a} = F_b ∘ F_a`; the first step of every
//! orbit and every scalar sequence uses the `a` member of the cycle.

use crate::error::{Error, Result};
use crate::invariants::{eval_integral, IntegralSpec};
use crate::params::ParamPair;

/// Any coordinate beyond this magnitude (or a non-finite one) trips the
/// diverged-orbit error. Only the `F` family can reach it.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// A point of the phase plane. Coordinates are expected to stay finite;
/// the iteration guard enforces this dynamically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub fn new(x: f64, y: f64) -> Self {
        PlanePoint { x, y }
    }

    pub const ORIGIN: PlanePoint = PlanePoint { x: 0.0, y: 0.0 };

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: &PlanePoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn neg(&self) -> PlanePoint {
        PlanePoint::new(-self.x, -self.y)
    }

    fn beyond_guard(&self) -> bool {
        !self.is_finite() || self.x.abs() > DIVERGENCE_LIMIT || self.y.abs() > DIVERGENCE_LIMIT
    }
}

/// Which one-parameter family a recurrence or composed map belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `x_{n+2} = -x_n + x_{n+1} / (beta_n + x_{n+1}^2)` (integrable composition).
    G,
    /// `x_{n+2} = -x_n + alpha_n x_{n+1} / (1 + x_{n+1}^2)` (chaotic composition).
    F,
}

/// The map a step applies.
///
/// `ComposedG(pp)` is `G_b ∘ G_a` and `ComposedF(pp)` is `F_b ∘ F_a`, i.e.
/// the `a` member of the pair acts first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapKind {
    ElemG { beta: f64 },
    ElemF { alpha: f64 },
    ComposedG(ParamPair),
    ComposedF(ParamPair),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// A map together with the time direction it is iterated in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapSpec {
    pub kind: MapKind,
    pub direction: Direction,
}

impl MapSpec {
    pub fn composed_g(pp: ParamPair) -> Self {
        MapSpec {
            kind: MapKind::ComposedG(pp),
            direction: Direction::Forward,
        }
    }

    pub fn composed_f(pp: ParamPair) -> Self {
        MapSpec {
            kind: MapKind::ComposedF(pp),
            direction: Direction::Forward,
        }
    }

    pub fn composed(family: Family, pp: ParamPair) -> Self {
        match family {
            Family::G => Self::composed_g(pp),
            Family::F => Self::composed_f(pp),
        }
    }

    pub fn reversed(self) -> Self {
        MapSpec {
            kind: self.kind,
            direction: match self.direction {
                Direction::Forward => Direction::Backward,
                Direction::Backward => Direction::Forward,
            },
        }
    }

    /// One application, honouring the stored direction.
    pub fn apply(&self, p: PlanePoint) -> PlanePoint {
        match self.direction {
            Direction::Forward => step_forward(self.kind, p),
            Direction::Backward => step_inverse(self.kind, p),
        }
    }
}

pub fn step_elem_g(beta: f64, p: PlanePoint) -> PlanePoint {
    debug_assert!(beta > 0.0);
    PlanePoint::new(p.y, -p.x + p.y / (beta + p.y * p.y))
}

pub fn step_elem_f(alpha: f64, p: PlanePoint) -> PlanePoint {
    debug_assert!(alpha > 0.0);
    PlanePoint::new(p.y, -p.x + alpha * p.y / (1.0 + p.y * p.y))
}

fn step_elem_g_inv(beta: f64, p: PlanePoint) -> PlanePoint {
    PlanePoint::new(-p.y + p.x / (beta + p.x * p.x), p.x)
}

fn step_elem_f_inv(alpha: f64, p: PlanePoint) -> PlanePoint {
    PlanePoint::new(-p.y + alpha * p.x / (1.0 + p.x * p.x), p.x)
}

/// Forward application of `kind`. Composed maps are evaluated as the two
/// elementary steps; the closed rational forms serve only as test oracles.
pub fn step_forward(kind: MapKind, p: PlanePoint) -> PlanePoint {
    match kind {
        MapKind::ElemG { beta } => step_elem_g(beta, p),
        MapKind::ElemF { alpha } => step_elem_f(alpha, p),
        MapKind::ComposedG(pp) => step_elem_g(pp.b(), step_elem_g(pp.a(), p)),
        MapKind::ComposedF(pp) => step_elem_f(pp.b(), step_elem_f(pp.a(), p)),
    }
}

/// Exact algebraic inverse of `kind`; composed inverses apply the elementary
/// inverses in reverse order.
pub fn step_inverse(kind: MapKind, p: PlanePoint) -> PlanePoint {
    match kind {
        MapKind::ElemG { beta } => step_elem_g_inv(beta, p),
        MapKind::ElemF { alpha } => step_elem_f_inv(alpha, p),
        MapKind::ComposedG(pp) => step_elem_g_inv(pp.a(), step_elem_g_inv(pp.b(), p)),
        MapKind::ComposedF(pp) => step_elem_f_inv(pp.a(), step_elem_f_inv(pp.b(), p)),
    }
}

/// One composed step (pre: `kind` is `ComposedG` or `ComposedF`).
pub fn step_composed(spec: &MapSpec, p: PlanePoint) -> PlanePoint {
    debug_assert!(matches!(
        spec.kind,
        MapKind::ComposedG(_) | MapKind::ComposedF(_)
    ));
    spec.apply(p)
}

/// The linear scaling `Psi(x, y) = (sqrt(alpha) x, sqrt(alpha) y)` that
/// conjugates `F_alpha` to `G_{1/alpha}` via `G_{1/alpha} = Psi^{-1} ∘ F_alpha ∘ Psi`.
pub fn conjugacy_psi(alpha: f64, p: PlanePoint, inverse: bool) -> PlanePoint {
    debug_assert!(alpha > 0.0);
    let s = if inverse {
        1.0 / alpha.sqrt()
    } else {
        alpha.sqrt()
    };
    PlanePoint::new(s * p.x, s * p.y)
}

/// A computed orbit: the start point, the visited points with signed step
/// indices, and optionally the value of an attached integral at each step.
#[derive(Debug, Clone)]
pub struct OrbitSample {
    pub start: PlanePoint,
    pub points: Vec<(i64, PlanePoint)>,
    pub invariant_trace: Option<Vec<f64>>,
}

impl OrbitSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The scalar sequence read off the orbit: `x` of every point plus the
    /// final `y` (each composed step contributes two consecutive terms).
    pub fn scalar_terms(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.points.iter().map(|(_, p)| p.x).collect();
        if let Some(&(_, last)) = self.points.last() {
            out.push(last.y);
        }
        out
    }
}

/// Forward-fold an orbit without storing it. The callback receives
/// `(step, point)` starting with `(0, p0)`; returns the diverged step, if any.
pub fn fold_orbit<F>(spec: &MapSpec, p0: PlanePoint, n_steps: usize, mut f: F) -> Option<usize>
where
    F: FnMut(usize, PlanePoint),
{
    let mut p = p0;
    f(0, p);
    for step in 1..=n_steps {
        p = spec.apply(p);
        if p.beyond_guard() {
            return Some(step);
        }
        f(step, p);
    }
    None
}

/// Orbit of `n_steps` applications of `spec` from `p0` (so `n_steps + 1` points).
pub fn iterate(spec: &MapSpec, p0: PlanePoint, n_steps: usize) -> Result<OrbitSample> {
    iterate_impl(spec, p0, n_steps, None)
}

/// Like [`iterate`], with `integral` evaluated at every visited point.
pub fn iterate_traced(
    spec: &MapSpec,
    p0: PlanePoint,
    n_steps: usize,
    integral: &IntegralSpec,
) -> Result<OrbitSample> {
    iterate_impl(spec, p0, n_steps, Some(integral))
}

fn iterate_impl(
    spec: &MapSpec,
    p0: PlanePoint,
    n_steps: usize,
    integral: Option<&IntegralSpec>,
) -> Result<OrbitSample> {
    assert!(n_steps >= 1, "n_steps must be at least 1");
    let sign: i64 = match spec.direction {
        Direction::Forward => 1,
        Direction::Backward => -1,
    };
    let mut points = Vec::with_capacity(n_steps + 1);
    let mut trace = integral.map(|_| Vec::with_capacity(n_steps + 1));
    let mut p = p0;
    for step in 0..=n_steps {
        if step > 0 {
            p = spec.apply(p);
            if p.beyond_guard() {
                let (_, last): (i64, PlanePoint) = points[step - 1];
                return Err(Error::DivergedOrbit {
                    step,
                    x: last.x,
                    y: last.y,
                });
            }
        }
        points.push((sign * step as i64, p));
        if let (Some(tr), Some(spec)) = (trace.as_mut(), integral) {
            tr.push(eval_integral(spec, p));
        }
    }
    Ok(OrbitSample {
        start: p0,
        points,
        invariant_trace: trace,
    })
}

/// The scalar sequence of the 2-periodic recurrence from the seeds
/// `(x1, x2)`, with the parameter cycle applied as `a, b, a, b, ...`.
///
/// `Forward` returns `x_1, x_2, x_3, ..., x_{n_terms}`. `Backward` extends
/// to lower indices using the exact inverse relation and returns
/// `x_1, x_2, x_0, x_{-1}, ..., ` i.e. the list always starts with the two
/// seeds and then grows in the requested direction.
pub fn recurrence_sequence(
    family: Family,
    pp: ParamPair,
    x1: f64,
    x2: f64,
    n_terms: usize,
    direction: Direction,
) -> Result<Vec<f64>> {
    assert!(n_terms >= 2, "need at least the two seed terms");
    let mut out = Vec::with_capacity(n_terms);
    out.push(x1);
    out.push(x2);
    match direction {
        Direction::Forward => {
            // x_{n+2} = -x_n + step(x_{n+1}); the step producing x_3 uses `a`.
            let mut prev = x1;
            let mut cur = x2;
            for k in 0..n_terms.saturating_sub(2) {
                let beta = if k % 2 == 0 { pp.a() } else { pp.b() };
                let next = match family {
                    Family::G => -prev + cur / (beta + cur * cur),
                    Family::F => -prev + beta * cur / (1.0 + cur * cur),
                };
                if !next.is_finite() || next.abs() > DIVERGENCE_LIMIT {
                    return Err(Error::DivergedOrbit {
                        step: k + 1,
                        x: prev,
                        y: cur,
                    });
                }
                prev = cur;
                cur = next;
                out.push(next);
            }
        }
        Direction::Backward => {
            // x_n = -x_{n+2} + step(x_{n+1}): unwinding the same relation.
            // The step that produced x_3 from (x_1, x_2) used `a`, so going
            // down from (x_1, x_2) the first reconstructed step uses `b`.
            let mut above = x2;
            let mut cur = x1;
            for k in 0..n_terms.saturating_sub(2) {
                let beta = if k % 2 == 0 { pp.b() } else { pp.a() };
                let below = match family {
                    Family::G => -above + cur / (beta + cur * cur),
                    Family::F => -above + beta * cur / (1.0 + cur * cur),
                };
                if !below.is_finite() || below.abs() > DIVERGENCE_LIMIT {
                    return Err(Error::DivergedOrbit {
                        step: k + 1,
                        x: above,
                        y: cur,
                    });
                }
                above = cur;
                cur = below;
                out.push(below);
            }
        }
    }
    Ok(out)
}
