//! Rotation numbers of the integrable composition on its invariant ovals.
//!
//! Two estimators are provided and cross-check each other:
//!
//! * **winding** — iterate the map and accumulate the turned angle around
//!   the enclosed centre. Cheap and precise while single steps stay clearly
//!   below half a turn; a fold guard hands anything else over to the flow.
//! * **flow** — the level set is a closed orbit of the Hamiltonian field of
//!   the first integral, and one map step equals the time-`tau` flow along
//!   it. The rotation number is `tau / T` with `T` the orbit period.
//!
//! Both report the orientation-free representative in `(0, 1/2]`: the map
//! may traverse an oval against the orientation of the field, so the flow
//! timing is normalised to `min(tau, T - tau)`.

use crate::dynamics::{step_forward, MapKind, PlanePoint};
use crate::error::{Error, Result};
use crate::geometry::{fixed_points, level_topology, point_on_level, Branch, LevelTopology};
use crate::invariants::{eval_integral, IntegralSpec};
use crate::params::ParamPair;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Hamiltonian vector field of `V_{b,a}`:
/// `X = (-dV/dy, dV/dx) = (x - 2by - 2x^2 y, 2ax - y + 2x y^2)`.
pub fn vector_field(pp: &ParamPair, p: PlanePoint) -> (f64, f64) {
    let (a, b) = (pp.a(), pp.b());
    let (x, y) = (p.x, p.y);
    (
        x - 2.0 * b * y - 2.0 * x * x * y,
        2.0 * a * x - y + 2.0 * x * y * y,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoMethod {
    Winding,
    Flow,
}

/// An estimated rotation number in `(0, 1)` with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationEstimate {
    pub rho: f64,
    pub method: RhoMethod,
    /// Iterate count for the winding method; `None` for the flow method.
    pub n_iterates: Option<usize>,
    pub uncertainty: f64,
}

/// Timing data of the flow interpretation: the full period of the closed
/// orbit and the (orientation-normalised) time realising one map step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowTiming {
    pub t_period: f64,
    pub tau: f64,
    /// Distance between the seed and the refined first-return point.
    pub closure_residual: f64,
    /// Max relative deviation of the integral along the integration.
    pub v_relative_drift: f64,
}

/// Where the winding is measured from for a given branch.
fn branch_center(pp: &ParamPair, branch: Branch) -> PlanePoint {
    match branch {
        Branch::Main => PlanePoint::ORIGIN,
        Branch::PositiveOval => fixed_points(pp).pair.map(|(p, _)| p).unwrap_or(PlanePoint::ORIGIN),
        Branch::NegativeOval => fixed_points(pp).pair.map(|(_, m)| m).unwrap_or(PlanePoint::ORIGIN),
    }
}

fn require_oval(pp: &ParamPair, h: f64) -> Result<LevelTopology> {
    let topo = level_topology(pp, h);
    match topo {
        LevelTopology::SingleOval | LevelTopology::TwoOvals => Ok(topo),
        other => Err(Error::WrongTopology {
            h,
            topology: other.name(),
        }),
    }
}

/// Principal value of an angle difference, in `(-pi, pi]`.
fn wrap_angle(mut d: f64) -> f64 {
    while d > PI {
        d -= 2.0 * PI;
    }
    while d <= -PI {
        d += 2.0 * PI;
    }
    d
}

/// A single step of the winding estimator may not exceed this angle; beyond
/// it the nearest-multiple unwrap becomes unreliable (the true advance may
/// have crossed half a turn) and the flow takes over.
pub const WINDING_STEP_GUARD: f64 = 0.9 * PI;

/// Rotation number of `G_{b,a}` on `{V_{b,a} = h}` by angle winding around
/// the enclosed centre, from a seed produced by `point_on_level`.
///
/// Uncertainty is the `O(1/n)` winding truncation. If any single step turns
/// by more than [`WINDING_STEP_GUARD`], or two steps turn opposite ways,
/// the estimate is restarted with the flow method and tagged accordingly.
pub fn estimate_winding(
    pp: &ParamPair,
    h: f64,
    branch: Branch,
    n_iterates: usize,
) -> Result<RotationEstimate> {
    assert!(n_iterates >= 1);
    require_oval(pp, h)?;
    let seed = point_on_level(pp, h, branch)?;
    let center = branch_center(pp, branch);
    match winding_from(pp, seed, center, n_iterates) {
        Some(rho) => Ok(RotationEstimate {
            rho,
            method: RhoMethod::Winding,
            n_iterates: Some(n_iterates),
            uncertainty: 1.0 / n_iterates as f64,
        }),
        None => flow_rotation(pp, h, branch).map(|(_, est)| est),
    }
}

/// Accumulated-angle estimate; `None` when the fold guard trips.
///
/// The map on an invariant oval is conjugate to a rigid rotation, so every
/// wrapped step must turn the same way; a step beyond the guard angle or a
/// sign disagreement means the true advance may have crossed half a turn
/// (the wrap then folds it back) and the estimate cannot be trusted.
fn winding_from(
    pp: &ParamPair,
    seed: PlanePoint,
    center: PlanePoint,
    n_iterates: usize,
) -> Option<f64> {
    let kind = MapKind::ComposedG(*pp);
    let mut p = seed;
    let mut theta = (p.y - center.y).atan2(p.x - center.x);
    let mut total = 0.0;
    let mut direction = 0.0_f64;
    for _ in 0..n_iterates {
        p = step_forward(kind, p);
        let t = (p.y - center.y).atan2(p.x - center.x);
        let d = wrap_angle(t - theta);
        if d.abs() > WINDING_STEP_GUARD {
            return None;
        }
        if d != 0.0 {
            if direction == 0.0 {
                direction = d.signum();
            } else if d.signum() != direction {
                return None;
            }
        }
        total += d;
        theta = t;
    }
    Some(total.abs() / (2.0 * PI * n_iterates as f64))
}

/// Signed wrapped angle from the level seed to its `q`-th map image around
/// the branch centre, plus the closure distance. The components of a level
/// set are star-shaped about their centre, so the angle vanishes exactly on
/// a `p/q`-resonant level; the period finder bisects on its sign to polish
/// resonant levels far beyond winding resolution.
pub(crate) fn q_step_deviation(
    pp: &ParamPair,
    h: f64,
    branch: Branch,
    q: usize,
) -> Result<(f64, f64)> {
    require_oval(pp, h)?;
    let seed = point_on_level(pp, h, branch)?;
    let center = branch_center(pp, branch);
    let kind = MapKind::ComposedG(*pp);
    let mut p = seed;
    for _ in 0..q {
        p = step_forward(kind, p);
    }
    let theta0 = (seed.y - center.y).atan2(seed.x - center.x);
    let theta1 = (p.y - center.y).atan2(p.x - center.x);
    Ok((wrap_angle(theta1 - theta0), p.dist(&seed)))
}

// ---------------------------------------------------------------------------
// Flow timing
// ---------------------------------------------------------------------------

/// Absolute integration tolerance per unit time at unit phase-space scale;
/// the error budget grows with `max(1, |x|, |y|)` so that huge ovals remain
/// tractable.
const FLOW_TOL: f64 = 1e-10;
const MAX_FLOW_STEPS: usize = 200_000_000;
/// Refinement target for section-crossing times, relative.
const CROSSING_TIME_TOL: f64 = 1e-12;

#[derive(Clone, Copy)]
struct FlowState {
    p: PlanePoint,
    t: f64,
}

fn rk4_step(pp: &ParamPair, p: PlanePoint, dt: f64) -> PlanePoint {
    let (k1x, k1y) = vector_field(pp, p);
    let (k2x, k2y) = vector_field(
        pp,
        PlanePoint::new(p.x + 0.5 * dt * k1x, p.y + 0.5 * dt * k1y),
    );
    let (k3x, k3y) = vector_field(
        pp,
        PlanePoint::new(p.x + 0.5 * dt * k2x, p.y + 0.5 * dt * k2y),
    );
    let (k4x, k4y) = vector_field(pp, PlanePoint::new(p.x + dt * k3x, p.y + dt * k3y));
    PlanePoint::new(
        p.x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        p.y + dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
    )
}

/// One accepted adaptive step (step doubling with Richardson extrapolation).
/// Returns the new state and the proposed next step size.
fn adaptive_step(pp: &ParamPair, state: FlowState, mut dt: f64) -> Result<(FlowState, f64)> {
    for _ in 0..64 {
        let full = rk4_step(pp, state.p, dt);
        let half = rk4_step(pp, state.p, 0.5 * dt);
        let two = rk4_step(pp, half, 0.5 * dt);
        let err = full.dist(&two) / 15.0;
        let scale = 1.0_f64.max(state.p.x.abs()).max(state.p.y.abs());
        let budget = FLOW_TOL * dt * scale;
        if err <= budget {
            let next = PlanePoint::new(
                two.x + (two.x - full.x) / 15.0,
                two.y + (two.y - full.y) / 15.0,
            );
            let grow = if err > 0.0 {
                (budget / err).powf(0.25).min(4.0)
            } else {
                4.0
            };
            return Ok((
                FlowState {
                    p: next,
                    t: state.t + dt,
                },
                dt * (0.9 * grow).max(0.2),
            ));
        }
        dt *= (0.9 * (budget / err).powf(0.25)).clamp(0.2, 0.9);
        if dt < 1e-15 * (1.0 + state.t.abs()) {
            return Err(Error::IntegrationFailure);
        }
    }
    Err(Error::IntegrationFailure)
}

/// Passage target: refined closest approaches farther than `accept_radius`
/// from `refp` are not the sought passage and are skipped.
struct Target {
    refp: PlanePoint,
    accept_radius: f64,
}

impl Target {
    fn at(refp: PlanePoint, center: PlanePoint) -> Target {
        Target {
            accept_radius: 1e-4 * (1.0 + refp.dist(&center)),
            refp,
        }
    }

    /// Radial speed away from the target: negative while approaching,
    /// positive while receding, zero exactly at closest approach. A plane
    /// section can be grazed inside one macro step near the flat tips of
    /// large ovals; a distance minimum cannot.
    fn eval(&self, pp: &ParamPair, p: PlanePoint) -> f64 {
        let (fx, fy) = vector_field(pp, p);
        (p.x - self.refp.x) * fx + (p.y - self.refp.y) * fy
    }
}

struct Crossing {
    t: f64,
    residual: f64,
}

/// Integrate forward from `start` until a closest approach to `target`
/// within its acceptance radius; optionally only after the trajectory has
/// wound at least `min_winding` radians around `center`.
///
/// Tracks the relative drift of `V` against `h` in `v_drift`.
fn flow_to_target(
    pp: &ParamPair,
    start: PlanePoint,
    target: &Target,
    center: PlanePoint,
    min_winding: f64,
    t_cap: f64,
    h: f64,
    v_drift: &mut f64,
) -> Result<Crossing> {
    let v_spec = IntegralSpec::v(*pp);
    let h_scale = 1.0_f64.max(h.abs());
    let mut state = FlowState { p: start, t: 0.0 };
    let mut dt = 1e-3;
    let mut g_prev = target.eval(pp, state.p);
    let mut winding = 0.0;
    let mut theta = (start.y - center.y).atan2(start.x - center.x);
    for _ in 0..MAX_FLOW_STEPS {
        let (next, dt_next) = adaptive_step(pp, state, dt)?;
        let g = target.eval(pp, next.p);
        let t_new = (next.p.y - center.y).atan2(next.p.x - center.x);
        winding += wrap_angle(t_new - theta).abs();
        theta = t_new;
        *v_drift = v_drift.max((eval_integral(&v_spec, next.p) - h).abs() / h_scale);
        if g_prev < 0.0 && g >= 0.0 && winding >= min_winding {
            if let Some(crossing) = refine_closest(pp, &state, next.t, g_prev, g, target) {
                if crossing.residual <= target.accept_radius {
                    return Ok(crossing);
                }
            }
        }
        if next.t > t_cap {
            return Err(Error::NoReturn);
        }
        g_prev = g;
        state = next;
        dt = dt_next;
    }
    Err(Error::NoReturn)
}

/// Secant refinement of a bracketed closest approach. Re-integrates from the
/// bracket start with fixed substeps, so accuracy matches the macro step.
fn refine_closest(
    pp: &ParamPair,
    from: &FlowState,
    t_hi: f64,
    g_lo: f64,
    g_hi: f64,
    target: &Target,
) -> Option<Crossing> {
    let (mut tlo, mut thi) = (from.t, t_hi);
    let (mut glo, mut ghi) = (g_lo, g_hi);
    let mut best: Option<Crossing> = None;
    for _ in 0..80 {
        if ghi == glo {
            break;
        }
        let mut tm = thi - ghi * (thi - tlo) / (ghi - glo);
        if !(tlo < tm && tm < thi) {
            tm = 0.5 * (tlo + thi);
        }
        let dt = (tm - from.t) / 4.0;
        let mut p = from.p;
        for _ in 0..4 {
            p = rk4_step(pp, p, dt);
        }
        let gm = target.eval(pp, p);
        best = Some(Crossing {
            t: tm,
            residual: p.dist(&target.refp),
        });
        if (thi - tlo) <= CROSSING_TIME_TOL * thi.abs().max(1e-9) {
            break;
        }
        if gm < 0.0 {
            tlo = tm;
            glo = gm;
        } else {
            thi = tm;
            ghi = gm;
        }
    }
    best
}

/// Period `T` of the level-set orbit of the Hamiltonian field, the flow time
/// realising one map step, and the resulting rotation number `tau / T`.
pub fn flow_rotation(
    pp: &ParamPair,
    h: f64,
    branch: Branch,
) -> Result<(FlowTiming, RotationEstimate)> {
    require_oval(pp, h)?;
    let seed = point_on_level(pp, h, branch)?;
    let center = branch_center(pp, branch);
    let image = step_forward(MapKind::ComposedG(*pp), seed);
    let mut v_drift = 0.0_f64;

    let return_target = Target::at(seed, center);
    let ret = flow_to_target(
        pp,
        seed,
        &return_target,
        center,
        2.0 * PI - 0.5,
        f64::INFINITY,
        h,
        &mut v_drift,
    )?;
    let t_period = ret.t;

    let image_target = Target::at(image, center);
    let hit = flow_to_target(
        pp,
        seed,
        &image_target,
        center,
        0.0,
        1.2 * t_period,
        h,
        &mut v_drift,
    )?;
    let tau_raw = hit.t;

    let rho_raw = tau_raw / t_period;
    // The map may run against the field orientation; report the
    // representative in (0, 1/2].
    let rho = rho_raw.min(1.0 - rho_raw);
    let timing = FlowTiming {
        t_period,
        tau: rho * t_period,
        closure_residual: ret.residual,
        v_relative_drift: v_drift,
    };
    let estimate = RotationEstimate {
        rho,
        method: RhoMethod::Flow,
        n_iterates: None,
        uncertainty: (CROSSING_TIME_TOL * 1e2).max(ret.residual / t_period),
    };
    Ok((timing, estimate))
}

// ---------------------------------------------------------------------------
// Closed-form limits and the origin spectrum
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoLimit {
    /// `h -> 0^+`: `0` when `ab < 1/4`, else `arccos(1/(2ab) - 1) / (2 pi)`.
    AtZeroPlus,
    /// `h -> +infinity`: always `1/2`.
    AtInfinity,
    /// `h -> h_min` (toward `P_±`, needs `ab < 1/4`):
    /// `arccos(1 - 16 sqrt(ab) + 32 ab) / (2 pi)`.
    AtPpm,
}

pub fn limit_rho(pp: &ParamPair, at: RhoLimit) -> Result<f64> {
    let ab = pp.product();
    match at {
        RhoLimit::AtZeroPlus => {
            if ab < 0.25 {
                Ok(0.0)
            } else {
                Ok((1.0 / (2.0 * ab) - 1.0).clamp(-1.0, 1.0).acos() / (2.0 * PI))
            }
        }
        RhoLimit::AtInfinity => Ok(0.5),
        RhoLimit::AtPpm => {
            if ab >= 0.25 {
                return Err(Error::DomainError {
                    context: "rho limit at P_± requires ab < 1/4",
                });
            }
            let s = ab.sqrt();
            Ok((1.0 - 16.0 * s + 32.0 * ab).clamp(-1.0, 1.0).acos() / (2.0 * PI))
        }
    }
}

/// Eigenvalues of `DG_{b,a}(0, 0)`.
///
/// The Jacobian has trace `1/(ab) - 2` and determinant 1: a conjugate pair
/// `(1 - 2ab ± i sqrt(4ab - 1)) / (2ab)` on the unit circle for `ab > 1/4`,
/// a reciprocal real pair (hyperbolic saddle) for `ab < 1/4`.
pub fn spec_dg_origin(pp: &ParamPair) -> (Complex64, Complex64) {
    let ab = pp.product();
    let tr = 1.0 / ab - 2.0;
    let disc = tr * tr - 4.0;
    if disc < 0.0 {
        let re = 0.5 * tr;
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(re, im), Complex64::new(re, -im))
    } else {
        let sq = disc.sqrt();
        // sign-aware: the larger-magnitude root first, its reciprocal second
        let big = 0.5 * (tr + tr.signum() * sq);
        (Complex64::new(big, 0.0), Complex64::new(1.0 / big, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::critical_values;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn field_vanishes_at_equilibria_and_is_tangent() {
        let pp = ParamPair::new(0.01, 0.49).unwrap();
        assert_eq!(vector_field(&pp, PlanePoint::ORIGIN), (0.0, 0.0));
        let (p_plus, p_minus) = fixed_points(&pp).pair.unwrap();
        for p in [p_plus, p_minus] {
            let (fx, fy) = vector_field(&pp, p);
            assert!(fx.hypot(fy) < 1e-14);
        }

        // grad V . X = 0 identically
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let p = PlanePoint::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let (fx, fy) = vector_field(&pp, p);
            let gx = 2.0 * p.x * (p.y * p.y + pp.a()) - p.y;
            let gy = 2.0 * p.y * (p.x * p.x + pp.b()) - p.x;
            let dot = gx * fx + gy * fy;
            let scale = (gx.hypot(gy) * fx.hypot(fy)).max(1.0);
            assert!(dot.abs() <= 1e-12 * scale, "dot = {dot}");
        }
    }

    #[test]
    fn winding_matches_small_level_limit() {
        let pp = ParamPair::new(1.0, 1.0).unwrap();
        let est = estimate_winding(&pp, 1e-5, Branch::Main, 10_000).unwrap();
        assert_eq!(est.method, RhoMethod::Winding);
        assert!((est.rho - 1.0 / 3.0).abs() <= 1e-2, "rho = {}", est.rho);
    }

    #[test]
    fn winding_rejects_wrong_topology() {
        let pp = ParamPair::new(0.01, 0.49).unwrap();
        assert!(matches!(
            estimate_winding(&pp, 0.0, Branch::Main, 1000),
            Err(Error::WrongTopology { .. })
        ));
        assert!(matches!(
            estimate_winding(&pp, -10.0, Branch::PositiveOval, 1000),
            Err(Error::EmptyLevel { .. }) | Err(Error::WrongTopology { .. })
        ));
    }

    #[test]
    fn winding_independent_of_seed_and_sign() {
        // same h approached on both ovals gives the same rho
        let pp = ParamPair::new(0.1, 0.3).unwrap();
        let cv = critical_values(&pp);
        let h = 0.5 * cv.h_min;
        let n = 20_000;
        let plus = estimate_winding(&pp, h, Branch::PositiveOval, n).unwrap();
        let minus = estimate_winding(&pp, h, Branch::NegativeOval, n).unwrap();
        assert!(
            (plus.rho - minus.rho).abs() <= 2.0 / n as f64,
            "{} vs {}",
            plus.rho,
            minus.rho
        );
    }

    #[test]
    fn winding_seed_point_invariance_along_oval() {
        // restarting from later points of the same orbit changes the
        // estimate by at most O(1/n)
        let pp = ParamPair::new(1.0, 1.0).unwrap();
        let n = 20_000;
        let base = estimate_winding(&pp, 1.0, Branch::Main, n).unwrap();
        let kind = MapKind::ComposedG(pp);
        let mut seed = point_on_level(&pp, 1.0, Branch::Main).unwrap();
        for _ in 0..5 {
            seed = step_forward(kind, seed);
            let rho = winding_from(&pp, seed, PlanePoint::ORIGIN, n).unwrap();
            assert!((rho - base.rho).abs() <= 2.0 / n as f64);
        }
    }

    #[test]
    fn flow_agrees_with_winding_at_unit_level() {
        let pp = ParamPair::new(1.0, 1.0).unwrap();
        let (timing, flow) = flow_rotation(&pp, 1.0, Branch::Main).unwrap();
        let wind = estimate_winding(&pp, 1.0, Branch::Main, 200_000).unwrap();
        assert!(
            (flow.rho - wind.rho).abs() <= 1e-4,
            "flow {} vs winding {}",
            flow.rho,
            wind.rho
        );
        assert!(timing.closure_residual <= 1e-8, "{}", timing.closure_residual);
        assert!(timing.v_relative_drift <= 1e-8, "{}", timing.v_relative_drift);
        assert!(0.0 < timing.tau && timing.tau < timing.t_period);
    }

    #[test]
    fn flow_sees_half_rotation_on_two_periodic_level() {
        let pp = ParamPair::new(0.2, 0.2).unwrap();
        let (_, est) = flow_rotation(&pp, -0.04, Branch::PositiveOval).unwrap();
        assert!((est.rho - 0.5).abs() <= 1e-6, "rho = {}", est.rho);
    }

    #[test]
    fn guard_hands_near_half_rotations_to_flow() {
        // every point of {V = -ab} is 2-periodic; winding folds at pi and
        // must defer to the flow
        let pp = ParamPair::new(0.2, 0.2).unwrap();
        let est = estimate_winding(&pp, -0.04, Branch::PositiveOval, 2_000).unwrap();
        assert_eq!(est.method, RhoMethod::Flow);
        assert!((est.rho - 0.5).abs() <= 1e-3, "rho = {}", est.rho);
    }

    #[test]
    fn limit_values() {
        let unit = ParamPair::new(1.0, 1.0).unwrap();
        assert!((limit_rho(&unit, RhoLimit::AtZeroPlus).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(limit_rho(&unit, RhoLimit::AtInfinity).unwrap(), 0.5);
        assert!(limit_rho(&unit, RhoLimit::AtPpm).is_err());

        let low = ParamPair::new(0.1, 0.1).unwrap();
        assert_eq!(limit_rho(&low, RhoLimit::AtZeroPlus).unwrap(), 0.0);
        // at ab = 1/16 the P_± limit closes onto 1/2
        let boundary = ParamPair::new(0.25, 0.25).unwrap();
        assert!((limit_rho(&boundary, RhoLimit::AtPpm).unwrap() - 0.5).abs() < 1e-15);

        // quarter boundary continuous from above: arccos(1) = 0
        let quarter = ParamPair::new(0.5, 0.5).unwrap();
        assert_eq!(limit_rho(&quarter, RhoLimit::AtZeroPlus).unwrap(), 0.0);
    }

    #[test]
    fn origin_spectrum() {
        let unit = ParamPair::new(1.0, 1.0).unwrap();
        let (lp, lm) = spec_dg_origin(&unit);
        assert!((lp - Complex64::new(-0.5, 0.5 * 3.0_f64.sqrt())).norm() < 1e-14);
        assert!((lp.norm() - 1.0).abs() < 1e-14 && (lm.norm() - 1.0).abs() < 1e-14);

        // elliptic for ab > 1/4: unit modulus and arg matching the h->0 limit
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let a = rng.gen_range(0.3..3.0);
            let b = rng.gen_range(0.3..3.0);
            let pp = ParamPair::new(a, b).unwrap();
            if pp.product() <= 0.25 {
                continue;
            }
            let (lp, _) = spec_dg_origin(&pp);
            assert!((lp.norm() - 1.0).abs() < 1e-12);
            let rho0 = limit_rho(&pp, RhoLimit::AtZeroPlus).unwrap();
            assert!((lp.arg().abs() / (2.0 * PI) - rho0).abs() < 1e-12);
        }

        // hyperbolic saddle for ab < 1/4
        let low = ParamPair::new(0.01, 0.49).unwrap();
        let (lu, ls) = spec_dg_origin(&low);
        assert!(lu.im == 0.0 && ls.im == 0.0);
        assert!(lu.re > 1.0);
        assert!((lu.re * ls.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn origin_spectrum_matches_finite_differences() {
        // The closed Jacobian at the origin is [[-1, 1/a], [-1/b, 1/(ab) - 1]];
        // for small `a` its entries are large, so the comparison is relative.
        for (a, b) in [(1.0, 1.0), (2.0, 0.5), (0.01, 0.49), (1.3, 0.7)] {
            let pp = ParamPair::new(a, b).unwrap();
            let kind = MapKind::ComposedG(pp);
            let eps = 1e-6;
            let fx = step_forward(kind, PlanePoint::new(eps, 0.0));
            let fxm = step_forward(kind, PlanePoint::new(-eps, 0.0));
            let fy = step_forward(kind, PlanePoint::new(0.0, eps));
            let fym = step_forward(kind, PlanePoint::new(0.0, -eps));
            let numeric = [
                (fx.x - fxm.x) / (2.0 * eps),
                (fy.x - fym.x) / (2.0 * eps),
                (fx.y - fxm.y) / (2.0 * eps),
                (fy.y - fym.y) / (2.0 * eps),
            ];
            let closed = [-1.0, 1.0 / a, -1.0 / b, 1.0 / (a * b) - 1.0];
            for (n, c) in numeric.iter().zip(closed.iter()) {
                assert!(
                    (n - c).abs() <= 1e-8 * c.abs().max(1.0) * 10.0,
                    "a={a} b={b}: {n} vs {c}"
                );
            }
            // and the closed eigenvalues reproduce trace and determinant of
            // that Jacobian exactly
            let (lp, lm) = spec_dg_origin(&pp);
            assert!(((lp + lm).re - (closed[0] + closed[3])).abs() <= 1e-10 * (1.0 / (a * b)));
            assert!(((lp * lm).re - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn winding_stays_below_half_for_elliptic_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let a = rng.gen_range(0.5..2.0);
            let b = rng.gen_range(0.5..2.0);
            let pp = ParamPair::new(a, b).unwrap();
            if pp.product() < 0.25 {
                continue;
            }
            let h = rng.gen_range(0.05..5.0);
            let est = estimate_winding(&pp, h, Branch::Main, 5_000).unwrap();
            assert!(
                est.rho > 0.0 && est.rho <= 0.5 + 1e-3,
                "rho = {} at a={a} b={b} h={h}",
                est.rho
            );
        }
    }

    #[test]
    fn autonomous_composition_limit_is_twice_a_quarter() {
        // G_{b,b} = G_b^2, so its rotation number at large h approaches
        // 2 * 1/4 = 1/2.
        let pp = ParamPair::new(1.0, 1.0).unwrap();
        let est = estimate_winding(&pp, 1e6, Branch::Main, 4_000).unwrap();
        assert!((est.rho - 0.5).abs() <= 1e-2, "rho = {}", est.rho);
    }
}
