//! First integrals of the composed maps and the phase-indexed invariant of
//! the non-autonomous recurrence, plus drift measurement along orbits.
//!
//! All three polynomials are evaluated in the nested form
//! `x^2 (y^2 + c) + d y^2 - x y` to limit cancellation; the drift thresholds
//! used elsewhere assume this conditioning.

use crate::dynamics::{OrbitSample, PlanePoint};
use crate::error::{Error, Result};
use crate::params::ParamPair;

/// Which integral to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub enum IntegralSpec {
    /// `V_{b,a}(x, y) = a x^2 + b y^2 - x y + x^2 y^2`, conserved by `G_{b,a}`.
    V(ParamPair),
    /// `W_a(x, y) = x^2 y^2 + x^2 + y^2 - a x y`, conserved by `F_a` (and so
    /// by `F_{a,a}`), but not by `F_{b,a}` with `b != a`.
    W { a: f64 },
    /// `I(x, y, n) = beta_n x^2 + beta_{n+1} y^2 - x y + x^2 y^2` for a
    /// positive cycle `{beta_n}`, indices mod the cycle length.
    NonAutonomous { betas: Vec<f64>, phase: usize },
}

impl IntegralSpec {
    pub fn v(pp: ParamPair) -> Self {
        IntegralSpec::V(pp)
    }

    pub fn w(a: f64) -> Self {
        IntegralSpec::W { a }
    }

    pub fn non_autonomous(betas: Vec<f64>, phase: usize) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::DomainError {
                context: "non-autonomous invariant needs a non-empty cycle",
            });
        }
        if let Some(index) = betas.iter().position(|&b| b <= 0.0 || !b.is_finite()) {
            return Err(Error::NonPositiveBeta { index });
        }
        let k = betas.len();
        Ok(IntegralSpec::NonAutonomous {
            betas,
            phase: phase % k,
        })
    }

    /// The same invariant one phase later.
    pub fn shifted(&self) -> Self {
        match self {
            IntegralSpec::NonAutonomous { betas, phase } => IntegralSpec::NonAutonomous {
                betas: betas.clone(),
                phase: (phase + 1) % betas.len(),
            },
            other => other.clone(),
        }
    }
}

pub fn eval_integral(spec: &IntegralSpec, p: PlanePoint) -> f64 {
    let (x, y) = (p.x, p.y);
    match spec {
        IntegralSpec::V(pp) => x * x * (y * y + pp.a()) + pp.b() * y * y - x * y,
        IntegralSpec::W { a } => x * x * (y * y + 1.0) + y * y - a * x * y,
        IntegralSpec::NonAutonomous { betas, phase } => {
            let k = betas.len();
            let bn = betas[*phase];
            let bn1 = betas[(*phase + 1) % k];
            x * x * (y * y + bn) + bn1 * y * y - x * y
        }
    }
}

/// Deviation statistics of an integral along an orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftProfile {
    /// `max_n |I(p_n) - I(p_0)|`.
    pub max_abs_deviation: f64,
    /// `(max_n I - min_n I) / max(1, |I(p_0)|)`.
    pub relative_range: f64,
}

pub fn drift_profile(spec: &IntegralSpec, orbit: &OrbitSample) -> DriftProfile {
    assert!(!orbit.is_empty(), "drift profile needs a non-empty orbit");
    let values: Vec<f64> = orbit
        .points
        .iter()
        .map(|(_, p)| eval_integral(spec, *p))
        .collect();
    profile_of(&values)
}

/// Drift profile of an already-evaluated integral trace.
pub fn profile_of(values: &[f64]) -> DriftProfile {
    assert!(!values.is_empty());
    let v0 = values[0];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut dev: f64 = 0.0;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
        dev = dev.max((v - v0).abs());
    }
    DriftProfile {
        max_abs_deviation: dev,
        relative_range: (hi - lo) / 1.0_f64.max(v0.abs()),
    }
}

/// Max over `grid` of `|V_{a,b}(G_a(p)) - V_{b,a}(p)|`: one elementary step
/// carries a level of `V_{b,a}` onto the same level of `V_{a,b}`.
pub fn shift_identity_check(pp: ParamPair, grid: &[PlanePoint]) -> f64 {
    assert!(!grid.is_empty());
    let v_ba = IntegralSpec::v(pp);
    let v_ab = IntegralSpec::v(pp.swapped());
    let mut worst: f64 = 0.0;
    for &p in grid {
        let q = crate::dynamics::step_elem_g(pp.a(), p);
        worst = worst.max((eval_integral(&v_ab, q) - eval_integral(&v_ba, p)).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{iterate, MapSpec};
    use crate::geometry::{critical_values, fixed_points};

    fn grid(n_side: usize, lim: f64) -> Vec<PlanePoint> {
        let mut pts = Vec::new();
        for i in 0..n_side {
            for j in 0..n_side {
                let x = -lim + 2.0 * lim * (i as f64) / (n_side as f64 - 1.0);
                let y = -lim + 2.0 * lim * (j as f64) / (n_side as f64 - 1.0);
                pts.push(PlanePoint::new(x, y));
            }
        }
        pts
    }

    #[test]
    fn v_at_origin_and_minima() {
        let pp = ParamPair::new(0.01, 0.49).unwrap();
        let v = IntegralSpec::v(pp);
        assert_eq!(eval_integral(&v, PlanePoint::ORIGIN), 0.0);

        let (p_plus, p_minus) = fixed_points(&pp).pair.unwrap();
        let h_min = critical_values(&pp).h_min;
        assert!((eval_integral(&v, p_plus) - h_min).abs() < 1e-12);
        assert!((eval_integral(&v, p_minus) - h_min).abs() < 1e-12);
    }

    #[test]
    fn v_is_even() {
        let pp = ParamPair::new(0.7, 1.3).unwrap();
        let v = IntegralSpec::v(pp);
        for p in grid(25, 3.0) {
            assert_eq!(eval_integral(&v, p), eval_integral(&v, p.neg()));
        }
    }

    #[test]
    fn two_cycle_invariant_equals_v() {
        // I(., ., phase 0) on the cycle (a, b) has coefficients (a, b, -1, 1),
        // the same polynomial as V_{b,a}.
        let pp = ParamPair::new(0.3, 1.1).unwrap();
        let v = IntegralSpec::v(pp);
        let i0 = IntegralSpec::non_autonomous(vec![pp.a(), pp.b()], 0).unwrap();
        for p in grid(20, 2.5) {
            assert_eq!(eval_integral(&v, p), eval_integral(&i0, p));
        }
        // and the shifted phase is V with the parameters exchanged
        let i1 = i0.shifted();
        let v_swapped = IntegralSpec::v(pp.swapped());
        for p in grid(20, 2.5) {
            assert_eq!(eval_integral(&v_swapped, p), eval_integral(&i1, p));
        }
    }

    #[test]
    fn shift_identity_on_grids() {
        for (a, b) in [(0.01, 0.49), (1.0, 1.0), (2.0, 0.5)] {
            let pp = ParamPair::new(a, b).unwrap();
            let err = shift_identity_check(pp, &grid(10, 2.0));
            assert!(err <= 1e-12, "a={a} b={b}: {err}");
        }
    }

    #[test]
    fn drift_zero_on_fixed_point() {
        let pp = ParamPair::new(0.2, 0.2).unwrap();
        let (p_plus, _) = fixed_points(&pp).pair.unwrap();
        let orbit = iterate(&MapSpec::composed_g(pp), p_plus, 500).unwrap();
        let prof = drift_profile(&IntegralSpec::v(pp), &orbit);
        assert!(prof.max_abs_deviation < 1e-12);
        assert!(prof.relative_range < 1e-12);
    }

    #[test]
    fn conservation_vs_drift() {
        let pp = ParamPair::new(2.0, 0.5).unwrap();
        let orbit = iterate(&MapSpec::composed_g(pp), PlanePoint::new(0.5, 0.5), 100_000).unwrap();
        let prof = drift_profile(&IntegralSpec::v(pp), &orbit);
        assert!(prof.relative_range <= 1e-6, "G drift {}", prof.relative_range);

        let orbit = iterate(&MapSpec::composed_f(pp), PlanePoint::new(1.25, 0.5), 100_000).unwrap();
        let prof = drift_profile(&IntegralSpec::w(2.0), &orbit);
        assert!(prof.relative_range >= 1e-3, "F drift {}", prof.relative_range);
    }

    #[test]
    fn rejects_bad_cycles() {
        assert!(IntegralSpec::non_autonomous(vec![], 0).is_err());
        assert!(matches!(
            IntegralSpec::non_autonomous(vec![1.0, -2.0], 0),
            Err(Error::NonPositiveBeta { index: 1 })
        ));
    }
}
