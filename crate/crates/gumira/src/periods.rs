//! Periodic-orbit machinery for the integrable composition: direct period
//! detection, the 2-periodic locus, locating levels with a prescribed
//! rational rotation number, and the set of admissible periods.

use crate::dynamics::{iterate, step_forward, MapKind, MapSpec, OrbitSample, PlanePoint};
use crate::error::{Error, Result};
use crate::geometry::{
    critical_values, fixed_points, level_projection, point_on_level, Branch, ProjectionSide,
};
use crate::params::ParamPair;
use crate::rotation::{estimate_winding, q_step_deviation, RotationEstimate};

/// Default tolerance for declaring a point periodic.
pub const PERIOD_TOL: f64 = 1e-8;
/// Default period search bound.
pub const MAX_Q: usize = 200;

/// Outcome of a period scan along an orbit.
///
/// A scalar sequence built on a `q`-periodic orbit of the composed map is
/// `2q`-periodic, so `sequence_period = 2 * map_period` whenever present.
/// `residual` is the distance achieved at the detected period (or the best
/// distance seen when nothing was detected).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodReport {
    pub map_period: Option<usize>,
    pub sequence_period: Option<usize>,
    pub residual: f64,
}

impl PeriodReport {
    pub fn none(residual: f64) -> Self {
        PeriodReport {
            map_period: None,
            sequence_period: None,
            residual,
        }
    }
}

/// Smallest `m <= max_q` with `|orbit[m] - orbit[0]| <= tol`.
pub fn detect_period(orbit: &OrbitSample, tol: f64, max_q: usize) -> PeriodReport {
    assert!(tol > 0.0);
    let p0 = match orbit.points.first() {
        Some(&(_, p)) => p,
        None => return PeriodReport::none(f64::INFINITY),
    };
    let mut best = f64::INFINITY;
    for m in 1..=max_q.min(orbit.points.len().saturating_sub(1)) {
        let d = orbit.points[m].1.dist(&p0);
        best = best.min(d);
        if d <= tol {
            return PeriodReport {
                map_period: Some(m),
                sequence_period: Some(2 * m),
                residual: d,
            };
        }
    }
    PeriodReport::none(best)
}

/// The 2-periodic locus `{V_{b,a} = -ab}`.
///
/// Genuine 2-periodic ovals exist exactly for `ab < 1/16`; at `ab = 1/16`
/// the locus collapses onto the fixed points `P_±` and is reported as
/// degenerate; above it there is none.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPeriodicLocus {
    pub h: f64,
    pub degenerate: bool,
    pub samples: Vec<PlanePoint>,
    /// Max over the samples of the second-iterate return distance.
    pub max_residual: f64,
}

pub fn two_periodic_locus(pp: &ParamPair) -> Option<TwoPeriodicLocus> {
    let ab = pp.product();
    if ab > 1.0 / 16.0 {
        return None;
    }
    let h = -ab;
    let kind = MapKind::ComposedG(*pp);
    if ab == 1.0 / 16.0 {
        let (p_plus, p_minus) = fixed_points(pp).pair.expect("ab = 1/16 < 1/4");
        let res = |p: PlanePoint| step_forward(kind, step_forward(kind, p)).dist(&p);
        return Some(TwoPeriodicLocus {
            h,
            degenerate: true,
            max_residual: res(p_plus).max(res(p_minus)),
            samples: vec![p_plus, p_minus],
        });
    }
    // Sample the positive oval at five stations across its projection, both
    // quadratic roots at each station.
    let proj = level_projection(pp, h, ProjectionSide::VBa).ok()?;
    let &(lo, hi) = proj.as_slice().last()?;
    let width = hi - lo;
    let mut samples = Vec::with_capacity(10);
    for k in 0..5 {
        let x = lo + width * (0.12 + 0.76 * k as f64 / 4.0);
        // (x^2 + b) y^2 - x y + (a x^2 - h) = 0
        let qa = x * x + pp.b();
        let qb = -x;
        let qc = pp.a() * x * x - h;
        let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
        let root = (-qb + disc.sqrt()) / (2.0 * qa);
        let other = qc / (qa * root);
        samples.push(PlanePoint::new(x, root));
        samples.push(PlanePoint::new(x, other));
    }
    let max_residual = samples
        .iter()
        .map(|&p| step_forward(kind, step_forward(kind, p)).dist(&p))
        .fold(0.0_f64, f64::max);
    Some(TwoPeriodicLocus {
        h,
        degenerate: false,
        samples,
        max_residual,
    })
}

/// A level located by [`find_level_with_rho`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonantLevel {
    pub h: f64,
    pub estimate: RotationEstimate,
    /// `|G^q(seed) - seed|` at the located level.
    pub orbit_residual: f64,
}

/// Locate `h` inside `bracket` with rotation number `p/q`.
///
/// The caller supplies a bracket over which the signed winding estimate
/// changes sign (no global monotonicity of `rho(h)` is assumed, only the
/// intermediate value across the given bracket). Bisection on the winding
/// estimate narrows the bracket to winding resolution; the wrapped angle
/// between the seed and its `q`-th image then polishes the level to machine
/// resolution, far beyond what iterate counts could reach. A target of 1/2
/// sits on the boundary of the folded estimate's range and can never
/// produce a sign change; it is found by scanning the bracket for zeros of
/// the `q`-step angle directly.
pub fn find_level_with_rho(
    pp: &ParamPair,
    p: usize,
    q: usize,
    bracket: (f64, f64),
    branch: Branch,
) -> Result<ResonantLevel> {
    assert!(q >= 1 && p >= 1 && p < q, "target must be p/q in (0, 1)");
    let target = p as f64 / q as f64;
    let (mut lo, mut hi) = bracket;
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }

    let n_for = |width: f64| -> usize {
        if width > 1e-3 {
            20_000
        } else if width > 1e-5 {
            100_000
        } else {
            400_000
        }
    };
    let sign_at = |h: f64, width: f64| -> Result<f64> {
        Ok(estimate_winding(pp, h, branch, n_for(width))?.rho - target)
    };

    let dev_at = |h: f64| -> Result<f64> { Ok(q_step_deviation(pp, h, branch, q)?.0) };

    // Bisect the q-step deviation to machine resolution, then validate the
    // level: the closure distance must collapse (rejects sign changes that
    // were wrap jumps of the deviation angle, not zeros) and the winding
    // estimate must land on the target (rejects zeros belonging to a
    // different numerator).
    let polish = |mut plo: f64, mut phi: f64| -> Result<ResonantLevel> {
        let mut d_lo = dev_at(plo)?;
        for _ in 0..200 {
            if phi - plo <= f64::EPSILON * (1.0 + plo.abs()) {
                break;
            }
            let mid = 0.5 * (plo + phi);
            let d_mid = dev_at(mid)?;
            if d_mid == 0.0 {
                plo = mid;
                phi = mid;
                break;
            }
            if d_mid.signum() == d_lo.signum() {
                plo = mid;
                d_lo = d_mid;
            } else {
                phi = mid;
            }
        }
        let h_star = 0.5 * (plo + phi);
        let (_, closure) = q_step_deviation(pp, h_star, branch, q)?;
        if closure > 1e-5 {
            return Err(Error::MaxIterations {
                context: "resonant level polish did not reach the residual target",
            });
        }
        let estimate = estimate_winding(pp, h_star, branch, 2_000_000)?;
        if (estimate.rho - target).abs() > 1e-6 {
            return Err(Error::MaxIterations {
                context: "winding estimate at the polished level missed the target",
            });
        }
        Ok(ResonantLevel {
            h: h_star,
            estimate,
            orbit_residual: closure,
        })
    };

    let width0 = hi - lo;
    let mut f_lo = sign_at(lo, width0)?;
    let f_hi = sign_at(hi, width0)?;
    if f_lo != 0.0 && f_lo.signum() == f_hi.signum() {
        // No sign change of the folded estimate. This happens when the
        // target is the boundary value 1/2: the estimate reports the
        // representative in (0, 1/2], which only touches 1/2 from below.
        // Scan for transversal zeros of the q-step deviation instead,
        // polishing each candidate until one validates.
        let n_scan = 64;
        let mut prev: Option<(f64, f64)> = None;
        for k in 0..=n_scan {
            let h = lo + (hi - lo) * k as f64 / n_scan as f64;
            let d = dev_at(h)?;
            if let Some((hp, dp)) = prev {
                if dp.signum() != d.signum() {
                    if let Ok(level) = polish(hp, h) {
                        return Ok(level);
                    }
                }
            }
            prev = Some((h, d));
        }
        return Err(Error::NoBracket { target, lo, hi });
    }

    // Stage 1: bisection on the winding estimate down to its resolution.
    for _ in 0..60 {
        let width = hi - lo;
        if width <= 1e-4 * (1.0 + lo.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = sign_at(mid, width)?;
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let (mut plo, mut phi) = (lo, hi);
    let mut d_lo = dev_at(plo)?;
    let mut d_hi = dev_at(phi)?;
    if d_lo.signum() == d_hi.signum() && plo < phi {
        // Expand slightly: winding noise may have parked both ends on the
        // same side of the resonance.
        let w = phi - plo;
        for _ in 0..12 {
            plo -= w;
            phi += w;
            d_lo = dev_at(plo)?;
            d_hi = dev_at(phi)?;
            if d_lo.signum() != d_hi.signum() {
                break;
            }
        }
        if d_lo.signum() == d_hi.signum() {
            return Err(Error::MaxIterations {
                context: "no sign change of the q-step deviation near the bisection bracket",
            });
        }
    }
    polish(plo, phi)
}

/// Periods realised by the composed map, per regime:
/// all `q >= 2` for `ab < 1/16`; all `q >= 3` for `1/16 <= ab <= 1/4`;
/// for `ab > 1/4` every `q` admitting a reduced fraction `p/q` strictly
/// inside `(rho_0, 1/2)`, where `rho_0` is the small-level rotation limit.
pub fn admissible_periods(pp: &ParamPair, q_max: usize) -> Vec<usize> {
    assert!(q_max >= 2);
    let ab = pp.product();
    if ab < 1.0 / 16.0 {
        return (2..=q_max).collect();
    }
    if ab <= 0.25 {
        return (3..=q_max).collect();
    }
    let rho0 = crate::rotation::limit_rho(pp, crate::rotation::RhoLimit::AtZeroPlus)
        .expect("defined for all positive products");
    // Boundary ties are excluded (the interval is open); a 1e-9 guard makes
    // the comparison deterministic when p/q hits the limit value exactly,
    // e.g. 1/3 at ab = 1.
    const TIE: f64 = 1e-9;
    (2..=q_max)
        .filter(|&q| {
            (1..q).any(|p| {
                gcd(p, q) == 1 && {
                    let r = p as f64 / q as f64;
                    r > rho0 + TIE && r < 0.5 - TIE
                }
            })
        })
        .collect()
}

/// Smallest `q0` such that every period in `[q0, q_max]` is admissible;
/// `None` if even `q_max` is not.
pub fn min_realized_tail(pp: &ParamPair, q_max: usize) -> Option<usize> {
    let admissible = admissible_periods(pp, q_max);
    let mut q0 = None;
    for q in (2..=q_max).rev() {
        if admissible.contains(&q) {
            q0 = Some(q);
        } else {
            break;
        }
    }
    q0
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Scan `n_levels` levels spread over the oval range of the phase portrait
/// and report any on which a 2-periodic point is detected. Used to confirm
/// the absence of period-2 orbits outside `ab < 1/16`.
pub fn scan_for_period_two(pp: &ParamPair, n_levels: usize, tol: f64) -> Result<Vec<f64>> {
    let mut hits = Vec::new();
    let cv = critical_values(pp);
    let spec = MapSpec::composed_g(*pp);
    let mut check = |h: f64, branch: Branch| -> Result<()> {
        let seed = point_on_level(pp, h, branch)?;
        let orbit = iterate(&spec, seed, 2)?;
        let report = detect_period(&orbit, tol, 2);
        if report.map_period == Some(2) {
            hits.push(h);
        }
        Ok(())
    };
    if pp.has_saddle() {
        let n_neg = n_levels / 2;
        for k in 0..n_neg {
            // interior levels strictly between h_min and 0
            let t = (k as f64 + 0.5) / n_neg as f64;
            check(cv.h_min * (1.0 - t), Branch::PositiveOval)?;
        }
        for k in 0..(n_levels - n_neg) {
            let t = (k as f64 + 0.5) / (n_levels - n_neg) as f64;
            check(10.0_f64.powf(-3.0 + 5.0 * t), Branch::Main)?;
        }
    } else {
        for k in 0..n_levels {
            let t = (k as f64 + 0.5) / n_levels as f64;
            check(10.0_f64.powf(-3.0 + 5.0 * t), Branch::Main)?;
        }
    }
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{recurrence_sequence, Direction, Family};
    use crate::geometry::Branch;

    #[test]
    fn fixed_point_has_period_one() {
        let pp = ParamPair::new(1.0, 1.0).unwrap();
        let spec = MapSpec::composed_g(pp);
        let orbit = iterate(&spec, PlanePoint::ORIGIN, 10).unwrap();
        let rep = detect_period(&orbit, PERIOD_TOL, MAX_Q);
        assert_eq!(rep.map_period, Some(1));
        assert_eq!(rep.sequence_period, Some(2));
        assert_eq!(rep.residual, 0.0);
    }

    #[test]
    fn two_periodic_level_detected() {
        let pp = ParamPair::new(0.2, 0.2).unwrap();
        let seed = point_on_level(&pp, -0.04, Branch::PositiveOval).unwrap();
        let orbit = iterate(&MapSpec::composed_g(pp), seed, 10).unwrap();
        let rep = detect_period(&orbit, PERIOD_TOL, MAX_Q);
        assert_eq!(rep.map_period, Some(2));
        assert!(rep.residual <= 1e-8);
    }

    #[test]
    fn constant_sequence_at_equal_parameter_fixed_point() {
        let pp = ParamPair::new(0.2, 0.2).unwrap();
        let (p_plus, _) = fixed_points(&pp).pair.unwrap();
        let seq = recurrence_sequence(
            Family::G,
            pp,
            p_plus.x,
            p_plus.y,
            20,
            Direction::Forward,
        )
        .unwrap();
        assert!(seq.iter().all(|&t| (t - seq[0]).abs() < 1e-10));
        let orbit = iterate(&MapSpec::composed_g(pp), p_plus, 5).unwrap();
        assert_eq!(detect_period(&orbit, PERIOD_TOL, 10).map_period, Some(1));
    }

    #[test]
    fn locus_presence_by_regime() {
        // ab = 0.04 < 1/16: full locus with tiny second-iterate residuals
        let pp = ParamPair::new(0.2, 0.2).unwrap();
        let locus = two_periodic_locus(&pp).unwrap();
        assert!((locus.h - (-0.04)).abs() < 1e-15);
        assert!(!locus.degenerate);
        assert_eq!(locus.samples.len(), 10);
        assert!(locus.max_residual <= 1e-8, "residual {}", locus.max_residual);

        // ab = 1/16: degenerate onto P_±
        let pp = ParamPair::new(0.25, 0.25).unwrap();
        let locus = two_periodic_locus(&pp).unwrap();
        assert!(locus.degenerate);
        let (p_plus, p_minus) = fixed_points(&pp).pair.unwrap();
        assert_eq!(locus.samples, vec![p_plus, p_minus]);

        // ab = 1: absent
        assert!(two_periodic_locus(&ParamPair::new(1.0, 1.0).unwrap()).is_none());
    }

    #[test]
    fn no_period_two_above_sixteenth() {
        let pp = ParamPair::new(0.3, 0.3).unwrap(); // ab = 0.09 > 1/16
        let hits = scan_for_period_two(&pp, 200, 1e-8).unwrap();
        assert!(hits.is_empty(), "spurious period-2 levels: {hits:?}");
    }

    #[test]
    fn admissible_period_table() {
        let low = ParamPair::new(0.2, 0.2).unwrap(); // ab = 0.04
        assert_eq!(admissible_periods(&low, 6), vec![2, 3, 4, 5, 6]);

        let mid = ParamPair::new(0.4, 0.5).unwrap(); // ab = 0.2
        assert_eq!(admissible_periods(&mid, 6), vec![3, 4, 5, 6]);

        // ab = 1: rho range (1/3, 1/2); 1/3 itself excluded, so q = 3, 4, 6
        // admit nothing and 5 admits 2/5
        let unit = ParamPair::new(1.0, 1.0).unwrap();
        assert_eq!(admissible_periods(&unit, 6), vec![5]);
        assert_eq!(admissible_periods(&unit, 12), vec![5, 7, 8, 9, 11, 12]);
    }

    #[test]
    fn q0_tail() {
        let unit = ParamPair::new(1.0, 1.0).unwrap();
        // 10 is not admissible (only 4/10 lands in (1/3, 1/2), not reduced),
        // so the all-admissible tail starts at 11
        assert_eq!(min_realized_tail(&unit, 12), Some(11));
        let low = ParamPair::new(0.2, 0.2).unwrap();
        assert_eq!(min_realized_tail(&low, 12), Some(2));
    }

    #[test]
    fn locate_two_fifths_level() {
        let pp = ParamPair::new(1.0, 1.0).unwrap();
        let level = find_level_with_rho(&pp, 2, 5, (1e-3, 1e3), Branch::Main).unwrap();
        assert!((level.estimate.rho - 0.4).abs() <= 1e-6);
        assert!(level.orbit_residual <= 1e-5);

        // the located orbit has minimal period exactly 5 (gcd(2,5) = 1)
        let seed = point_on_level(&pp, level.h, Branch::Main).unwrap();
        let orbit = iterate(&MapSpec::composed_g(pp), seed, 10).unwrap();
        let rep = detect_period(&orbit, 1e-5, 10);
        assert_eq!(rep.map_period, Some(5));
        assert_eq!(rep.sequence_period, Some(10));
    }

    #[test]
    fn locate_half_level_is_the_locus() {
        let pp = ParamPair::new(0.2, 0.2).unwrap();
        let cv = critical_values(&pp);
        let level =
            find_level_with_rho(&pp, 1, 2, (cv.h_min * 0.98, -1e-4), Branch::PositiveOval)
                .unwrap();
        assert!(
            (level.h - (-0.04)).abs() <= 1e-6,
            "two-periodic level found at {}",
            level.h
        );
    }

    #[test]
    fn every_admissible_period_is_realized() {
        // each admissible q up to 12 at ab = 1 admits a witness fraction and
        // a level carrying an orbit of exactly that minimal period
        let pp = ParamPair::new(1.0, 1.0).unwrap();
        for q in admissible_periods(&pp, 12) {
            let p = (1..q)
                .find(|&p| {
                    gcd(p, q) == 1 && {
                        let r = p as f64 / q as f64;
                        r > 1.0 / 3.0 + 1e-9 && r < 0.5 - 1e-9
                    }
                })
                .expect("admissible q must have a witness numerator");
            let level = find_level_with_rho(&pp, p, q, (1e-3, 1e3), Branch::Main)
                .unwrap_or_else(|e| panic!("q={q} p={p}: {e}"));
            let seed = point_on_level(&pp, level.h, Branch::Main).unwrap();
            let orbit = iterate(&MapSpec::composed_g(pp), seed, q + 2).unwrap();
            let rep = detect_period(&orbit, 1e-5, q + 1);
            assert_eq!(rep.map_period, Some(q), "p/q = {p}/{q} at h = {}", level.h);
        }
    }

    #[test]
    fn unbracketable_target_errors() {
        let pp = ParamPair::new(1.0, 1.0).unwrap();
        // rho on (1e-3, 1e3) spans roughly (1/3, 1/2): 1/4 is outside
        assert!(matches!(
            find_level_with_rho(&pp, 1, 4, (1e-3, 1e3), Branch::Main),
            Err(Error::NoBracket { .. })
        ));
    }
}
