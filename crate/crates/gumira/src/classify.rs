//! Closure structure of scalar sequences: gap-based interval clustering,
//! the behaviour taxonomy, and persistence checks.

use crate::dynamics::{
    fold_orbit, iterate, recurrence_sequence, Direction, Family, MapSpec, OrbitSample, PlanePoint,
};
use crate::error::Result;
use crate::geometry::IntervalSet;
use crate::invariants::{eval_integral, IntegralSpec};
use crate::params::ParamPair;
use crate::periods::{detect_period, PERIOD_TOL};

/// Gap threshold multiplier: values are split where consecutive sorted terms
/// differ by more than `gap_factor * range / len`.
pub const DEFAULT_GAP_FACTOR: f64 = 50.0;
/// Clusters with fewer members than this are discarded as transients.
pub const DEFAULT_MIN_CLUSTER: usize = 20;
/// Default sequence length for classification runs.
pub const DEFAULT_N_TERMS: usize = 100_000;
/// A sequence whose range is below this is treated as constant.
pub const DEGENERATE_RANGE: f64 = 1e-12;

/// Behaviour classes of a scalar sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Behavior {
    Constant,
    /// Sequence period `2q`, where `q` is the minimal period of the
    /// composed map.
    Periodic2q { q: usize },
    /// Seed on the zero level of the saddle regime: the terms accumulate
    /// onto the orbit plus the origin.
    HomoclinicAccumulation,
    OneInterval,
    TwoIntervals,
    ManyIntervals { k: usize },
    /// Non-periodic orbit clinging to the stable set of a saddle periodic
    /// orbit (best-effort flag; only the chaotic family produces it).
    OrbitPlusAccumulationPoints,
}

impl Behavior {
    pub fn name(&self) -> &'static str {
        match self {
            Behavior::Constant => "Constant",
            Behavior::Periodic2q { .. } => "Periodic2q",
            Behavior::HomoclinicAccumulation => "HomoclinicAccumulation",
            Behavior::OneInterval => "OneInterval",
            Behavior::TwoIntervals => "TwoIntervals",
            Behavior::ManyIntervals { .. } => "ManyIntervals",
            Behavior::OrbitPlusAccumulationPoints => "OrbitPlusAccumulationPoints",
        }
    }
}

/// Adherence report: the clustered intervals, the number of terms that
/// produced them, and the behaviour class.
#[derive(Debug, Clone, PartialEq)]
pub struct AdherenceReport {
    pub intervals: IntervalSet,
    pub n_points: usize,
    pub behavior: Behavior,
}

/// Closed hulls of the value clusters of `sequence`.
///
/// Sorts the values, splits at gaps wider than `gap_factor * range / len`,
/// drops clusters smaller than `min_cluster`. A constant sequence (range
/// below [`DEGENERATE_RANGE`]) yields a single degenerate interval.
pub fn adherence_intervals(
    sequence: &[f64],
    gap_factor: f64,
    min_cluster: usize,
) -> IntervalSet {
    assert!(!sequence.is_empty() && gap_factor > 0.0 && min_cluster >= 1);
    let mut sorted = sequence.to_vec();
    sorted.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let range = sorted[sorted.len() - 1] - sorted[0];
    if range < DEGENERATE_RANGE {
        return IntervalSet::new(vec![(sorted[0], sorted[sorted.len() - 1])]);
    }
    let threshold = gap_factor * range / sorted.len() as f64;
    let mut intervals = Vec::new();
    let mut start = 0;
    for k in 1..=sorted.len() {
        if k == sorted.len() || sorted[k] - sorted[k - 1] > threshold {
            if k - start >= min_cluster {
                intervals.push((sorted[start], sorted[k - 1]));
            }
            start = k;
        }
    }
    IntervalSet::new(intervals)
}

/// Tunable knobs of [`classify_behavior`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyConfig {
    pub n_terms: usize,
    pub gap_factor: f64,
    pub min_cluster: usize,
    /// Tolerance for the periodicity scan of the unfolded map orbit.
    pub period_tol: f64,
    pub max_q: usize,
    /// `|V(seed)| / max(1, scale)` below this (with `ab < 1/4`) marks the
    /// homoclinic level.
    pub homoclinic_tol: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            n_terms: DEFAULT_N_TERMS,
            gap_factor: DEFAULT_GAP_FACTOR,
            min_cluster: DEFAULT_MIN_CLUSTER,
            period_tol: PERIOD_TOL,
            max_q: crate::periods::MAX_Q,
            homoclinic_tol: 1e-9,
        }
    }
}

/// Classification pipeline: divergence guard, periodicity, homoclinic gate,
/// near-periodic accumulation flag, then interval clustering.
pub fn classify_behavior(
    family: Family,
    pp: ParamPair,
    x1: f64,
    x2: f64,
    config: &ClassifyConfig,
) -> Result<AdherenceReport> {
    let seed = PlanePoint::new(x1, x2);
    let spec = MapSpec::composed(family, pp);

    // Periodicity of the unfolded orbit decides the discrete classes.
    let probe = iterate(&spec, seed, config.max_q.max(2))?;
    let period = detect_period(&probe, config.period_tol, config.max_q);
    if let Some(q) = period.map_period {
        let behavior = if q == 1 && (x1 - x2).abs() <= config.period_tol {
            Behavior::Constant
        } else {
            Behavior::Periodic2q { q }
        };
        let terms: Vec<f64> = probe.scalar_terms();
        return Ok(AdherenceReport {
            intervals: adherence_intervals(&terms, config.gap_factor, 1),
            n_points: terms.len(),
            behavior,
        });
    }

    // Homoclinic gate: zero level of the saddle regime.
    if family == Family::G && pp.has_saddle() && seed != PlanePoint::ORIGIN {
        let v = eval_integral(&IntegralSpec::v(pp), seed);
        let scale = 1.0_f64.max(x1.abs()).max(x2.abs());
        if v.abs() <= config.homoclinic_tol * scale {
            let terms =
                recurrence_sequence(family, pp, x1, x2, config.n_terms, Direction::Forward)?;
            return Ok(AdherenceReport {
                intervals: adherence_intervals(&terms, config.gap_factor, config.min_cluster),
                n_points: terms.len(),
                behavior: Behavior::HomoclinicAccumulation,
            });
        }
    }

    let terms = recurrence_sequence(family, pp, x1, x2, config.n_terms, Direction::Forward)?;
    let intervals = adherence_intervals(&terms, config.gap_factor, config.min_cluster);
    let n_points = terms.len();

    // Near-periodic but not periodic: the orbit tracks the stable set of a
    // saddle periodic orbit. Only meaningful for the chaotic family.
    if family == Family::F
        && period.residual > config.period_tol
        && period.residual <= 1e-3
        && intervals.count() >= 3
    {
        return Ok(AdherenceReport {
            intervals,
            n_points,
            behavior: Behavior::OrbitPlusAccumulationPoints,
        });
    }

    let behavior = match intervals.count() {
        1 => Behavior::OneInterval,
        2 => Behavior::TwoIntervals,
        k => Behavior::ManyIntervals { k },
    };
    Ok(AdherenceReport {
        intervals,
        n_points,
        behavior,
    })
}

/// Boundedness summary of an orbit computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistenceReport {
    pub bounded: bool,
    /// Sup of `max(|x|, |y|)` over the visited points (the sup of the
    /// scalar-sequence magnitudes).
    pub sup_norm: f64,
}

pub fn persistence_check(orbit: &OrbitSample) -> PersistenceReport {
    let sup = orbit
        .points
        .iter()
        .map(|(_, p)| p.x.abs().max(p.y.abs()))
        .fold(0.0_f64, f64::max);
    PersistenceReport {
        bounded: true,
        sup_norm: sup,
    }
}

/// Streaming variant: iterates without storing and reports divergence
/// through the flag instead of an error.
pub fn persistence_scan(spec: &MapSpec, p0: PlanePoint, n_steps: usize) -> PersistenceReport {
    let mut sup = 0.0_f64;
    let diverged = fold_orbit(spec, p0, n_steps, |_, p| {
        sup = sup.max(p.x.abs().max(p.y.abs()));
    });
    PersistenceReport {
        bounded: diverged.is_none(),
        sup_norm: if diverged.is_some() {
            f64::INFINITY
        } else {
            sup
        },
    }
}

/// Fraction of an `n x n` grid over the orbit's bounding box visited by the
/// orbit. Near 0 for curve-confined orbits, substantially positive for
/// orbits filling a 2-D region.
pub fn bounding_box_fill(orbit: &OrbitSample, n_cells: usize) -> f64 {
    assert!(n_cells >= 2);
    let xs: Vec<f64> = orbit.points.iter().map(|(_, p)| p.x).collect();
    let ys: Vec<f64> = orbit.points.iter().map(|(_, p)| p.y).collect();
    let (xlo, xhi) = min_max(&xs);
    let (ylo, yhi) = min_max(&ys);
    if xhi - xlo < DEGENERATE_RANGE || yhi - ylo < DEGENERATE_RANGE {
        return 0.0;
    }
    let mut filled = vec![false; n_cells * n_cells];
    for (_, p) in &orbit.points {
        let i = (((p.x - xlo) / (xhi - xlo) * n_cells as f64) as usize).min(n_cells - 1);
        let j = (((p.y - ylo) / (yhi - ylo) * n_cells as f64) as usize).min(n_cells - 1);
        filled[i * n_cells + j] = true;
    }
    filled.iter().filter(|&&c| c).count() as f64 / (n_cells * n_cells) as f64
}

/// Raw-orbit tail decay check used for homoclinic seeds: the smallest `N`
/// such that every computed term with index at least `N` stays below
/// `threshold` in magnitude, per time direction. `None` when even the final
/// stretch exceeds the threshold or the surviving tail is shorter than
/// `min_tail`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport {
    pub forward_n: Option<usize>,
    pub backward_n: Option<usize>,
    pub sup_forward_tail: f64,
    pub sup_backward_tail: f64,
}

pub fn homoclinic_decay(
    pp: &ParamPair,
    seed: PlanePoint,
    horizon: usize,
    threshold: f64,
    min_tail: usize,
) -> Result<DecayReport> {
    let n_terms = 2 * horizon + 2;
    let fwd = recurrence_sequence(Family::G, *pp, seed.x, seed.y, n_terms, Direction::Forward)?;
    let bwd = recurrence_sequence(Family::G, *pp, seed.x, seed.y, n_terms, Direction::Backward)?;
    let tail_start = |terms: &[f64]| -> Option<usize> {
        let last_big = terms
            .iter()
            .rposition(|t| t.abs() >= threshold)
            .map(|i| i + 1)
            .unwrap_or(0);
        (terms.len() - last_big >= min_tail).then_some(last_big)
    };
    // With no qualifying tail, report the sup over the final window instead
    // so the failure mode is visible.
    let sup_tail = |terms: &[f64], from: Option<usize>| {
        let from = from
            .unwrap_or_else(|| terms.len().saturating_sub(min_tail))
            .min(terms.len());
        terms[from..].iter().fold(0.0_f64, |m, t| m.max(t.abs()))
    };
    let f_n = tail_start(&fwd);
    let b_n = tail_start(&bwd);
    Ok(DecayReport {
        forward_n: f_n,
        backward_n: b_n,
        sup_forward_tail: sup_tail(&fwd, f_n),
        sup_backward_tail: sup_tail(&bwd, b_n),
    })
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        fixed_points, level_projection, point_on_level, Branch, ProjectionSide,
    };
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_sequence_degenerates() {
        let s = vec![1.5; 5000];
        let set = adherence_intervals(&s, DEFAULT_GAP_FACTOR, DEFAULT_MIN_CLUSTER);
        assert_eq!(set.count(), 1);
        assert_eq!(set.as_slice()[0], (1.5, 1.5));
    }

    #[test]
    fn paper_table_rows_reproduce() {
        // two of the tabulated chaotic-family counts, one from each example
        let pp = ParamPair::new(2.0, 0.5).unwrap();
        let seq = recurrence_sequence(Family::F, pp, 1.48, 0.5, 100_000, Direction::Forward)
            .unwrap();
        let set = adherence_intervals(&seq, DEFAULT_GAP_FACTOR, DEFAULT_MIN_CLUSTER);
        assert_eq!(set.count(), 6);

        let pp = ParamPair::new(4.0, 4.5).unwrap();
        let seq = recurrence_sequence(Family::F, pp, 3.0, 0.5, 100_000, Direction::Forward)
            .unwrap();
        let set = adherence_intervals(&seq, DEFAULT_GAP_FACTOR, DEFAULT_MIN_CLUSTER);
        assert_eq!(set.count(), 5);
    }

    #[test]
    fn classify_two_interval_regime() {
        let pp = ParamPair::new(0.01, 0.49).unwrap();
        let (p_plus, _) = fixed_points(&pp).pair.unwrap();
        let report = classify_behavior(
            Family::G,
            pp,
            p_plus.x - 0.1,
            p_plus.y - 0.1,
            &ClassifyConfig::default(),
        )
        .unwrap();
        assert_eq!(report.behavior, Behavior::TwoIntervals);

        // adherence confined to the union of the two level projections
        let h0 = eval_integral(
            &IntegralSpec::v(pp),
            PlanePoint::new(p_plus.x - 0.1, p_plus.y - 0.1),
        );
        let union = level_projection(&pp, h0, ProjectionSide::VBa)
            .unwrap()
            .union(&level_projection(&pp, h0, ProjectionSide::VAb).unwrap())
            .dilate(1e-6);
        assert!(report.intervals.contained_in(&union));
    }

    #[test]
    fn classify_one_interval_on_positive_level() {
        let pp = ParamPair::new(0.7, 0.9).unwrap();
        let seed = point_on_level(&pp, 2.0, Branch::Main).unwrap();
        let report =
            classify_behavior(Family::G, pp, seed.x, seed.y, &ClassifyConfig::default()).unwrap();
        assert_eq!(report.behavior, Behavior::OneInterval);
    }

    #[test]
    fn classify_periodic_and_constant() {
        let pp = ParamPair::new(0.2, 0.2).unwrap();
        let (p_plus, _) = fixed_points(&pp).pair.unwrap();
        let report = classify_behavior(
            Family::G,
            pp,
            p_plus.x,
            p_plus.y,
            &ClassifyConfig::default(),
        )
        .unwrap();
        assert_eq!(report.behavior, Behavior::Constant);

        let seed = point_on_level(&pp, -0.04, Branch::PositiveOval).unwrap();
        let report =
            classify_behavior(Family::G, pp, seed.x, seed.y, &ClassifyConfig::default()).unwrap();
        assert_eq!(report.behavior, Behavior::Periodic2q { q: 2 });

        let report =
            classify_behavior(Family::G, pp, 0.0, 0.0, &ClassifyConfig::default()).unwrap();
        assert_eq!(report.behavior, Behavior::Constant);
    }

    #[test]
    fn classify_homoclinic_seed_by_level() {
        let pp = ParamPair::new(0.01, 0.49).unwrap();
        let seed = point_on_level(&pp, 0.0, Branch::PositiveOval).unwrap();
        let report =
            classify_behavior(Family::G, pp, seed.x, seed.y, &ClassifyConfig::default()).unwrap();
        assert_eq!(report.behavior, Behavior::HomoclinicAccumulation);
    }

    #[test]
    fn g_family_never_exceeds_two_intervals() {
        // Near a high-order resonance the orbit fills its interval slowly
        // and a fixed-length sample shows many clusters; lengthening the
        // sample must always collapse the count to at most two.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut checked = 0;
        while checked < 100 {
            let a = rng.gen_range(0.05..1.5);
            let b = rng.gen_range(0.05..1.5);
            let pp = ParamPair::new(a, b).unwrap();
            let x1 = rng.gen_range(-2.0..2.0);
            let x2 = rng.gen_range(-2.0..2.0);
            if (x1, x2) == (0.0, 0.0) {
                continue;
            }
            let mut n_terms = 20_000;
            let mut count = usize::MAX;
            while n_terms <= 5_120_000 {
                let config = ClassifyConfig {
                    n_terms,
                    ..ClassifyConfig::default()
                };
                let report = classify_behavior(Family::G, pp, x1, x2, &config).unwrap();
                count = report.intervals.count();
                if count <= 2 {
                    break;
                }
                n_terms *= 4;
            }
            assert!(
                count <= 2,
                "a={a} b={b} seed=({x1}, {x2}): {count} intervals at {n_terms} terms"
            );
            checked += 1;
        }
    }

    #[test]
    fn g_family_adherence_confined_to_projections() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let mut checked = 0;
        while checked < 20 {
            let a = rng.gen_range(0.05..1.5);
            let b = rng.gen_range(0.05..1.5);
            let pp = ParamPair::new(a, b).unwrap();
            let x1 = rng.gen_range(-2.0..2.0);
            let x2 = rng.gen_range(-2.0..2.0);
            let h0 = eval_integral(&IntegralSpec::v(pp), PlanePoint::new(x1, x2));
            if h0.abs() < 1e-3 {
                continue; // keep clear of the homoclinic gate
            }
            let config = ClassifyConfig {
                n_terms: 20_000,
                ..ClassifyConfig::default()
            };
            let report = classify_behavior(Family::G, pp, x1, x2, &config).unwrap();
            if matches!(
                report.behavior,
                Behavior::Constant | Behavior::Periodic2q { .. }
            ) {
                continue;
            }
            let union = level_projection(&pp, h0, ProjectionSide::VBa)
                .unwrap()
                .union(&level_projection(&pp, h0, ProjectionSide::VAb).unwrap())
                .dilate(1e-6);
            assert!(
                report.intervals.contained_in(&union),
                "a={a} b={b} ({x1}, {x2}): {:?} not in {:?}",
                report.intervals,
                union
            );
            checked += 1;
        }
    }

    #[test]
    fn persistence_of_confined_orbit() {
        let pp = ParamPair::new(2.0, 0.5).unwrap();
        let spec = MapSpec::composed_g(pp);
        let report = persistence_scan(&spec, PlanePoint::new(0.5, 0.5), 1_000_000);
        assert!(report.bounded);
        // sup consistent with the projection of the seed level
        let h0 = eval_integral(&IntegralSpec::v(pp), PlanePoint::new(0.5, 0.5));
        let proj = level_projection(&pp, h0, ProjectionSide::VBa)
            .unwrap()
            .union(&level_projection(&pp, h0, ProjectionSide::VAb).unwrap());
        let xmax = proj
            .as_slice()
            .iter()
            .map(|&(lo, hi)| lo.abs().max(hi.abs()))
            .fold(0.0_f64, f64::max);
        assert!(report.sup_norm <= xmax + 1e-9, "{} vs {}", report.sup_norm, xmax);

        let trivial = iterate(&spec, PlanePoint::ORIGIN, 10).unwrap();
        assert_eq!(persistence_check(&trivial).sup_norm, 0.0);
    }

    #[test]
    fn chaotic_region_fill() {
        let pp = ParamPair::new(4.5, 4.0).unwrap();
        let spec = MapSpec::composed_f(pp);
        let orbit = iterate(&spec, PlanePoint::new(1.18, 0.1), 100_000).unwrap();
        let report = persistence_check(&orbit);
        assert!(report.bounded && report.sup_norm < 10.0);
        assert!(bounding_box_fill(&orbit, 64) > 0.1);
        // an integrable G orbit stays on a curve: its fill stays small
        let orbit = iterate(&MapSpec::composed_g(ParamPair::new(1.0, 1.0).unwrap()),
            PlanePoint::new(0.5, 0.5), 100_000).unwrap();
        assert!(bounding_box_fill(&orbit, 64) < 0.08);
    }

    #[test]
    fn near_periodic_chaotic_orbit_flags_accumulation() {
        // (1.3, 0.5) tracks a high-period island chain of the mixed
        // composition: not periodic to 1e-8 within 200 steps, yet the
        // 200-step return distance is only ~7e-4, and the values cluster
        // into dozens of islands.
        let pp = ParamPair::new(2.0, 0.5).unwrap();
        let report =
            classify_behavior(Family::F, pp, 1.3, 0.5, &ClassifyConfig::default()).unwrap();
        assert_eq!(report.behavior, Behavior::OrbitPlusAccumulationPoints);
        assert!(report.intervals.count() >= 3);
    }

    #[test]
    fn raw_homoclinic_orbit_recirculates() {
        // Double-precision reality check: the saddle multiplier (about 202
        // at ab = 0.0049) amplifies rounding noise, so a raw orbit seeded on
        // the zero level keeps revisiting loop scale instead of settling.
        // The classifier therefore gates the homoclinic class on the level
        // value, not on observed decay.
        let pp = ParamPair::new(0.01, 0.49).unwrap();
        let seed = point_on_level(&pp, 0.0, Branch::PositiveOval).unwrap();
        let report = homoclinic_decay(&pp, seed, 5_000, 1e-2, 1_000).unwrap();
        assert!(
            report.forward_n.is_none(),
            "raw forward orbit unexpectedly settled below 1e-2"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn clustering_scale_equivariant(
            scale in prop::sample::select(vec![0.5_f64, 2.0, 10.0, -3.0]),
            seed in 0u64..1000,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut values: Vec<f64> = (0..2000).map(|_| rng.gen_range(-1.0..1.0)).collect();
            values.extend((0..2000).map(|_| rng.gen_range(3.0..4.0)));
            let base = adherence_intervals(&values, DEFAULT_GAP_FACTOR, DEFAULT_MIN_CLUSTER);
            let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
            let scaled_set = adherence_intervals(&scaled, DEFAULT_GAP_FACTOR, DEFAULT_MIN_CLUSTER);
            prop_assert_eq!(base.count(), scaled_set.count());
            let mut expect: Vec<(f64, f64)> = base
                .as_slice()
                .iter()
                .map(|&(lo, hi)| {
                    let (p, q) = (lo * scale, hi * scale);
                    (p.min(q), p.max(q))
                })
                .collect();
            expect.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
            for (got, want) in scaled_set.as_slice().iter().zip(expect.iter()) {
                prop_assert!((got.0 - want.0).abs() <= 1e-12 * want.0.abs().max(1.0));
                prop_assert!((got.1 - want.1).abs() <= 1e-12 * want.1.abs().max(1.0));
            }
        }

        #[test]
        fn clustering_permutation_invariant(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values: Vec<f64> = (0..3000).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let base = adherence_intervals(&values, DEFAULT_GAP_FACTOR, DEFAULT_MIN_CLUSTER);
            let mut shuffled = values.clone();
            // Fisher-Yates with the same deterministic rng stream
            for i in (1..shuffled.len()).rev() {
                let j = rng.gen_range(0..=i);
                shuffled.swap(i, j);
            }
            let permuted = adherence_intervals(&shuffled, DEFAULT_GAP_FACTOR, DEFAULT_MIN_CLUSTER);
            prop_assert_eq!(base, permuted);
        }
    }
}
