//! Validated parameter pairs and the `a*b` regime split that drives every
//! case distinction in the crate.

use crate::error::{Error, Result};

/// Position of `a*b` relative to the two structural thresholds 1/16 and 1/4.
///
/// Below 1/16 the composed map has genuine 2-periodic orbits; below 1/4 it
/// has a saddle at the origin and the pair of elliptic fixed points `P_±`;
/// at or above 1/4 the origin is the unique (elliptic) fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    SubSixteenth,
    Boundary16,
    MidRange,
    Quarter,
    SuperQuarter,
}

/// Positive parameter pair `(a, b)` of a 2-periodic forcing cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamPair {
    a: f64,
    b: f64,
}

impl ParamPair {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a <= 0.0 || b <= 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(Error::NonPositiveParams { a, b });
        }
        Ok(ParamPair { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn product(&self) -> f64 {
        self.a * self.b
    }

    /// The pair with the roles of `a` and `b` exchanged.
    pub fn swapped(&self) -> Self {
        ParamPair {
            a: self.b,
            b: self.a,
        }
    }

    pub fn regime(&self) -> Regime {
        let ab = self.product();
        if ab < 1.0 / 16.0 {
            Regime::SubSixteenth
        } else if ab == 1.0 / 16.0 {
            Regime::Boundary16
        } else if ab < 0.25 {
            Regime::MidRange
        } else if ab == 0.25 {
            Regime::Quarter
        } else {
            Regime::SuperQuarter
        }
    }

    /// `a*b < 1/4`: the composed map has the saddle/two-centers phase portrait.
    pub fn has_saddle(&self) -> bool {
        self.product() < 0.25
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive() {
        assert!(ParamPair::new(0.0, 1.0).is_err());
        assert!(ParamPair::new(1.0, -2.0).is_err());
        assert!(ParamPair::new(f64::NAN, 1.0).is_err());
        assert!(ParamPair::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn regime_split_matches_thresholds() {
        let cases = [
            (0.2, 0.2, Regime::SubSixteenth),
            (0.25, 0.25, Regime::Boundary16),
            (0.5, 0.25, Regime::MidRange),
            (0.5, 0.5, Regime::Quarter),
            (1.0, 1.0, Regime::SuperQuarter),
        ];
        for (a, b, want) in cases {
            assert_eq!(ParamPair::new(a, b).unwrap().regime(), want, "a={a} b={b}");
        }
    }

    #[test]
    fn swapped_swaps() {
        let pp = ParamPair::new(0.01, 0.49).unwrap();
        let sw = pp.swapped();
        assert_eq!((sw.a(), sw.b()), (0.49, 0.01));
        assert_eq!(pp.product(), sw.product());
    }
}
