//! Angles on the circle `[0, 2π)` and half-open arcs.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{HvError, Result};

/// A point on the circle, always normalized to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Angle(f64);

/// Reduces `x` modulo 2π into `[0, 2π)`.
pub fn wrap_angle(x: f64) -> Result<Angle> {
    if !x.is_finite() {
        return Err(HvError::Domain(format!("angle must be finite, got {x}")));
    }
    Ok(Angle(wrap_finite(x)))
}

// rem_euclid can round up to exactly TAU for tiny negative inputs.
fn wrap_finite(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    /// Wraps a finite value. Panics on NaN or infinity; use [`wrap_angle`]
    /// for untrusted input.
    pub fn new(x: f64) -> Angle {
        wrap_angle(x).expect("Angle::new requires a finite value")
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// Counter-clockwise offset from `origin` to `self`, in `[0, 2π)`.
    pub fn offset_from(self, origin: Angle) -> f64 {
        wrap_finite(self.0 - origin.0)
    }

    pub fn rotate(self, theta: f64) -> Angle {
        Angle::new(self.0 + theta)
    }

    /// Shortest distance along the circle, in `[0, π]`.
    pub fn distance(self, other: Angle) -> f64 {
        let d = self.offset_from(other);
        d.min(TAU - d)
    }
}

impl TryFrom<f64> for Angle {
    type Error = HvError;

    fn try_from(x: f64) -> Result<Self> {
        wrap_angle(x)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Half-open arc `[start, start + length)` on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularInterval {
    start: Angle,
    length: f64,
}

impl CircularInterval {
    pub fn new(start: Angle, length: f64) -> Result<Self> {
        if !(0.0..=TAU).contains(&length) {
            return Err(HvError::Domain(format!(
                "arc length must lie in [0, 2π], got {length}"
            )));
        }
        Ok(CircularInterval { start, length })
    }

    /// Half-circle arc starting at `start`.
    pub fn half(start: Angle) -> Self {
        CircularInterval {
            start,
            length: std::f64::consts::PI,
        }
    }

    pub fn start(&self) -> Angle {
        self.start
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn contains(&self, x: Angle) -> bool {
        x.offset_from(self.start) < self.length
    }

    /// Probability that a uniform angle falls in the arc.
    pub fn uniform_measure(&self) -> f64 {
        self.length / TAU
    }

    pub fn complement(&self) -> Self {
        CircularInterval {
            start: self.start.rotate(self.length),
            length: TAU - self.length,
        }
    }

    pub fn rotated(&self, theta: f64) -> Self {
        CircularInterval {
            start: self.start.rotate(theta),
            length: self.length,
        }
    }

    /// Arc length of the intersection with `other`.
    pub fn overlap(&self, other: &CircularInterval) -> f64 {
        let (s1, e1) = (self.start.0, self.start.0 + self.length);
        [-TAU, 0.0, TAU]
            .iter()
            .map(|shift| {
                let s2 = other.start.0 + shift;
                let e2 = s2 + other.length;
                (e1.min(e2) - s1.max(s2)).max(0.0)
            })
            .sum::<f64>()
            .min(self.length.min(other.length))
    }

    /// Angle halfway along the arc.
    pub fn midpoint(&self) -> Angle {
        self.start.rotate(self.length / 2.0)
    }
}

/// Free-function form of [`CircularInterval::contains`].
pub fn circ_contains(iv: &CircularInterval, x: Angle) -> bool {
    iv.contains(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_angle(0.0).unwrap().radians(), 0.0);
        assert_eq!(wrap_angle(TAU).unwrap().radians(), 0.0);
        assert_eq!(wrap_angle(-FRAC_PI_2).unwrap().radians(), 3.0 * FRAC_PI_2);
    }

    #[test]
    fn wrap_rejects_non_finite() {
        assert!(matches!(wrap_angle(f64::NAN), Err(HvError::Domain(_))));
        assert!(wrap_angle(f64::INFINITY).is_err());
        assert!(wrap_angle(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn tiny_negative_wraps_below_tau() {
        let a = wrap_angle(-1e-20).unwrap();
        assert!(a.radians() < TAU);
    }

    #[test]
    fn contains_examples() {
        let upper = CircularInterval::half(Angle::ZERO);
        assert!(upper.contains(Angle::new(FRAC_PI_2)));
        assert!(!upper.contains(Angle::new(3.0 * FRAC_PI_2)));
        let wrapping = CircularInterval::half(Angle::new(3.0 * FRAC_PI_2));
        assert!(wrapping.contains(Angle::new(FRAC_PI_4)));
    }

    // Oracle for the wrapping-arc example: sample the arc densely and check
    // that π/4 sits strictly between two sampled interior points.
    #[test]
    fn wrapping_arc_membership_matches_sampled_arc() {
        let start = 3.0 * FRAC_PI_2;
        let n = 10_000;
        let hits = (0..n)
            .map(|k| (start + PI * (k as f64 + 0.5) / n as f64) % TAU)
            .filter(|t| (t - FRAC_PI_4).abs() < PI / n as f64)
            .count();
        assert!(hits >= 1);
    }

    #[test]
    fn half_open_boundaries() {
        let iv = CircularInterval::half(Angle::new(1.0));
        assert!(iv.contains(Angle::new(1.0)));
        assert!(!iv.contains(Angle::new(1.0 + PI)));
    }

    #[test]
    fn degenerate_lengths() {
        let empty = CircularInterval::new(Angle::new(2.0), 0.0).unwrap();
        let full = CircularInterval::new(Angle::new(2.0), TAU).unwrap();
        for k in 0..100 {
            let x = Angle::new(k as f64 * 0.0731);
            assert!(!empty.contains(x));
            assert!(full.contains(x));
        }
        assert!(CircularInterval::new(Angle::ZERO, TAU + 1e-9).is_err());
        assert!(CircularInterval::new(Angle::ZERO, -1e-9).is_err());
    }

    #[test]
    fn overlap_cases() {
        let a = CircularInterval::half(Angle::ZERO);
        let b = CircularInterval::half(Angle::new(FRAC_PI_2));
        assert!((a.overlap(&b) - FRAC_PI_2).abs() < 1e-15);
        assert!(a.overlap(&a.complement()).abs() < 1e-15);
        let wrap = CircularInterval::half(Angle::new(3.0 * FRAC_PI_2));
        assert!((a.overlap(&wrap) - FRAC_PI_2).abs() < 1e-15);
        let full = CircularInterval::new(Angle::new(0.5), TAU).unwrap();
        assert!((full.overlap(&full) - TAU).abs() < 1e-12);
    }

    #[test]
    fn half_arc_hit_fraction_is_one_half() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let iv = CircularInterval::half(Angle::new(2.2));
        let n = 1_000_000u64;
        let hits = (0..n)
            .filter(|_| iv.contains(Angle::new(rng.gen::<f64>() * TAU)))
            .count() as f64;
        let sigma = (0.25 * n as f64).sqrt();
        assert!((hits - 0.5 * n as f64).abs() < 4.0 * sigma);
    }

    proptest! {
        #[test]
        fn wrap_is_in_range_and_periodic(x in -1e6f64..1e6) {
            let w = wrap_angle(x).unwrap();
            prop_assert!((0.0..TAU).contains(&w.radians()));
            let shifted = wrap_angle(x + TAU).unwrap();
            prop_assert!(w.distance(shifted) < 1e-9);
        }

        #[test]
        fn contains_is_rotation_invariant(
            start in 0.0f64..TAU,
            len in 0.0f64..TAU,
            x in 0.0f64..TAU,
            theta in -20.0f64..20.0,
        ) {
            let iv = CircularInterval::new(Angle::new(start), len).unwrap();
            let xa = Angle::new(x);
            // Skip points within rounding distance of an endpoint.
            let off = xa.offset_from(iv.start());
            prop_assume!(off > 1e-9 && (off - len).abs() > 1e-9 && TAU - off > 1e-9);
            prop_assert_eq!(iv.contains(xa), iv.rotated(theta).contains(xa.rotate(theta)));
        }

        #[test]
        fn overlap_with_complement_partitions(start in 0.0f64..TAU, len in 0.0f64..TAU,
                                              s2 in 0.0f64..TAU, l2 in 0.0f64..TAU) {
            let a = CircularInterval::new(Angle::new(start), len).unwrap();
            let b = CircularInterval::new(Angle::new(s2), l2).unwrap();
            let total = a.overlap(&b) + a.overlap(&b.complement());
            prop_assert!((total - len).abs() < 1e-9);
        }
    }
}
