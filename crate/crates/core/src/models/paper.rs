//! The arc-response model with `U = V` uniform and `W = a`.
//!
//! Alice answers `+1` when `u` lies in the half circle starting at her
//! setting. Bob answers `−1` when `v` lies in the half circle starting at
//! `w + π·sin²((b − w)/2)`. With `w = a` the two arcs are offset by exactly
//! the amount that reproduces the singlet statistics.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::circle::{Angle, CircularInterval};
use crate::models::HvModel;
use crate::prob::OutcomeDist;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PaperModel;

/// Offset `π·sin²((b − w)/2)` of Bob's arc relative to `w`.
pub fn bob_shift(b: Angle, w: Angle) -> f64 {
    let half = (b.radians() - w.radians()) / 2.0;
    PI * half.sin().powi(2)
}

/// Arc of `u` values on which Alice answers `+1`.
pub fn alice_plus_arc(a: Angle) -> CircularInterval {
    CircularInterval::half(a)
}

/// Arc of `v` values on which Bob answers `−1`.
pub fn bob_minus_arc(b: Angle, w: Angle) -> CircularInterval {
    CircularInterval::half(w.rotate(bob_shift(b, w)))
}

pub fn paper_response_x(a: Angle, u: Angle) -> OutcomeDist {
    OutcomeDist::certain(alice_plus_arc(a).contains(u))
}

pub fn paper_response_y(b: Angle, v: Angle, w: Angle) -> OutcomeDist {
    OutcomeDist::certain(!bob_minus_arc(b, w).contains(v))
}

/// Draws `(u, v, w)`: `u = v` uniform on the circle and `w = a`. `b` is unused.
pub fn paper_sample_hv<R: Rng + ?Sized>(a: Angle, _b: Angle, rng: &mut R) -> (Angle, Angle, Angle) {
    let u = Angle::new(rng.gen::<f64>() * TAU);
    (u, u, a)
}

impl HvModel for PaperModel {
    type Setting = Angle;
    type LocalA = Angle;
    type LocalB = Angle;
    type Nonlocal = Angle;

    fn sample_local<R: Rng + ?Sized>(&self, rng: &mut R) -> (Angle, Angle) {
        let u = Angle::new(rng.gen::<f64>() * TAU);
        (u, u)
    }

    fn sample_nonlocal<R: Rng + ?Sized>(
        &self,
        a: Angle,
        _b: Angle,
        _u: Angle,
        _v: Angle,
        _rng: &mut R,
    ) -> Angle {
        a
    }

    fn response_x(&self, a: Angle, u: Angle, _w: Angle) -> OutcomeDist {
        paper_response_x(a, u)
    }

    fn response_y(&self, b: Angle, v: Angle, w: Angle) -> OutcomeDist {
        paper_response_y(b, v, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::chunk_stream;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn ang(x: f64) -> Angle {
        Angle::new(x)
    }

    // Brute-force oracle: fraction of a fine midpoint grid of the arc
    // `[start, start + π)` that lies within 1e-3 of `x`.
    fn near_arc_oracle(start: f64, x: f64) -> bool {
        let n = 100_000;
        (0..n).any(|k| {
            let t = ang(start + PI * (k as f64 + 0.5) / n as f64);
            t.distance(ang(x)) < 1e-3
        })
    }

    #[test]
    fn response_x_examples() {
        assert_eq!(paper_response_x(ang(0.0), ang(FRAC_PI_2)).p_plus(), 1.0);
        assert_eq!(
            paper_response_x(ang(0.0), ang(3.0 * FRAC_PI_2)).p_plus(),
            0.0
        );
        // u = 0 is the excluded end of [π, 2π).
        assert_eq!(paper_response_x(ang(PI), ang(0.0)).p_plus(), 0.0);
        assert!(paper_response_x(ang(PI), ang(PI)).p_plus() == 1.0);
    }

    #[test]
    fn response_y_examples() {
        assert_eq!(
            paper_response_y(ang(0.0), ang(FRAC_PI_2), ang(0.0)).p_minus(),
            1.0
        );
        assert_eq!(
            paper_response_y(ang(FRAC_PI_2), ang(0.0), ang(0.0)).p_minus(),
            0.0
        );
        assert_eq!(
            paper_response_y(ang(0.0), ang(3.0 * FRAC_PI_2), ang(0.0)).p_minus(),
            0.0
        );
    }

    #[test]
    fn response_y_shift_matches_quadrature_oracle() {
        // b = π/2, w = 0: Bob's −1 arc starts at π/2. v = 0 is outside it and
        // v = π is well inside it.
        let arc = bob_minus_arc(ang(FRAC_PI_2), ang(0.0));
        assert!((arc.start().radians() - FRAC_PI_2).abs() < 1e-15);
        assert!(!near_arc_oracle(FRAC_PI_2, 0.0 + 0.01));
        assert!(near_arc_oracle(FRAC_PI_2, PI));
        assert_eq!(
            paper_response_y(ang(FRAC_PI_2), ang(PI), ang(0.0)).p_minus(),
            1.0
        );
    }

    #[test]
    fn sampled_hv_has_u_equal_v_and_w_equal_a() {
        let mut rng = chunk_stream(5, 0);
        for _ in 0..1000 {
            let (u, v, w) = paper_sample_hv(ang(1.3), ang(FRAC_PI_4), &mut rng);
            assert_eq!(u, v);
            assert_eq!(w.radians(), 1.3);
        }
    }
}
