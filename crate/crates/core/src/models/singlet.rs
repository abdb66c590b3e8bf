use crate::circle::Angle;
use crate::prob::JointTable;

/// Quantum singlet statistics for spin measurements along angles `a` and `b`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SingletReference;

pub fn singlet_joint(a: Angle, b: Angle) -> JointTable {
    let half = (b.radians() - a.radians()) / 2.0;
    let same = 0.5 * half.sin().powi(2);
    let diff = 0.5 * half.cos().powi(2);
    JointTable::new([[same, diff], [diff, same]]).expect("singlet table is normalized")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{Outcome, TOL};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn pp(a: f64, b: f64) -> f64 {
        singlet_joint(Angle::new(a), Angle::new(b)).get(Outcome::Plus, Outcome::Plus)
    }

    #[test]
    fn examples() {
        assert_eq!(pp(0.0, 0.0), 0.0);
        assert!((pp(0.0, PI) - 0.5).abs() < TOL);
        assert!((pp(0.0, FRAC_PI_2) - 0.25).abs() < TOL);
    }

    #[test]
    fn correlator_is_minus_cosine() {
        for k in 0..64 {
            let b = k as f64 * 0.1;
            let e = singlet_joint(Angle::ZERO, Angle::new(b)).correlator();
            assert!((e + b.cos()).abs() < TOL);
        }
    }
}
