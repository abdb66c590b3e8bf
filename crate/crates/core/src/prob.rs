//! Two-outcome distributions and 2×2 joint tables over `{+1, −1}²`.

use serde::{Deserialize, Serialize};

use crate::error::{HvError, Result};

/// Tolerance for comparisons between exact (closed-form or exhaustive) probabilities.
pub const TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }
}

/// Distribution of a single ±1 outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDist {
    p_plus: f64,
}

impl OutcomeDist {
    pub const PLUS: OutcomeDist = OutcomeDist { p_plus: 1.0 };
    pub const MINUS: OutcomeDist = OutcomeDist { p_plus: 0.0 };

    pub fn new(p_plus: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_plus) {
            return Err(HvError::Domain(format!(
                "probability of +1 must lie in [0, 1], got {p_plus}"
            )));
        }
        Ok(OutcomeDist { p_plus })
    }

    /// Deterministic distribution: all mass on `+1` when `plus` is true.
    pub fn certain(plus: bool) -> Self {
        if plus {
            Self::PLUS
        } else {
            Self::MINUS
        }
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    pub fn p_minus(&self) -> f64 {
        1.0 - self.p_plus
    }

    pub fn prob(&self, o: Outcome) -> f64 {
        match o {
            Outcome::Plus => self.p_plus(),
            Outcome::Minus => self.p_minus(),
        }
    }
}

/// Joint distribution `P(x, y)` over `{+1, −1}²`, indexed `[x][y]` with `+1` first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    p: [[f64; 2]; 2],
}

impl JointTable {
    pub fn new(p: [[f64; 2]; 2]) -> Result<Self> {
        let flat = p.iter().flatten();
        if flat.clone().any(|&x| x.is_nan() || x < 0.0) {
            return Err(HvError::Domain(format!(
                "joint table has a negative or NaN entry: {p:?}"
            )));
        }
        let sum: f64 = flat.sum();
        if (sum - 1.0).abs() > TOL {
            return Err(HvError::Domain(format!("joint table sums to {sum}, not 1")));
        }
        Ok(JointTable { p })
    }

    /// Product table of two independent outcome distributions.
    pub fn product(x: OutcomeDist, y: OutcomeDist) -> Self {
        let mut p = [[0.0; 2]; 2];
        for ox in Outcome::BOTH {
            for oy in Outcome::BOTH {
                p[ox.index()][oy.index()] = x.prob(ox) * y.prob(oy);
            }
        }
        JointTable { p }
    }

    /// Table from raw outcome counts; `n` must be their sum and positive.
    pub fn from_counts(counts: [[u64; 2]; 2]) -> Self {
        let n: u64 = counts.iter().flatten().sum();
        assert!(n > 0, "from_counts needs at least one sample");
        let n = n as f64;
        JointTable {
            p: counts.map(|row| row.map(|c| c as f64 / n)),
        }
    }

    pub fn get(&self, x: Outcome, y: Outcome) -> f64 {
        self.p[x.index()][y.index()]
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        self.p
    }

    /// Cells in the order `(+,+), (+,−), (−,+), (−,−)`.
    pub fn cells(&self) -> [f64; 4] {
        [self.p[0][0], self.p[0][1], self.p[1][0], self.p[1][1]]
    }

    pub fn marginal_x(&self) -> OutcomeDist {
        OutcomeDist {
            p_plus: (self.p[0][0] + self.p[0][1]).clamp(0.0, 1.0),
        }
    }

    pub fn marginal_y(&self) -> OutcomeDist {
        OutcomeDist {
            p_plus: (self.p[0][0] + self.p[1][0]).clamp(0.0, 1.0),
        }
    }

    /// `E[XY]`.
    pub fn correlator(&self) -> f64 {
        self.p[0][0] + self.p[1][1] - self.p[0][1] - self.p[1][0]
    }

    pub fn max_abs_diff(&self, other: &JointTable) -> f64 {
        self.cells()
            .iter()
            .zip(other.cells())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Neumaier compensated accumulator, used where many small masses must add to one.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) fn stable_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = CompensatedSum::default();
    xs.into_iter().for_each(|x| acc.add(x));
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn outcome_dist_bounds() {
        assert!(OutcomeDist::new(-0.1).is_err());
        assert!(OutcomeDist::new(1.1).is_err());
        assert!(OutcomeDist::new(f64::NAN).is_err());
        let d = OutcomeDist::new(0.3).unwrap();
        assert_eq!(d.p_minus(), 1.0 - 0.3);
    }

    #[test]
    fn joint_table_validation() {
        assert!(JointTable::new([[0.5, 0.5], [0.0, 0.1]]).is_err());
        assert!(JointTable::new([[1.1, -0.1], [0.0, 0.0]]).is_err());
        assert!(JointTable::new([[0.25; 2]; 2]).is_ok());
    }

    #[test]
    fn correlator_of_anticorrelated_table() {
        let t = JointTable::new([[0.0, 0.5], [0.5, 0.0]]).unwrap();
        assert_eq!(t.correlator(), -1.0);
    }

    #[test]
    fn stable_sum_of_many_equal_masses() {
        let n = 3600;
        let m = 1.0 / n as f64;
        assert!((stable_sum(std::iter::repeat_n(m, n)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn counts_normalize() {
        let t = JointTable::from_counts([[1, 3], [0, 4]]);
        assert_eq!(t.cells(), [0.125, 0.375, 0.0, 0.5]);
    }

    proptest! {
        #[test]
        fn product_table_marginals_recover_factors(px in 0.0f64..=1.0, py in 0.0f64..=1.0) {
            let t = JointTable::product(OutcomeDist::new(px).unwrap(), OutcomeDist::new(py).unwrap());
            let sum: f64 = t.cells().iter().sum();
            prop_assert!((sum - 1.0).abs() < TOL);
            prop_assert!((t.marginal_x().p_plus() - px).abs() < TOL);
            prop_assert!((t.marginal_y().p_plus() - py).abs() < TOL);
        }

        #[test]
        fn marginals_are_row_and_column_sums(w in proptest::array::uniform4(0.0f64..1.0)) {
            let s: f64 = w.iter().sum();
            prop_assume!(s > 1e-3);
            let p = [[w[0] / s, w[1] / s], [w[2] / s, w[3] / s]];
            let t = JointTable::new(p).unwrap();
            prop_assert_eq!(t.marginal_x().p_plus(), (p[0][0] + p[0][1]).clamp(0.0, 1.0));
            prop_assert_eq!(t.marginal_y().p_plus(), (p[0][0] + p[1][0]).clamp(0.0, 1.0));
        }
    }
}
