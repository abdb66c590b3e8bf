//! CHSH expression over four correlators.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::circle::Angle;
use crate::engine::{evaluate_joint, Backend, JointResult};
use crate::error::Result;
use crate::models::Model;

/// Local (classical) bound on `|S|`.
pub const LOCAL_BOUND: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSpec {
    pub a0: Angle,
    pub a1: Angle,
    pub b0: Angle,
    pub b1: Angle,
}

impl Default for ChshSpec {
    /// `a ∈ {0, π/2}`, `b ∈ {π/4, 3π/4}`.
    fn default() -> Self {
        ChshSpec {
            a0: Angle::ZERO,
            a1: Angle::new(FRAC_PI_2),
            b0: Angle::new(FRAC_PI_4),
            b1: Angle::new(3.0 * FRAC_PI_4),
        }
    }
}

impl ChshSpec {
    /// Setting pairs in the order of [`ChshResult::correlators`].
    pub fn pairs(&self) -> [(Angle, Angle); 4] {
        [
            (self.a0, self.b0),
            (self.a0, self.b1),
            (self.a1, self.b0),
            (self.a1, self.b1),
        ]
    }
}

/// Sign of each correlator in `S`, in [`ChshSpec::pairs`] order.
pub const CHSH_SIGNS: [f64; 4] = [1.0, -1.0, 1.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    pub s: f64,
    pub correlators: [f64; 4],
    /// Standard error of `s` for Monte Carlo estimates.
    pub std_err: Option<f64>,
}

/// `E[XY]` at `(a, b)`.
pub fn correlator(model: &Model, a: Angle, b: Angle, backend: &Backend) -> Result<f64> {
    Ok(evaluate_joint(model, a, b, backend)?.table().correlator())
}

/// `S = E(a0,b0) − E(a0,b1) + E(a1,b0) + E(a1,b1)`.
pub fn chsh_value(model: &Model, spec: &ChshSpec, backend: &Backend) -> Result<ChshResult> {
    let mut correlators = [0.0; 4];
    let mut var = Some(0.0);
    for (slot, (a, b)) in correlators.iter_mut().zip(spec.pairs()) {
        let r = evaluate_joint(model, a, b, backend)?;
        let e = r.table().correlator();
        *slot = e;
        var = match (&r, var) {
            // XY = ±1, so a sample mean of n draws has variance (1 − E²)/n.
            (JointResult::Estimate(est), Some(v)) => {
                Some(v + (1.0 - e * e).max(0.0) / est.n_samples as f64)
            }
            _ => None,
        };
    }
    let s = correlators
        .iter()
        .zip(CHSH_SIGNS)
        .map(|(e, sign)| e * sign)
        .sum();
    Ok(ChshResult {
        s,
        correlators,
        std_err: var.map(f64::sqrt),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::McOptions;
    use crate::models::{
        anticorrelated_coin, random_local_deterministic, PaperModel, SingletReference,
    };
    use crate::prob::TOL;
    use proptest::prelude::*;
    use std::f64::consts::{PI, SQRT_2};

    fn paper() -> Model {
        Model::Paper(PaperModel)
    }

    #[test]
    fn paper_correlator_examples() {
        let e = |b: f64| correlator(&paper(), Angle::ZERO, Angle::new(b), &Backend::Exact).unwrap();
        assert!((e(0.0) + 1.0).abs() < TOL);
        assert!(e(FRAC_PI_2).abs() < TOL);
        assert!((e(PI) - 1.0).abs() < TOL);
    }

    #[test]
    fn paper_reaches_tsirelson_value() {
        let r = chsh_value(&paper(), &ChshSpec::default(), &Backend::Exact).unwrap();
        assert!((r.s.abs() - 2.0 * SQRT_2).abs() < TOL, "{r:?}");
        assert!(r.std_err.is_none());
    }

    #[test]
    fn coin_model_sits_on_local_bound() {
        let r = chsh_value(
            &Model::Discrete(anticorrelated_coin()),
            &ChshSpec::default(),
            &Backend::Exact,
        )
        .unwrap();
        assert!((r.s.abs() - LOCAL_BOUND).abs() < TOL);
    }

    #[test]
    fn random_local_models_respect_local_bound() {
        for seed in 0..200 {
            let m = Model::Discrete(random_local_deterministic(seed, 2 + (seed % 5) as usize));
            let r = chsh_value(&m, &ChshSpec::default(), &Backend::Exact).unwrap();
            assert!(r.s.abs() <= LOCAL_BOUND + TOL, "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn mc_estimate_is_near_exact() {
        let opts = McOptions {
            n_samples: 40_000,
            seed: 11,
            n_workers: 2,
        };
        let r = chsh_value(&paper(), &ChshSpec::default(), &Backend::MonteCarlo(opts)).unwrap();
        let se = r.std_err.unwrap();
        assert!((r.s + 2.0 * SQRT_2).abs() < 5.0 * se, "{r:?}");
    }

    proptest! {
        #[test]
        fn paper_matches_singlet_for_any_settings(a0 in 0.0..7.0f64, a1 in 0.0..7.0f64, b0 in 0.0..7.0f64, b1 in 0.0..7.0f64) {
            let spec = ChshSpec { a0: Angle::new(a0), a1: Angle::new(a1), b0: Angle::new(b0), b1: Angle::new(b1) };
            let p = chsh_value(&paper(), &spec, &Backend::Exact).unwrap();
            let q = chsh_value(&Model::Singlet(SingletReference), &spec, &Backend::Exact).unwrap();
            prop_assert!((p.s - q.s).abs() < TOL);
            prop_assert!(p.s.abs() <= 4.0);
        }
    }
}
