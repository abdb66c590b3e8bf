//! Baseline models with a trivial nonlocal part.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rand::Rng;

use crate::error::{HvError, Result};
use crate::models::discrete::{DiscreteModel, DiscreteSpec, NonlocalRow, ResponseRow, UvMass};
use crate::rng::chunk_stream;

/// Deterministic local model driven by one shared variable `λ = U = V`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDeterministicParams {
    pub settings_a: Vec<f64>,
    pub settings_b: Vec<f64>,
    pub lambda_probs: Vec<f64>,
    /// `x_plus[a][λ]`: does Alice answer `+1`?
    pub x_plus: Vec<Vec<bool>>,
    pub y_plus: Vec<Vec<bool>>,
}

pub fn build_local_deterministic(params: &LocalDeterministicParams) -> Result<DiscreteModel> {
    let n_lambda = params.lambda_probs.len();
    let check_shape = |table: &str, rows: &[Vec<bool>], n_settings: usize| -> Result<()> {
        if rows.len() != n_settings {
            return Err(HvError::validation(
                table,
                "-",
                format!("expected {n_settings} rows, found {}", rows.len()),
            ));
        }
        Ok(())
    };
    check_shape("p_x_given_auw", &params.x_plus, params.settings_a.len())?;
    check_shape("p_y_given_bvw", &params.y_plus, params.settings_b.len())?;
    let as_rows = |rows: &[Vec<bool>]| -> Vec<ResponseRow> {
        rows.iter()
            .enumerate()
            .map(|(s, r)| ResponseRow {
                setting: s,
                w: 0,
                plus: r.iter().map(|&x| if x { 1.0 } else { 0.0 }).collect(),
            })
            .collect()
    };
    let lambdas: Vec<f64> = (0..n_lambda).map(|k| k as f64).collect();
    DiscreteModel::new(DiscreteSpec {
        name: "local-deterministic".into(),
        settings_a: params.settings_a.clone(),
        settings_b: params.settings_b.clone(),
        support_u: lambdas.clone(),
        support_v: lambdas,
        support_w: vec![0.0],
        p_uv: params
            .lambda_probs
            .iter()
            .enumerate()
            .map(|(k, &p)| UvMass { u: k, v: k, p })
            .collect(),
        p_w: trivial_w_rows(params.settings_a.len(), params.settings_b.len()),
        p_x: as_rows(&params.x_plus),
        p_y: as_rows(&params.y_plus),
    })
}

fn trivial_w_rows(n_a: usize, n_b: usize) -> Vec<NonlocalRow> {
    (0..n_a)
        .flat_map(|a| {
            (0..n_b).map(move |b| NonlocalRow {
                a,
                b,
                u: None,
                v: None,
                dist: vec![(0, 1.0)],
            })
        })
        .collect()
}

/// Standard CHSH settings: Alice `{0, π/2}`, Bob `{π/4, 3π/4}`.
pub fn chsh_settings() -> (Vec<f64>, Vec<f64>) {
    (vec![0.0, FRAC_PI_2], vec![FRAC_PI_4, 3.0 * FRAC_PI_4])
}

/// Fair coin `λ`; Alice answers `+1` iff `λ = 0`, Bob iff `λ = 1`, at every setting.
pub fn anticorrelated_coin() -> DiscreteModel {
    let (sa, sb) = chsh_settings();
    build_local_deterministic(&LocalDeterministicParams {
        x_plus: vec![vec![true, false]; sa.len()],
        y_plus: vec![vec![false, true]; sb.len()],
        settings_a: sa,
        settings_b: sb,
        lambda_probs: vec![0.5, 0.5],
    })
    .expect("coin model is valid")
    .renamed("local-coin")
}

fn random_distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Random deterministic local model on the CHSH settings.
pub fn random_local_deterministic(seed: u64, n_lambda: usize) -> DiscreteModel {
    let mut rng = chunk_stream(seed, 0);
    let (sa, sb) = chsh_settings();
    let mut table = |n: usize| -> Vec<Vec<bool>> {
        (0..n)
            .map(|_| (0..n_lambda).map(|_| rng.gen::<bool>()).collect())
            .collect()
    };
    let x_plus = table(sa.len());
    let y_plus = table(sb.len());
    let lambda_probs = random_distribution(&mut chunk_stream(seed, 1), n_lambda);
    build_local_deterministic(&LocalDeterministicParams {
        settings_a: sa,
        settings_b: sb,
        lambda_probs,
        x_plus,
        y_plus,
    })
    .expect("random local model is valid")
}

/// Shape of a randomly generated model with a trivial nonlocal part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomModelShape {
    pub n_settings_a: usize,
    pub n_settings_b: usize,
    pub n_u: usize,
    pub n_v: usize,
}

impl Default for RandomModelShape {
    fn default() -> Self {
        RandomModelShape {
            n_settings_a: 2,
            n_settings_b: 2,
            n_u: 3,
            n_v: 3,
        }
    }
}

/// Random model that satisfies remote-setting independence given `(U, V)` by
/// construction: arbitrary `P_UV`, stochastic responses, and a `W` that sits
/// at its first value regardless of settings. `W` keeps a second value with
/// its own (distinct) responses so a single-table mutation of `P(W | …)` can
/// introduce signaling.
pub fn random_cr_local_model<R: Rng + ?Sized>(
    rng: &mut R,
    shape: RandomModelShape,
) -> DiscreteModel {
    let RandomModelShape {
        n_settings_a,
        n_settings_b,
        n_u,
        n_v,
    } = shape;
    let settings = |n: usize| {
        (0..n)
            .map(|k| k as f64 * std::f64::consts::TAU / (2 * n) as f64)
            .collect::<Vec<_>>()
    };
    let uv = random_distribution(rng, n_u * n_v);
    let p_uv = uv
        .into_iter()
        .enumerate()
        .map(|(i, p)| UvMass {
            u: i / n_v,
            v: i % n_v,
            p,
        })
        .collect();
    let mut responses = |n_settings: usize, n_local: usize| -> Vec<ResponseRow> {
        let mut rows = Vec::new();
        for s in 0..n_settings {
            for w in 0..2 {
                rows.push(ResponseRow {
                    setting: s,
                    w,
                    plus: (0..n_local).map(|_| rng.gen::<f64>()).collect(),
                });
            }
        }
        rows
    };
    let p_x = responses(n_settings_a, n_u);
    let p_y = responses(n_settings_b, n_v);
    DiscreteModel::new(DiscreteSpec {
        name: "random-cr-local".into(),
        settings_a: settings(n_settings_a),
        settings_b: settings(n_settings_b),
        support_u: (0..n_u).map(|k| k as f64).collect(),
        support_v: (0..n_v).map(|k| k as f64).collect(),
        support_w: vec![0.0, 1.0],
        p_uv,
        p_w: trivial_w_rows(n_settings_a, n_settings_b),
        p_x,
        p_y,
    })
    .expect("random model is valid")
}

impl DiscreteModel {
    pub fn renamed(self, name: &str) -> DiscreteModel {
        let mut spec = self.spec().clone();
        spec.name = name.to_string();
        DiscreteModel::new(spec).expect("renaming keeps a valid model valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Component;

    #[test]
    fn coin_is_deterministic_and_anticorrelated() {
        let m = anticorrelated_coin();
        assert_eq!(m.support(Component::W).len(), 1);
        for a in 0..2 {
            for l in 0..2 {
                assert_ne!(m.x_plus(a, l, 0), m.y_plus(a, l, 0));
            }
        }
    }

    #[test]
    fn invalid_lambda_distribution_is_rejected() {
        let (sa, sb) = chsh_settings();
        let err = build_local_deterministic(&LocalDeterministicParams {
            x_plus: vec![vec![true, false]; 2],
            y_plus: vec![vec![false, true]; 2],
            settings_a: sa,
            settings_b: sb,
            lambda_probs: vec![0.5, 0.4],
        });
        assert!(matches!(err, Err(HvError::Validation { .. })));
    }

    #[test]
    fn mismatched_table_shape_is_rejected() {
        let (sa, sb) = chsh_settings();
        let err = build_local_deterministic(&LocalDeterministicParams {
            x_plus: vec![vec![true, false]; 3],
            y_plus: vec![vec![false, true]; 2],
            settings_a: sa,
            settings_b: sb,
            lambda_probs: vec![0.5, 0.5],
        });
        assert!(err.is_err());
    }

    #[test]
    fn random_models_are_reproducible() {
        assert_eq!(
            random_local_deterministic(7, 2),
            random_local_deterministic(7, 2)
        );
        let mut r1 = chunk_stream(3, 0);
        let mut r2 = chunk_stream(3, 0);
        let shape = RandomModelShape::default();
        assert_eq!(
            random_cr_local_model(&mut r1, shape),
            random_cr_local_model(&mut r2, shape)
        );
    }
}
