//! Outcome marginals with parts of the hidden variable averaged out.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::circle::{Angle, CircularInterval};
use crate::error::{HvError, Result};
use crate::models::paper::{alice_plus_arc, bob_minus_arc, paper_response_x, paper_response_y};
use crate::models::{Component, DiscreteModel, Model};
use crate::prob::{CompensatedSum, JointTable, OutcomeDist};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Site {
    X,
    Y,
}

/// Two local-HV values are taken as equal (for `U = V` models) within this distance.
const SAME_HV_TOL: f64 = 1e-12;

fn unsupported(what: &str) -> HvError {
    HvError::UnsupportedModel(format!(
        "the singlet reference has no hidden variables ({what})"
    ))
}

fn discrete_indices(m: &DiscreteModel, a: Angle, b: Angle) -> Result<(usize, usize)> {
    Ok((m.setting_a_index(a)?, m.setting_b_index(b)?))
}

fn discrete_w_avg(
    m: &DiscreteModel,
    (ai, bi): (usize, usize),
    (ui, vi): (usize, usize),
    site: Site,
) -> Result<f64> {
    let dist = m.w_dist(ai, bi, ui, vi).ok_or_else(|| {
        HvError::Domain(format!(
            "no distribution for W at (a={ai}, b={bi}, u={ui}, v={vi}); the event has probability zero"
        ))
    })?;
    let mut acc = CompensatedSum::default();
    for &(w, pw) in dist {
        let p = match site {
            Site::X => m.x_plus(ai, ui, w),
            Site::Y => m.y_plus(bi, vi, w),
        };
        acc.add(pw * p);
    }
    Ok(acc.value().clamp(0.0, 1.0))
}

/// `Σ_w P(w | a, b, u, v) · P_Y(· | b, v, w)`.
pub fn marginal_y_given_abuv(
    model: &Model,
    a: Angle,
    b: Angle,
    u: f64,
    v: f64,
) -> Result<OutcomeDist> {
    match model {
        // W = a is a point mass, so the average is one response evaluation.
        Model::Paper(_) => Ok(paper_response_y(b, Angle::new(v), a)),
        Model::Discrete(m) => {
            let ab = discrete_indices(m, a, b)?;
            let uv = (
                m.support_index(Component::U, u)?,
                m.support_index(Component::V, v)?,
            );
            OutcomeDist::new(discrete_w_avg(m, ab, uv, Site::Y)?)
        }
        Model::Singlet(_) => Err(unsupported("P(Y | a, b, u, v)")),
    }
}

/// `Σ_w P(w | a, b, u, v) · P_X(· | a, u, w)`.
pub fn marginal_x_given_abuv(
    model: &Model,
    a: Angle,
    b: Angle,
    u: f64,
    v: f64,
) -> Result<OutcomeDist> {
    match model {
        Model::Paper(_) => Ok(paper_response_x(a, Angle::new(u))),
        Model::Discrete(m) => {
            let ab = discrete_indices(m, a, b)?;
            let uv = (
                m.support_index(Component::U, u)?,
                m.support_index(Component::V, v)?,
            );
            OutcomeDist::new(discrete_w_avg(m, ab, uv, Site::X)?)
        }
        Model::Singlet(_) => Err(unsupported("P(X | a, b, u, v)")),
    }
}

/// `Σ_v P(v | u) Σ_w P(w | a, b, u, v) · P_Y(· | b, v, w)`. For the arc
/// model `V = U`, so the conditional on `v` is a point mass at `u`.
pub fn marginal_y_given_abu(model: &Model, a: Angle, b: Angle, u: f64) -> Result<OutcomeDist> {
    conditional_marginal(model, Site::Y, a, b, &[(Component::U, u)])
}

/// Closed form of `P(Y = −1 | a, b, ·)` for the arc model: the indicator of
/// the arc starting at `a + π·sin²((b − a)/2)`.
pub fn paper_y_minus_arc(a: Angle, b: Angle) -> CircularInterval {
    bob_minus_arc(b, a)
}

/// Probability of `+1` at `site`, conditioned on the listed local components
/// and averaged over everything else (the rest of the local part and `W`).
pub fn conditional_marginal(
    model: &Model,
    site: Site,
    a: Angle,
    b: Angle,
    given: &[(Component, f64)],
) -> Result<OutcomeDist> {
    if given.iter().any(|(c, _)| *c == Component::W) {
        return Err(HvError::Domain(
            "conditioning on W is not a marginal over W".into(),
        ));
    }
    match model {
        Model::Singlet(_) => {
            if !given.is_empty() {
                return Err(unsupported("conditioning on local hidden variables"));
            }
            let t = crate::models::singlet_joint(a, b);
            Ok(match site {
                Site::X => t.marginal_x(),
                Site::Y => t.marginal_y(),
            })
        }
        Model::Paper(_) => {
            let mut value: Option<f64> = None;
            for &(_, x) in given {
                let x = Angle::new(x).radians();
                match value {
                    Some(prev) if Angle::new(prev).distance(Angle::new(x)) > SAME_HV_TOL => {
                        return Err(HvError::Domain(format!(
                            "u = {prev} and v = {x} differ; U = V makes this event impossible"
                        )))
                    }
                    _ => value = Some(x),
                }
            }
            let plus_arc = paper_plus_arc(site, a, b);
            Ok(match value {
                None => OutcomeDist::new(plus_arc.uniform_measure()).expect("arc measure"),
                Some(t) => OutcomeDist::certain(plus_arc.contains(Angle::new(t))),
            })
        }
        Model::Discrete(m) => {
            let ab = discrete_indices(m, a, b)?;
            let mut u_fix = None;
            let mut v_fix = None;
            for &(c, x) in given {
                let idx = m.support_index(c, x)?;
                match c {
                    Component::U => u_fix = Some(idx),
                    Component::V => v_fix = Some(idx),
                    Component::W => unreachable!(),
                }
            }
            let mut num = CompensatedSum::default();
            let mut den = CompensatedSum::default();
            for e in m.uv_masses() {
                if u_fix.is_some_and(|u| u != e.u) || v_fix.is_some_and(|v| v != e.v) {
                    continue;
                }
                num.add(e.p * discrete_w_avg(m, ab, (e.u, e.v), site)?);
                den.add(e.p);
            }
            if den.value() <= 0.0 {
                return Err(HvError::Domain(
                    "conditioning event has probability zero".into(),
                ));
            }
            OutcomeDist::new((num.value() / den.value()).clamp(0.0, 1.0))
        }
    }
}

/// Arc of the shared HV value `t = u = v` on which `site` answers `+1` in the arc model.
pub(crate) fn paper_plus_arc(site: Site, a: Angle, b: Angle) -> CircularInterval {
    match site {
        Site::X => alice_plus_arc(a),
        Site::Y => bob_minus_arc(b, a).complement(),
    }
}

/// `P(x, y | a, b, u, v, w)` weighted by `P(w | a, b, u, v)`, one entry per `w`.
pub fn joint_given_abuv(
    model: &Model,
    a: Angle,
    b: Angle,
    u: f64,
    v: f64,
) -> Result<Vec<(f64, JointTable)>> {
    match model {
        Model::Paper(_) => {
            let (ua, va) = (Angle::new(u), Angle::new(v));
            Ok(vec![(
                1.0,
                JointTable::product(paper_response_x(a, ua), paper_response_y(b, va, a)),
            )])
        }
        Model::Discrete(m) => {
            let (ai, bi) = discrete_indices(m, a, b)?;
            let (ui, vi) = (
                m.support_index(Component::U, u)?,
                m.support_index(Component::V, v)?,
            );
            let dist = m
                .w_dist(ai, bi, ui, vi)
                .ok_or_else(|| HvError::Domain("conditioning event has probability zero".into()))?;
            dist.iter()
                .map(|&(w, pw)| {
                    let x = OutcomeDist::new(m.x_plus(ai, ui, w))?;
                    let y = OutcomeDist::new(m.y_plus(bi, vi, w))?;
                    Ok((pw, JointTable::product(x, y)))
                })
                .collect()
        }
        Model::Singlet(_) => Err(unsupported("P(x, y, w | a, b, u, v)")),
    }
}

/// Sums the `w`-indexed joint tables against their weights.
pub fn marginalize_over_w(rows: &[(f64, JointTable)]) -> Result<JointTable> {
    let mut acc = [[CompensatedSum::default(); 2]; 2];
    for (pw, t) in rows {
        for (i, row) in t.entries().iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                acc[i][j].add(pw * p);
            }
        }
    }
    JointTable::new(acc.map(|r| r.map(|c| c.value().max(0.0))))
}

/// Evenly spaced angles `2πk/n`, `k = 0..n`.
pub fn angle_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{anticorrelated_coin, discretize_paper_model, PaperModel};
    use crate::prob::TOL;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn paper() -> Model {
        Model::Paper(PaperModel)
    }

    // Oracle: integrate Bob's response against the point mass of W at a by
    // averaging over a tiny window of w around a. Independent of the closed
    // form, it only calls the raw response function.
    fn y_minus_oracle(a: f64, b: f64, v: f64) -> f64 {
        let n = 64;
        (0..n)
            .map(|k| {
                let w = a + 1e-12 * (k as f64 / n as f64 - 0.5);
                paper_response_y(Angle::new(b), Angle::new(v), Angle::new(w)).p_minus()
            })
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn y_given_abuv_examples() {
        let m = paper();
        let p = marginal_y_given_abuv(&m, Angle::ZERO, Angle::ZERO, FRAC_PI_2, FRAC_PI_2).unwrap();
        assert_eq!(p.p_minus(), 1.0);
        let p =
            marginal_y_given_abuv(&m, Angle::ZERO, Angle::new(PI), FRAC_PI_2, FRAC_PI_2).unwrap();
        assert_eq!(p.p_minus(), 0.0);
        assert_eq!(y_minus_oracle(0.0, PI, FRAC_PI_2), 0.0);
        assert_eq!(y_minus_oracle(0.0, 0.0, FRAC_PI_2), 1.0);
    }

    #[test]
    fn y_given_abu_examples() {
        let m = paper();
        let u = 3.0 * FRAC_PI_4;
        assert_eq!(
            marginal_y_given_abu(&m, Angle::ZERO, Angle::ZERO, u)
                .unwrap()
                .p_minus(),
            1.0
        );
        assert_eq!(
            marginal_y_given_abu(&m, Angle::new(FRAC_PI_2), Angle::ZERO, u)
                .unwrap()
                .p_minus(),
            0.0
        );
        assert_eq!(y_minus_oracle(0.0, 0.0, u), 1.0);
        assert_eq!(y_minus_oracle(FRAC_PI_2, 0.0, u), 0.0);
    }

    #[test]
    fn abu_reduces_to_abuv_with_v_equal_u() {
        let m = paper();
        for k in 0..50 {
            let a = Angle::new(0.37 * k as f64);
            let u = 0.91 * k as f64 + 0.05;
            assert_eq!(
                marginal_y_given_abu(&m, a, a, u).unwrap(),
                marginal_y_given_abuv(&m, a, a, u, u).unwrap()
            );
        }
    }

    #[test]
    fn single_point_w_matches_response() {
        let m = anticorrelated_coin();
        let model = Model::Discrete(m.clone());
        let b = Angle::new(FRAC_PI_4);
        for l in [0.0, 1.0] {
            let p = marginal_y_given_abuv(&model, Angle::ZERO, b, l, l).unwrap();
            assert_eq!(p.p_plus(), m.y_plus(0, l as usize, 0));
        }
    }

    #[test]
    fn paper_conditioning_rejects_unequal_u_v() {
        let err = conditional_marginal(
            &paper(),
            Site::Y,
            Angle::ZERO,
            Angle::ZERO,
            &[(Component::U, 1.0), (Component::V, 2.0)],
        );
        assert!(matches!(err, Err(HvError::Domain(_))));
    }

    #[test]
    fn unconditional_paper_marginals_are_one_half() {
        for site in [Site::X, Site::Y] {
            let p = conditional_marginal(&paper(), site, Angle::new(0.3), Angle::new(2.0), &[])
                .unwrap();
            assert!((p.p_plus() - 0.5).abs() < TOL);
        }
    }

    #[test]
    fn grid_model_marginal_matches_continuous_on_grid_points() {
        let grid = discretize_paper_model(24).unwrap();
        let g = Model::Discrete(grid.clone());
        let (a, b) = (Angle::new(FRAC_PI_4), Angle::new(PI));
        for &t in grid.support(Component::U) {
            let d = marginal_y_given_abuv(&g, a, b, t, t).unwrap();
            let c = marginal_y_given_abuv(&paper(), a, b, t, t).unwrap();
            assert_eq!(d, c);
        }
    }

    #[test]
    fn marginalizing_w_rows_keeps_normalization() {
        let rows = joint_given_abuv(&paper(), Angle::ZERO, Angle::new(1.0), 2.0, 2.0).unwrap();
        let t = marginalize_over_w(&rows).unwrap();
        assert!((t.cells().iter().sum::<f64>() - 1.0).abs() < TOL);
    }
}
