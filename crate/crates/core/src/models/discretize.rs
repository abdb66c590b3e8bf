//! Finite-grid version of the arc-response model.
//!
//! `U = V` takes the values `2πk/n` with mass `1/n` each, and `W = a` ranges
//! over Alice's settings. Joint probabilities become grid-point counts in
//! arcs, so every cell is off by at most one point mass, `1/n`.

use std::f64::consts::{FRAC_PI_4, TAU};

use crate::circle::Angle;
use crate::error::{HvError, Result};
use crate::models::discrete::{DiscreteModel, DiscreteSpec, NonlocalRow, ResponseRow, UvMass};
use crate::models::paper::{paper_response_x, paper_response_y};

const ON_GRID_TOL: f64 = 1e-9;

pub fn grid_point(n_grid: usize, k: usize) -> f64 {
    TAU * k as f64 / n_grid as f64
}

fn grid_index(n_grid: usize, x: Angle) -> Option<usize> {
    let k = (x.radians() / TAU * n_grid as f64).round() as usize % n_grid;
    (Angle::new(grid_point(n_grid, k)).distance(x) <= ON_GRID_TOL).then_some(k)
}

/// Multiples of π/4 that fall on the `n_grid`-point grid.
pub fn default_grid_settings(n_grid: usize) -> Vec<Angle> {
    (0..8)
        .map(|k| Angle::new(k as f64 * FRAC_PI_4))
        .filter(|&a| n_grid > 0 && grid_index(n_grid, a).is_some())
        .collect()
}

pub fn discretize_paper_model(n_grid: usize) -> Result<DiscreteModel> {
    let settings = default_grid_settings(n_grid);
    discretize_paper_model_with_settings(n_grid, &settings, &settings)
}

pub fn discretize_paper_model_with_settings(
    n_grid: usize,
    settings_a: &[Angle],
    settings_b: &[Angle],
) -> Result<DiscreteModel> {
    if n_grid < 2 {
        return Err(HvError::Domain(format!(
            "grid needs at least 2 points, got {n_grid}"
        )));
    }
    for s in settings_a.iter().chain(settings_b) {
        if grid_index(n_grid, *s).is_none() {
            return Err(HvError::Domain(format!(
                "setting {s} is not on the {n_grid}-point grid"
            )));
        }
    }
    let grid: Vec<f64> = (0..n_grid).map(|k| grid_point(n_grid, k)).collect();
    let mass = 1.0 / n_grid as f64;
    let (n_a, n_b) = (settings_a.len(), settings_b.len());

    let mut p_w = Vec::with_capacity(n_a * n_b);
    for a in 0..n_a {
        for b in 0..n_b {
            p_w.push(NonlocalRow {
                a,
                b,
                u: None,
                v: None,
                dist: vec![(a, 1.0)],
            });
        }
    }
    let mut p_x = Vec::with_capacity(n_a * n_a);
    for (ai, &a) in settings_a.iter().enumerate() {
        for w in 0..n_a {
            let plus = grid
                .iter()
                .map(|&u| paper_response_x(a, Angle::new(u)).p_plus())
                .collect();
            p_x.push(ResponseRow {
                setting: ai,
                w,
                plus,
            });
        }
    }
    let mut p_y = Vec::with_capacity(n_b * n_a);
    for (bi, &b) in settings_b.iter().enumerate() {
        for (wi, &w) in settings_a.iter().enumerate() {
            let plus = grid
                .iter()
                .map(|&v| paper_response_y(b, Angle::new(v), w).p_plus())
                .collect();
            p_y.push(ResponseRow {
                setting: bi,
                w: wi,
                plus,
            });
        }
    }
    DiscreteModel::new(DiscreteSpec {
        name: format!("paper-grid:{n_grid}"),
        settings_a: settings_a.iter().map(|a| a.radians()).collect(),
        settings_b: settings_b.iter().map(|b| b.radians()).collect(),
        support_u: grid.clone(),
        support_v: grid,
        support_w: settings_a.iter().map(|a| a.radians()).collect(),
        p_uv: (0..n_grid)
            .map(|k| UvMass {
                u: k,
                v: k,
                p: mass,
            })
            .collect(),
        p_w,
        p_x,
        p_y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Component;

    #[test]
    fn default_settings_follow_the_grid() {
        assert_eq!(default_grid_settings(360).len(), 8);
        assert_eq!(default_grid_settings(4).len(), 4);
        assert_eq!(default_grid_settings(3).len(), 1);
    }

    #[test]
    fn rejects_tiny_grids_and_off_grid_settings() {
        assert!(discretize_paper_model(1).is_err());
        let off = [Angle::new(0.1)];
        assert!(matches!(
            discretize_paper_model_with_settings(360, &off, &off),
            Err(HvError::Domain(_))
        ));
    }

    #[test]
    fn grid_model_has_diagonal_uv_and_w_equal_a() {
        let m = discretize_paper_model(16).unwrap();
        assert_eq!(m.support(Component::U).len(), 16);
        assert!(m.uv_masses().all(|e| e.u == e.v));
        for a in 0..m.settings_a().len() {
            assert_eq!(m.w_dist(a, 0, 3, 3).unwrap(), &[(a, 1.0)]);
        }
    }
}
