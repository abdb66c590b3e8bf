//! Splitting a model's hidden variables into a local part that satisfies
//! remote-setting independence and a nonlocal remainder.

use serde::{Deserialize, Serialize};

use crate::analysis::checks::check_conditional_dependence;
use crate::analysis::report::DependenceReport;
use crate::error::{HvError, Result};
use crate::models::{Component, Model};
use crate::prob::TOL;

/// Candidates are absorbed into the nonlocal part in this order.
pub const ABSORPTION_ORDER: [Component; 2] = [Component::V, Component::U];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Absorption {
    pub component: Component,
    /// The failing check that triggered the move.
    pub report: DependenceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub model: String,
    pub absorbed: Vec<Absorption>,
    pub local_part: Vec<Component>,
    pub nonlocal_part: Vec<Component>,
    /// Local components with a single value of positive probability.
    pub trivial: Vec<Component>,
    /// Dependence check conditioned on the final local part.
    pub final_check: DependenceReport,
    /// The final local part satisfies remote-setting independence (vacuously
    /// when it is empty; `final_check` then measures observable signaling).
    pub local_part_ok: bool,
}

fn nontrivial(model: &Model, c: Component) -> Result<bool> {
    match model {
        Model::Paper(_) => Ok(true),
        Model::Discrete(m) => Ok(m.local_marginal(c).iter().filter(|&&p| p > 0.0).count() > 1),
        Model::Singlet(_) => Err(HvError::UnsupportedModel(
            "the singlet reference has no hidden variables to decompose".into(),
        )),
    }
}

/// Starts with `W` as the nonlocal part and every nontrivial local component
/// as the local part. While the outcome marginals conditioned on the local
/// part still depend on the remote setting, the next candidate in
/// [`ABSORPTION_ORDER`] moves to the nonlocal part.
pub fn cr_decompose(model: &Model) -> Result<DecompositionReport> {
    let mut local = Vec::new();
    let mut trivial = Vec::new();
    for c in [Component::U, Component::V] {
        if nontrivial(model, c)? {
            local.push(c);
        } else {
            trivial.push(c);
        }
    }
    let mut nonlocal = vec![Component::W];
    let mut absorbed = Vec::new();
    let final_check = loop {
        let report = check_conditional_dependence(model, &local)?;
        if report.max_deviation <= TOL {
            break report;
        }
        match ABSORPTION_ORDER.iter().find(|c| local.contains(c)) {
            Some(&c) => {
                local.retain(|&x| x != c);
                nonlocal.push(c);
                absorbed.push(Absorption {
                    component: c,
                    report,
                });
            }
            None => break report,
        }
    };
    let local_part_ok = local.is_empty() || final_check.passed;
    Ok(DecompositionReport {
        model: model.name(),
        absorbed,
        local_part: local,
        nonlocal_part: nonlocal,
        trivial,
        local_part_ok,
        final_check,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        anticorrelated_coin, discretize_paper_model, PaperModel, SingletReference,
    };

    #[test]
    fn arc_model_absorbs_both_local_components() {
        let r = cr_decompose(&Model::Paper(PaperModel)).unwrap();
        let moved: Vec<_> = r.absorbed.iter().map(|a| a.component).collect();
        assert_eq!(moved, vec![Component::V, Component::U]);
        assert!(r.local_part.is_empty());
        assert_eq!(
            r.nonlocal_part,
            vec![Component::W, Component::V, Component::U]
        );
        assert!(r.local_part_ok);
        for a in &r.absorbed {
            assert!(a.report.max_deviation > TOL);
            assert!(a.report.witness.is_some());
        }
    }

    #[test]
    fn local_model_keeps_its_local_part() {
        let r = cr_decompose(&Model::Discrete(anticorrelated_coin())).unwrap();
        assert!(r.absorbed.is_empty());
        assert_eq!(r.local_part, vec![Component::U, Component::V]);
    }

    #[test]
    fn decomposition_is_idempotent_on_grid_model() {
        let m = discretize_paper_model(24).unwrap();
        let first = cr_decompose(&Model::Discrete(m.clone())).unwrap();
        let moved: Vec<_> = first.absorbed.iter().map(|a| a.component).collect();
        let re = m.absorb(&moved).unwrap();
        let second = cr_decompose(&Model::Discrete(re)).unwrap();
        assert!(second.absorbed.is_empty());
        assert_eq!(second.local_part, first.local_part);
    }

    #[test]
    fn singlet_is_unsupported() {
        assert!(cr_decompose(&Model::Singlet(SingletReference)).is_err());
    }
}
