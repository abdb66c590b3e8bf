//! Result types shared by the dependence checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::marginal::Site;
use crate::models::Component;

/// Named coordinates (`a`, `b`, `u`, `v`, `w`) of one evaluation point.
pub type Coords = BTreeMap<String, f64>;

/// Which marginal a dependence check examines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckKind {
    /// Outcome marginals of the exact observable joint tables.
    Observable,
    /// Outcome marginals of Monte Carlo estimates, judged against their standard errors.
    ObservableMc { n_samples: u64, seed: u64 },
    /// Outcome marginals conditioned on the listed local components, `W` averaged out.
    Conditional { given: Vec<Component> },
    /// Response functions evaluated at every `(a, b, u, v, w)`.
    Generalized,
}

impl CheckKind {
    pub fn describe(&self) -> String {
        match self {
            CheckKind::Observable => "P(X | a, b), P(Y | a, b)".into(),
            CheckKind::ObservableMc { .. } => "estimated P(X | a, b), P(Y | a, b)".into(),
            CheckKind::Conditional { given } => {
                let ctx: String = given
                    .iter()
                    .map(|c| format!(", {}", c.to_string().to_lowercase()))
                    .collect();
                format!("P(X | a, b{ctx}), P(Y | a, b{ctx})")
            }
            CheckKind::Generalized => "P(X | a, b, u, v, w), P(Y | a, b, u, v, w)".into(),
        }
    }
}

/// A pair of evaluation points that differ only in the remote setting (and,
/// for the generalized check, the remote hidden variable), with the
/// probability of `+1` at each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub site: Site,
    pub fixed: Coords,
    pub varied: [Coords; 2],
    pub p_plus: [f64; 2],
}

impl Witness {
    pub fn deviation(&self) -> f64 {
        (self.p_plus[0] - self.p_plus[1]).abs()
    }

    /// Full coordinates of the `i`-th evaluation point.
    pub fn point(&self, i: usize) -> Coords {
        let mut c = self.fixed.clone();
        c.extend(self.varied[i].iter().map(|(k, v)| (k.clone(), *v)));
        c
    }
}

/// Largest change of an outcome marginal under a change of the remote setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceReport {
    pub check: CheckKind,
    pub quantity: String,
    pub model: String,
    pub max_deviation: f64,
    pub x_deviation: f64,
    pub y_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Evaluation pair attaining `max_deviation`; absent only when a site has a single remote setting.
    pub witness: Option<Witness>,
}

impl DependenceReport {
    pub(crate) fn assemble(
        check: CheckKind,
        model: String,
        x: SiteScan,
        y: SiteScan,
        tolerance: f64,
    ) -> Self {
        let x_deviation = x.deviation;
        let y_deviation = y.deviation;
        let witness = if y.deviation > x.deviation {
            y.witness.or(x.witness)
        } else {
            x.witness.or(y.witness)
        };
        let max_deviation = x_deviation.max(y_deviation);
        DependenceReport {
            quantity: check.describe(),
            check,
            model,
            max_deviation,
            x_deviation,
            y_deviation,
            tolerance,
            passed: max_deviation <= tolerance,
            witness,
        }
    }
}

/// Best deviation found at one site.
#[derive(Debug, Clone, Default)]
pub(crate) struct SiteScan {
    pub deviation: f64,
    pub witness: Option<Witness>,
}

impl SiteScan {
    /// Keeps `w` when it beats the current best (ties keep the earlier one).
    pub fn offer(&mut self, w: Witness) {
        let d = w.deviation();
        if self.witness.is_none() || d > self.deviation {
            self.deviation = d;
            self.witness = Some(w);
        }
    }
}

/// Scans the max−min spread of `prob(i, j)` over `j` for every `i`, where `i`
/// indexes the fixed coordinates and `j` the remote ones.
pub(crate) fn scan_site<F>(
    site: Site,
    fixed: &[Coords],
    varied: &[Coords],
    mut prob: F,
) -> crate::Result<SiteScan>
where
    F: FnMut(usize, usize) -> crate::Result<f64>,
{
    let mut best = SiteScan::default();
    if varied.len() < 2 {
        return Ok(best);
    }
    for (i, fx) in fixed.iter().enumerate() {
        let mut lo = (f64::INFINITY, 0);
        let mut hi = (f64::NEG_INFINITY, 0);
        for j in 0..varied.len() {
            let p = prob(i, j)?;
            if p < lo.0 {
                lo = (p, j);
            }
            if p > hi.0 {
                hi = (p, j);
            }
        }
        // When every value is equal, lo and hi both sit at index 0.
        let (j0, j1) = if lo.1 == hi.1 {
            (0, 1)
        } else {
            (lo.1.min(hi.1), lo.1.max(hi.1))
        };
        let p_at = |j: usize| if j == hi.1 { hi.0 } else { lo.0 };
        best.offer(Witness {
            site,
            fixed: fx.clone(),
            varied: [varied[j0].clone(), varied[j1].clone()],
            p_plus: [p_at(j0), p_at(j1)],
        });
    }
    Ok(best)
}

pub(crate) fn coords(pairs: &[(&str, f64)]) -> Coords {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}
