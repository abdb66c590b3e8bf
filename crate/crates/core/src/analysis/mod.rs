//! Locality diagnostics: marginals, remote-setting dependence checks and the
//! local/nonlocal split of a model's hidden variables.

pub mod audit;
pub mod checks;
pub mod decompose;
pub mod implication;
pub mod marginal;
pub mod report;

pub use audit::{check_generalized_locality, ResponseAudit};
pub use checks::{
    check_conditional_dependence, check_cr_locality, check_observable_nonsignaling,
    check_observable_nonsignaling_mc, reevaluate_witness, MC_SIGMA_THRESHOLD,
};
pub use decompose::{cr_decompose, Absorption, DecompositionReport};
pub use implication::{inject_signaling, verify_cr_implies_nonsignaling, ImplicationSummary};
pub use marginal::{
    conditional_marginal, joint_given_abuv, marginal_x_given_abuv, marginal_y_given_abu,
    marginal_y_given_abuv, marginalize_over_w, Site,
};
pub use report::{CheckKind, Coords, DependenceReport, Witness};
