//! Hidden-variable models.
//!
//! Every model splits its hidden variables into a local part `(U, V)`, drawn
//! independently of the settings, and a nonlocal part `W`, drawn given the
//! settings and the local part. Alice's response reads only `(a, u, w)` and
//! Bob's only `(b, v, w)`; the [`HvModel`] signatures make any other
//! dependence impossible to express.

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circle::Angle;
use crate::prob::OutcomeDist;

pub mod discrete;
pub mod discretize;
pub mod file;
pub mod local;
pub mod paper;
pub mod singlet;

pub use discrete::{DiscreteModel, DiscreteSpec, NonlocalRow, ResponseRow, UvMass};
pub use discretize::{discretize_paper_model, discretize_paper_model_with_settings};
pub use file::{load_model, save_model, ModelFile};
pub use local::{
    anticorrelated_coin, build_local_deterministic, random_cr_local_model,
    random_local_deterministic, LocalDeterministicParams,
};
pub use paper::{paper_response_x, paper_response_y, paper_sample_hv, PaperModel};
pub use singlet::{singlet_joint, SingletReference};

pub trait HvModel: Sync {
    type Setting: Copy + Send + Sync;
    type LocalA: Copy;
    type LocalB: Copy;
    type Nonlocal: Copy;

    /// Draws `(u, v)` from `P_UV`; never sees the settings.
    fn sample_local<R: Rng + ?Sized>(&self, rng: &mut R) -> (Self::LocalA, Self::LocalB);

    /// Draws `w` from `P(W | a, b, u, v)`.
    fn sample_nonlocal<R: Rng + ?Sized>(
        &self,
        a: Self::Setting,
        b: Self::Setting,
        u: Self::LocalA,
        v: Self::LocalB,
        rng: &mut R,
    ) -> Self::Nonlocal;

    fn response_x(&self, a: Self::Setting, u: Self::LocalA, w: Self::Nonlocal) -> OutcomeDist;

    fn response_y(&self, b: Self::Setting, v: Self::LocalB, w: Self::Nonlocal) -> OutcomeDist;
}

/// A hidden-variable component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Component {
    U,
    V,
    W,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::U => "U",
            Component::V => "V",
            Component::W => "W",
        })
    }
}

/// Settings probed when a continuous model is analyzed: the multiples of π/4.
pub fn probe_settings() -> Vec<Angle> {
    (0..8).map(|k| Angle::new(k as f64 * FRAC_PI_4)).collect()
}

/// Any model the engine and analysis layers accept.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Model {
    Paper(PaperModel),
    Singlet(SingletReference),
    Discrete(DiscreteModel),
}

impl Model {
    pub fn name(&self) -> String {
        match self {
            Model::Paper(_) => "paper".into(),
            Model::Singlet(_) => "singlet".into(),
            Model::Discrete(m) => m.name().to_string(),
        }
    }

    pub fn settings_a(&self) -> Vec<Angle> {
        match self {
            Model::Discrete(m) => m.settings_a().iter().map(|&x| Angle::new(x)).collect(),
            _ => probe_settings(),
        }
    }

    pub fn settings_b(&self) -> Vec<Angle> {
        match self {
            Model::Discrete(m) => m.settings_b().iter().map(|&x| Angle::new(x)).collect(),
            _ => probe_settings(),
        }
    }
}

impl From<DiscreteModel> for Model {
    fn from(m: DiscreteModel) -> Self {
        Model::Discrete(m)
    }
}

impl From<PaperModel> for Model {
    fn from(m: PaperModel) -> Self {
        Model::Paper(m)
    }
}
