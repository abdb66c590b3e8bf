//! Joint-distribution evaluation: exact and Monte Carlo.

use std::f64::consts::TAU;
use std::thread;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circle::Angle;
use crate::error::{HvError, Result};
use crate::models::paper::{alice_plus_arc, bob_minus_arc};
use crate::models::{singlet_joint, DiscreteModel, HvModel, Model};
use crate::prob::{CompensatedSum, JointTable};
use crate::rng::{chunk_count, chunk_range, chunk_stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McOptions {
    pub n_samples: u64,
    pub seed: u64,
    /// Threads used for sampling. Does not affect results.
    pub n_workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Backend {
    Exact,
    MonteCarlo(McOptions),
}

/// A single Monte Carlo run: settings plus sampling options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSpec {
    pub a: Angle,
    pub b: Angle,
    pub n_samples: u64,
    pub seed: u64,
    pub n_workers: usize,
}

impl RunSpec {
    pub fn new(a: Angle, b: Angle, opts: McOptions) -> Self {
        RunSpec {
            a,
            b,
            n_samples: opts.n_samples,
            seed: opts.seed,
            n_workers: opts.n_workers,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointEstimate {
    pub table: JointTable,
    pub n_samples: u64,
    /// Binomial standard error per cell, in [`JointTable::cells`] order.
    pub std_err: [f64; 4],
}

impl JointEstimate {
    pub fn from_counts(counts: [[u64; 2]; 2]) -> Self {
        let table = JointTable::from_counts(counts);
        let n: u64 = counts.iter().flatten().sum();
        JointEstimate {
            table,
            n_samples: n,
            std_err: table.cells().map(|p| binomial_std_err(p, n)),
        }
    }
}

/// `sqrt(p(1 − p)/n)`, with the `p = 1/2` bound at `p ∈ {0, 1}`.
pub fn binomial_std_err(p: f64, n: u64) -> f64 {
    let n = n as f64;
    if p <= 0.0 || p >= 1.0 {
        (0.25 / n).sqrt()
    } else {
        (p * (1.0 - p) / n).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JointResult {
    Exact(JointTable),
    Estimate(JointEstimate),
}

impl JointResult {
    pub fn table(&self) -> &JointTable {
        match self {
            JointResult::Exact(t) => t,
            JointResult::Estimate(e) => &e.table,
        }
    }

    pub fn std_err(&self) -> Option<[f64; 4]> {
        match self {
            JointResult::Exact(_) => None,
            JointResult::Estimate(e) => Some(e.std_err),
        }
    }
}

/// Joint table of the arc-response model from arc overlaps: Alice's `±1`
/// arcs against Bob's `±1` arcs at `w = a`, each overlap divided by 2π.
pub fn paper_exact_joint(a: Angle, b: Angle) -> JointTable {
    let x_plus = alice_plus_arc(a);
    let y_minus = bob_minus_arc(b, a);
    let x_arcs = [x_plus, x_plus.complement()];
    let y_arcs = [y_minus.complement(), y_minus];
    let mut p = [[0.0; 2]; 2];
    for (i, xa) in x_arcs.iter().enumerate() {
        for (j, ya) in y_arcs.iter().enumerate() {
            p[i][j] = xa.overlap(ya) / TAU;
        }
    }
    JointTable::new(p).expect("arc overlaps partition the circle")
}

/// Exhaustive sum of `P_UV · P_W|abuv · P_X|auw · P_Y|bvw` at setting indices.
pub fn discrete_exact_joint(m: &DiscreteModel, a: usize, b: usize) -> JointTable {
    let mut acc = [[CompensatedSum::default(); 2]; 2];
    for e in m.uv_masses() {
        let dist = m.w_dist(a, b, e.u, e.v).expect("validated coverage");
        for &(w, pw) in dist {
            let mass = e.p * pw;
            if mass == 0.0 {
                continue;
            }
            let px = m.x_plus(a, e.u, w);
            let py = m.y_plus(b, e.v, w);
            let xs = [px, 1.0 - px];
            let ys = [py, 1.0 - py];
            for i in 0..2 {
                for j in 0..2 {
                    acc[i][j].add(mass * xs[i] * ys[j]);
                }
            }
        }
    }
    let p = acc.map(|row| row.map(|c| c.value().max(0.0)));
    JointTable::new(p).expect("validated model yields a normalized joint")
}

pub fn exact_joint(model: &Model, a: Angle, b: Angle) -> Result<JointTable> {
    match model {
        Model::Paper(_) => Ok(paper_exact_joint(a, b)),
        Model::Singlet(_) => Ok(singlet_joint(a, b)),
        Model::Discrete(m) => {
            let (ai, bi) = (m.setting_a_index(a)?, m.setting_b_index(b)?);
            Ok(discrete_exact_joint(m, ai, bi))
        }
    }
}

fn sample_chunk<M: HvModel>(
    model: &M,
    a: M::Setting,
    b: M::Setting,
    n: u64,
    seed: u64,
    chunk: u64,
) -> [[u64; 2]; 2] {
    let (start, end) = chunk_range(n, chunk);
    let mut rng = chunk_stream(seed, chunk);
    let mut counts = [[0u64; 2]; 2];
    for _ in start..end {
        let (u, v) = model.sample_local(&mut rng);
        let w = model.sample_nonlocal(a, b, u, v, &mut rng);
        let x_plus = rng.gen::<f64>() < model.response_x(a, u, w).p_plus();
        let y_plus = rng.gen::<f64>() < model.response_y(b, v, w).p_plus();
        counts[usize::from(!x_plus)][usize::from(!y_plus)] += 1;
    }
    counts
}

fn add_counts(acc: &mut [[u64; 2]; 2], other: [[u64; 2]; 2]) {
    for (r, o) in acc.iter_mut().zip(other) {
        for (c, x) in r.iter_mut().zip(o) {
            *c += x;
        }
    }
}

/// Outcome counts for `n` trials. Chunk `c` always draws from stream
/// `(seed, c)`, and counts merge by addition, so the result does not depend
/// on `n_workers`.
pub fn mc_counts<M: HvModel>(
    model: &M,
    a: M::Setting,
    b: M::Setting,
    n: u64,
    seed: u64,
    n_workers: usize,
) -> [[u64; 2]; 2] {
    let chunks = chunk_count(n);
    let workers = (n_workers.max(1) as u64).min(chunks.max(1));
    let mut total = [[0u64; 2]; 2];
    if workers == 1 {
        for c in 0..chunks {
            add_counts(&mut total, sample_chunk(model, a, b, n, seed, c));
        }
        return total;
    }
    thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|wk| {
                scope.spawn(move || {
                    let mut local = [[0u64; 2]; 2];
                    let mut c = wk;
                    while c < chunks {
                        add_counts(&mut local, sample_chunk(model, a, b, n, seed, c));
                        c += workers;
                    }
                    local
                })
            })
            .collect();
        for h in handles {
            add_counts(&mut total, h.join().expect("sampling worker panicked"));
        }
    });
    total
}

pub fn mc_estimate_joint(model: &Model, spec: &RunSpec) -> Result<JointEstimate> {
    if spec.n_samples == 0 {
        return Err(HvError::Domain(
            "Monte Carlo needs at least one sample".into(),
        ));
    }
    let counts = match model {
        Model::Paper(m) => mc_counts(m, spec.a, spec.b, spec.n_samples, spec.seed, spec.n_workers),
        Model::Discrete(m) => {
            let (ai, bi) = (m.setting_a_index(spec.a)?, m.setting_b_index(spec.b)?);
            mc_counts(m, ai, bi, spec.n_samples, spec.seed, spec.n_workers)
        }
        Model::Singlet(_) => {
            return Err(HvError::UnsupportedModel(
                "the singlet reference has no hidden variables to sample".into(),
            ))
        }
    };
    Ok(JointEstimate::from_counts(counts))
}

pub fn evaluate_joint(model: &Model, a: Angle, b: Angle, backend: &Backend) -> Result<JointResult> {
    match backend {
        Backend::Exact => exact_joint(model, a, b).map(JointResult::Exact),
        Backend::MonteCarlo(opts) => {
            mc_estimate_joint(model, &RunSpec::new(a, b, *opts)).map(JointResult::Estimate)
        }
    }
}

/// `result[i][j]` is the evaluation at `(a_list[i], b_list[j])`.
pub fn sweep_joint(
    model: &Model,
    a_list: &[Angle],
    b_list: &[Angle],
    backend: &Backend,
) -> Result<Vec<Vec<JointResult>>> {
    if a_list.is_empty() || b_list.is_empty() {
        return Err(HvError::Domain(
            "sweep needs non-empty setting lists".into(),
        ));
    }
    a_list
        .iter()
        .map(|&a| {
            b_list
                .iter()
                .map(|&b| evaluate_joint(model, a, b, backend))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{anticorrelated_coin, PaperModel};
    use crate::prob::{Outcome, TOL};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn paper() -> Model {
        Model::Paper(PaperModel)
    }

    #[test]
    fn paper_exact_examples() {
        let t = exact_joint(&paper(), Angle::ZERO, Angle::new(FRAC_PI_2)).unwrap();
        assert!((t.get(Outcome::Plus, Outcome::Plus) - 0.25).abs() < TOL);
        assert!(t.correlator().abs() < TOL);
        let t = exact_joint(&paper(), Angle::ZERO, Angle::ZERO).unwrap();
        assert_eq!(t.get(Outcome::Plus, Outcome::Plus), 0.0);
        assert!((t.get(Outcome::Plus, Outcome::Minus) - 0.5).abs() < TOL);
    }

    #[test]
    fn discrete_setting_must_exist() {
        let m = Model::Discrete(anticorrelated_coin());
        assert!(matches!(
            exact_joint(&m, Angle::new(0.3), Angle::new(FRAC_PI_4)),
            Err(HvError::Domain(_))
        ));
        let t = exact_joint(&m, Angle::ZERO, Angle::new(FRAC_PI_4)).unwrap();
        assert_eq!(t.correlator(), -1.0);
    }

    #[test]
    fn std_err_at_degenerate_cells_uses_half_bound() {
        let e = JointEstimate::from_counts([[0, 50], [50, 0]]);
        assert_eq!(e.std_err[0], (0.25f64 / 100.0).sqrt());
        assert_eq!(e.std_err[1], (0.25f64 / 100.0).sqrt());
    }

    #[test]
    fn equal_settings_give_exact_zero_in_mc() {
        let spec = RunSpec {
            a: Angle::ZERO,
            b: Angle::ZERO,
            n_samples: 100_000,
            seed: 3,
            n_workers: 2,
        };
        let e = mc_estimate_joint(&paper(), &spec).unwrap();
        assert_eq!(e.table.get(Outcome::Plus, Outcome::Plus), 0.0);
        assert_eq!(e.n_samples, 100_000);
    }

    #[test]
    fn worker_count_does_not_change_counts() {
        let m = PaperModel;
        let n = 3 * crate::rng::CHUNK_SIZE + 123;
        let a = Angle::new(0.4);
        let b = Angle::new(2.1);
        let one = mc_counts(&m, a, b, n, 17, 1);
        for w in [2, 3, 8, 64] {
            assert_eq!(mc_counts(&m, a, b, n, 17, w), one);
        }
    }

    #[test]
    fn zero_samples_rejected_and_singlet_unsampleable() {
        let spec = RunSpec {
            a: Angle::ZERO,
            b: Angle::ZERO,
            n_samples: 0,
            seed: 1,
            n_workers: 1,
        };
        assert!(mc_estimate_joint(&paper(), &spec).is_err());
        let spec = RunSpec {
            n_samples: 10,
            ..spec
        };
        assert!(matches!(
            mc_estimate_joint(&Model::Singlet(Default::default()), &spec),
            Err(HvError::UnsupportedModel(_))
        ));
    }

    #[test]
    fn sweep_cells_match_single_evaluations() {
        let list: Vec<Angle> = (0..3).map(|k| Angle::new(k as f64 * 0.7)).collect();
        let backend = Backend::MonteCarlo(McOptions {
            n_samples: 5_000,
            seed: 9,
            n_workers: 1,
        });
        let grid = sweep_joint(&paper(), &list, &list, &backend).unwrap();
        for (i, &a) in list.iter().enumerate() {
            for (j, &b) in list.iter().enumerate() {
                assert_eq!(
                    grid[i][j],
                    evaluate_joint(&paper(), a, b, &backend).unwrap()
                );
            }
        }
        assert!(sweep_joint(&paper(), &[], &list, &Backend::Exact).is_err());
    }
}
