//! Resolved command configurations and their execution.
//!
//! A config holds everything that determines a command's result, so a report
//! can be re-run from its `config` block alone. Worker count, output format
//! and output path never change a result and are left out.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{
    check_cr_locality, check_generalized_locality, check_observable_nonsignaling,
    check_observable_nonsignaling_mc, conditional_marginal, cr_decompose, marginal_x_given_abuv,
    marginal_y_given_abu, marginal_y_given_abuv, verify_cr_implies_nonsignaling, Coords,
    DependenceReport, ResponseAudit, Site,
};
use crate::circle::Angle;
use crate::cli::args::{model_file_path, resolve_model};
use crate::cli::output::{Cell, Report, Table};
use crate::engine::{sweep_joint, Backend, JointResult, McOptions};
use crate::error::{HvError, Result};
use crate::inequalities::{chsh_value, ChshSpec, LOCAL_BOUND};
use crate::models::{Component, DiscreteModel, Model, ModelFile};
use crate::OutcomeDist;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Observable,
    Cr,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Given {
    Abuv,
    Abu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SiteArg {
    X,
    Y,
}

impl From<SiteArg> for Site {
    fn from(s: SiteArg) -> Self {
        match s {
            SiteArg::X => Site::X,
            SiteArg::Y => Site::Y,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointConfig {
    pub model: String,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub backend: BackendKind,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalConfig {
    pub model: String,
    pub site: SiteArg,
    pub given: Given,
    pub a: f64,
    pub b: f64,
    /// Grid size for continuous hidden variables; finite models use their support.
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    pub model: String,
    pub level: Level,
    pub backend: BackendKind,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeConfig {
    pub model: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChshConfig {
    pub model: String,
    pub a0: f64,
    pub a1: f64,
    pub b0: f64,
    pub b1: f64,
    pub backend: BackendKind,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub count: usize,
    pub seed: u64,
    pub inject: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub path: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommandConfig {
    Joint(JointConfig),
    Marginal(MarginalConfig),
    Signal(SignalConfig),
    Decompose(DecomposeConfig),
    Chsh(ChshConfig),
    VerifyEq6(VerifyConfig),
    Validate(ValidateConfig),
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::Joint(_) => "joint",
            CommandConfig::Marginal(_) => "marginal",
            CommandConfig::Signal(_) => "signal",
            CommandConfig::Decompose(_) => "decompose",
            CommandConfig::Chsh(_) => "chsh",
            CommandConfig::VerifyEq6(_) => "verify-eq6",
            CommandConfig::Validate(_) => "validate",
        }
    }

    fn to_value(&self) -> Value {
        let v = match self {
            CommandConfig::Joint(c) => serde_json::to_value(c),
            CommandConfig::Marginal(c) => serde_json::to_value(c),
            CommandConfig::Signal(c) => serde_json::to_value(c),
            CommandConfig::Decompose(c) => serde_json::to_value(c),
            CommandConfig::Chsh(c) => serde_json::to_value(c),
            CommandConfig::VerifyEq6(c) => serde_json::to_value(c),
            CommandConfig::Validate(c) => serde_json::to_value(c),
        };
        v.expect("config serializes")
    }

    /// Rebuilds a config from the `command` and `config` fields of a report.
    pub fn from_report(command: &str, config: Value) -> Result<Self> {
        let bad =
            |e: serde_json::Error| HvError::Domain(format!("invalid `{command}` config: {e}"));
        Ok(match command {
            "joint" => CommandConfig::Joint(serde_json::from_value(config).map_err(bad)?),
            "marginal" => CommandConfig::Marginal(serde_json::from_value(config).map_err(bad)?),
            "signal" => CommandConfig::Signal(serde_json::from_value(config).map_err(bad)?),
            "decompose" => CommandConfig::Decompose(serde_json::from_value(config).map_err(bad)?),
            "chsh" => CommandConfig::Chsh(serde_json::from_value(config).map_err(bad)?),
            "verify-eq6" => CommandConfig::VerifyEq6(serde_json::from_value(config).map_err(bad)?),
            "validate" => CommandConfig::Validate(serde_json::from_value(config).map_err(bad)?),
            other => {
                return Err(HvError::Domain(format!(
                    "unknown command `{other}` in report"
                )))
            }
        })
    }

    pub fn execute(&self, workers: usize) -> Result<Report> {
        let (result, table) = match self {
            CommandConfig::Joint(c) => run_joint(c, workers)?,
            CommandConfig::Marginal(c) => run_marginal(c)?,
            CommandConfig::Signal(c) => run_signal(c, workers)?,
            CommandConfig::Decompose(c) => run_decompose(c)?,
            CommandConfig::Chsh(c) => run_chsh(c, workers)?,
            CommandConfig::VerifyEq6(c) => run_verify(c)?,
            CommandConfig::Validate(c) => run_validate(c)?,
        };
        Ok(Report {
            command: self.name(),
            config: self.to_value(),
            result,
            table,
        })
    }
}

fn backend(kind: BackendKind, samples: u64, seed: u64, workers: usize) -> Backend {
    match kind {
        BackendKind::Exact => Backend::Exact,
        BackendKind::Mc => Backend::MonteCarlo(McOptions {
            n_samples: samples,
            seed,
            n_workers: workers,
        }),
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("result serializes")
}

fn angles(xs: &[f64]) -> Result<Vec<Angle>> {
    xs.iter().map(|&x| crate::wrap_angle(x)).collect()
}

fn run_joint(c: &JointConfig, workers: usize) -> Result<(Value, Table)> {
    let model = resolve_model(&c.model)?;
    let (a_list, b_list) = (angles(&c.a)?, angles(&c.b)?);
    let sweep = sweep_joint(
        &model,
        &a_list,
        &b_list,
        &backend(c.backend, c.samples, c.seed, workers),
    )?;
    let mc = c.backend == BackendKind::Mc;
    let mut header = vec!["a", "b", "p_pp", "p_pm", "p_mp", "p_mm", "correlator"];
    if mc {
        header.extend(["se_pp", "se_pm", "se_mp", "se_mm"]);
    }
    let mut table = Table::new(&header);
    let mut cells = Vec::new();
    for (a, row) in a_list.iter().zip(&sweep) {
        for (b, r) in b_list.iter().zip(row) {
            let t = r.table();
            let p = t.cells();
            let mut line: Vec<Cell> = vec![a.radians().into(), b.radians().into()];
            line.extend(p.iter().map(|&x| Cell::from(x)));
            line.push(t.correlator().into());
            let mut cell = json!({
                "a": a.radians(),
                "b": b.radians(),
                "p": {"pp": p[0], "pm": p[1], "mp": p[2], "mm": p[3]},
                "correlator": t.correlator(),
            });
            if let JointResult::Estimate(e) = r {
                line.extend(e.std_err.iter().map(|&x| Cell::from(x)));
                cell["std_err"] = json!({"pp": e.std_err[0], "pm": e.std_err[1], "mp": e.std_err[2], "mm": e.std_err[3]});
                cell["n_samples"] = json!(e.n_samples);
            }
            table.push(line);
            cells.push(cell);
        }
    }
    Ok((json!({"model": model.name(), "cells": cells}), table))
}

fn run_marginal(c: &MarginalConfig) -> Result<(Value, Table)> {
    let model = resolve_model(&c.model)?;
    let (a, b) = (crate::wrap_angle(c.a)?, crate::wrap_angle(c.b)?);
    let site = Site::from(c.site);
    // (u, v) points; v is None when only u is conditioned on.
    let points: Vec<(f64, Option<f64>)> = match &model {
        Model::Paper(_) => {
            if c.points == 0 {
                return Err(HvError::Domain("--points must be positive".into()));
            }
            crate::analysis::marginal::angle_grid(c.points)
                .into_iter()
                .map(|t| (t, (c.given == Given::Abuv).then_some(t)))
                .collect()
        }
        Model::Discrete(m) => discrete_points(m, c.given),
        Model::Singlet(_) => {
            return Err(HvError::UnsupportedModel(
                "the singlet reference has no hidden variables".into(),
            ))
        }
    };
    let mut header = vec!["u"];
    if c.given == Given::Abuv {
        header.push("v");
    }
    header.extend(["p_plus", "p_minus"]);
    let mut table = Table::new(&header);
    let mut rows = Vec::new();
    for (u, v) in points {
        let d: OutcomeDist = match (site, v) {
            (Site::Y, Some(v)) => marginal_y_given_abuv(&model, a, b, u, v)?,
            (Site::X, Some(v)) => marginal_x_given_abuv(&model, a, b, u, v)?,
            (Site::Y, None) => marginal_y_given_abu(&model, a, b, u)?,
            (Site::X, None) => conditional_marginal(&model, Site::X, a, b, &[(Component::U, u)])?,
        };
        let mut line: Vec<Cell> = vec![u.into()];
        let mut row = json!({"u": u});
        if let Some(v) = v {
            line.push(v.into());
            row["v"] = json!(v);
        }
        line.extend([d.p_plus().into(), d.p_minus().into()]);
        row["p_plus"] = json!(d.p_plus());
        row["p_minus"] = json!(d.p_minus());
        table.push(line);
        rows.push(row);
    }
    let result = json!({
        "model": model.name(),
        "site": c.site,
        "given": c.given,
        "a": a.radians(),
        "b": b.radians(),
        "rows": rows,
    });
    Ok((result, table))
}

fn discrete_points(m: &DiscreteModel, given: Given) -> Vec<(f64, Option<f64>)> {
    let su = m.support(Component::U);
    let sv = m.support(Component::V);
    let mut seen = std::collections::BTreeSet::new();
    m.uv_masses()
        .filter_map(|e| {
            let key = (e.u, (given == Given::Abuv).then_some(e.v));
            seen.insert(key).then(|| (su[e.u], key.1.map(|v| sv[v])))
        })
        .collect()
}

fn coords_text(c: &Coords) -> String {
    c.iter()
        .map(|(k, v)| format!("{k}={v:.16e}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn dependence_table(r: &DependenceReport) -> Table {
    let mut t = Table::new(&[
        "model",
        "quantity",
        "max_deviation",
        "x_deviation",
        "y_deviation",
        "tolerance",
        "passed",
        "witness_site",
        "witness_fixed",
        "witness_varied_0",
        "witness_varied_1",
        "witness_p_plus_0",
        "witness_p_plus_1",
    ]);
    let mut row: Vec<Cell> = vec![
        r.model.clone().into(),
        r.quantity.clone().into(),
        r.max_deviation.into(),
        r.x_deviation.into(),
        r.y_deviation.into(),
        r.tolerance.into(),
        r.passed.into(),
    ];
    match &r.witness {
        Some(w) => row.extend([
            format!("{:?}", w.site).into(),
            coords_text(&w.fixed).into(),
            coords_text(&w.varied[0]).into(),
            coords_text(&w.varied[1]).into(),
            w.p_plus[0].into(),
            w.p_plus[1].into(),
        ]),
        None => row.extend((0..6).map(|_| Cell::from(""))),
    }
    t.push(row);
    t
}

fn run_signal(c: &SignalConfig, workers: usize) -> Result<(Value, Table)> {
    let report = match c.level {
        Level::Full => {
            let audit = match model_file_path(&c.model) {
                Some(path) => {
                    // Tables with remote indices only load as audits.
                    let file = ModelFile::read(Path::new(path))?;
                    if file.has_remote_indices() {
                        ResponseAudit::from_file(&file)?
                    } else {
                        ResponseAudit::from_discrete(&DiscreteModel::from_file(&file)?)
                    }
                }
                None => ResponseAudit::from_model(&resolve_model(&c.model)?)?,
            };
            check_generalized_locality(&audit)?
        }
        Level::Cr => check_cr_locality(&resolve_model(&c.model)?)?,
        Level::Observable => {
            let model = resolve_model(&c.model)?;
            match c.backend {
                BackendKind::Exact => check_observable_nonsignaling(&model)?,
                BackendKind::Mc => check_observable_nonsignaling_mc(
                    &model,
                    McOptions {
                        n_samples: c.samples,
                        seed: c.seed,
                        n_workers: workers,
                    },
                )?,
            }
        }
    };
    let table = dependence_table(&report);
    Ok((to_value(&report), table))
}

fn component_list(cs: &[Component]) -> String {
    cs.iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn run_decompose(c: &DecomposeConfig) -> Result<(Value, Table)> {
    let model = resolve_model(&c.model)?;
    let r = cr_decompose(&model)?;
    let mut t = Table::new(&[
        "step",
        "absorbed",
        "max_deviation",
        "x_deviation",
        "y_deviation",
        "local_part",
        "nonlocal_part",
    ]);
    let mut local: Vec<Component> = [Component::U, Component::V]
        .into_iter()
        .filter(|c| !r.trivial.contains(c))
        .collect();
    let mut nonlocal = vec![Component::W];
    for (i, a) in r.absorbed.iter().enumerate() {
        local.retain(|&x| x != a.component);
        nonlocal.push(a.component);
        t.push(vec![
            (i + 1).to_string().into(),
            a.component.to_string().into(),
            a.report.max_deviation.into(),
            a.report.x_deviation.into(),
            a.report.y_deviation.into(),
            component_list(&local).into(),
            component_list(&nonlocal).into(),
        ]);
    }
    t.push(vec![
        "final".into(),
        "".into(),
        r.final_check.max_deviation.into(),
        r.final_check.x_deviation.into(),
        r.final_check.y_deviation.into(),
        component_list(&r.local_part).into(),
        component_list(&r.nonlocal_part).into(),
    ]);
    Ok((to_value(&r), t))
}

fn run_chsh(c: &ChshConfig, workers: usize) -> Result<(Value, Table)> {
    let model = resolve_model(&c.model)?;
    let spec = ChshSpec {
        a0: crate::wrap_angle(c.a0)?,
        a1: crate::wrap_angle(c.a1)?,
        b0: crate::wrap_angle(c.b0)?,
        b1: crate::wrap_angle(c.b1)?,
    };
    let r = chsh_value(
        &model,
        &spec,
        &backend(c.backend, c.samples, c.seed, workers),
    )?;
    let mut header = vec!["a0", "a1", "b0", "b1", "e00", "e01", "e10", "e11", "s"];
    let mut row: Vec<Cell> = [spec.a0, spec.a1, spec.b0, spec.b1]
        .iter()
        .map(|x| x.radians().into())
        .collect();
    row.extend(r.correlators.iter().map(|&e| Cell::from(e)));
    row.push(r.s.into());
    if let Some(se) = r.std_err {
        header.push("std_err");
        row.push(se.into());
    }
    let mut t = Table::new(&header);
    t.push(row);
    let result = json!({
        "model": model.name(),
        "spec": spec,
        "s": r.s,
        "correlators": r.correlators,
        "std_err": r.std_err,
        "local_bound": LOCAL_BOUND,
        "exceeds_local_bound": r.s.abs() > LOCAL_BOUND + crate::TOL,
    });
    Ok((result, t))
}

fn index_list(xs: &[usize]) -> String {
    xs.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn run_verify(c: &VerifyConfig) -> Result<(Value, Table)> {
    let s = verify_cr_implies_nonsignaling(c.seed, c.count, c.inject)?;
    let mut t = Table::new(&[
        "seed",
        "n_models",
        "injected",
        "failures",
        "precondition_failures",
        "worst_deviation",
        "worst_model",
        "passed",
    ]);
    t.push(vec![
        s.seed.into(),
        s.n_models.into(),
        s.injected.map(|i| i.to_string()).unwrap_or_default().into(),
        index_list(&s.failures).into(),
        index_list(&s.precondition_failures).into(),
        s.worst_deviation.into(),
        s.worst_model
            .map(|i| i.to_string())
            .unwrap_or_default()
            .into(),
        s.passed.into(),
    ]);
    Ok((to_value(&s), t))
}

fn run_validate(c: &ValidateConfig) -> Result<(Value, Table)> {
    let file = ModelFile::read(Path::new(&c.path))?;
    let kind = if file.has_remote_indices() {
        ResponseAudit::from_file(&file)?;
        "audit"
    } else {
        DiscreteModel::from_file(&file)?;
        "model"
    };
    let sizes = [
        file.settings_a.len(),
        file.settings_b.len(),
        file.support_u.len(),
        file.support_v.len(),
        file.support_w.len(),
    ];
    let name = file.name.clone().unwrap_or_default();
    let mut t = Table::new(&[
        "valid",
        "kind",
        "name",
        "n_settings_a",
        "n_settings_b",
        "n_u",
        "n_v",
        "n_w",
    ]);
    let mut row: Vec<Cell> = vec![true.into(), kind.into(), name.clone().into()];
    row.extend(sizes.iter().map(|&n| Cell::from(n)));
    t.push(row);
    let result = json!({
        "valid": true,
        "kind": kind,
        "name": name,
        "n_settings_a": sizes[0],
        "n_settings_b": sizes[1],
        "n_u": sizes[2],
        "n_v": sizes[3],
        "n_w": sizes[4],
    });
    Ok((result, t))
}
