//! Finite-support HV models stored as explicit probability tables.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::Rng;

use crate::circle::Angle;
use crate::error::{HvError, Result};
use crate::models::file::{ModelFile, NonlocalRowFile, Prob, UvEntryFile, XRowFile, YRowFile};
use crate::models::{Component, HvModel};
use crate::prob::{stable_sum, OutcomeDist, TOL};

/// Settings closer than this (as angles) are treated as the same setting.
pub const SETTING_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct UvMass {
    pub u: usize,
    pub v: usize,
    pub p: f64,
}

/// One row of `P(W | a, b, u, v)`. `None` for `u` or `v` matches every value.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlocalRow {
    pub a: usize,
    pub b: usize,
    pub u: Option<usize>,
    pub v: Option<usize>,
    pub dist: Vec<(usize, f64)>,
}

/// `plus[k]` is the probability of `+1` at the `k`-th value of the site's local HV.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseRow {
    pub setting: usize,
    pub w: usize,
    pub plus: Vec<f64>,
}

/// Raw tables of a finite model, before validation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscreteSpec {
    pub name: String,
    pub settings_a: Vec<f64>,
    pub settings_b: Vec<f64>,
    pub support_u: Vec<f64>,
    pub support_v: Vec<f64>,
    pub support_w: Vec<f64>,
    pub p_uv: Vec<UvMass>,
    pub p_w: Vec<NonlocalRow>,
    pub p_x: Vec<ResponseRow>,
    pub p_y: Vec<ResponseRow>,
}

type WKey = (usize, usize, Option<usize>, Option<usize>);

/// A validated finite-support model. Every probability row sums to one
/// within [`TOL`] and every entry is non-negative.
#[derive(Debug, Clone)]
pub struct DiscreteModel {
    spec: DiscreteSpec,
    uv_cdf: Vec<f64>,
    w_index: HashMap<WKey, usize>,
    // [(setting * n_w + w) * n_local + local]
    x_plus: Vec<f64>,
    y_plus: Vec<f64>,
}

impl PartialEq for DiscreteModel {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

fn check_values(table: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(HvError::validation(table, "-", "list is empty"));
    }
    for (i, x) in values.iter().enumerate() {
        if !x.is_finite() {
            return Err(HvError::validation(
                table,
                i,
                format!("value {x} is not finite"),
            ));
        }
        if values[..i].iter().any(|y| y == x) {
            return Err(HvError::validation(
                table,
                i,
                format!("duplicate value {x}"),
            ));
        }
    }
    Ok(())
}

fn check_settings(table: &str, values: &[f64]) -> Result<()> {
    check_values(table, values)?;
    for (i, &x) in values.iter().enumerate() {
        for &y in &values[..i] {
            if Angle::new(x).distance(Angle::new(y)) <= SETTING_MATCH_TOL {
                return Err(HvError::validation(
                    table,
                    i,
                    format!("setting {x} coincides with {y} on the circle"),
                ));
            }
        }
    }
    Ok(())
}

fn check_index(table: &str, row: &str, what: &str, idx: usize, len: usize) -> Result<()> {
    if idx >= len {
        return Err(HvError::validation(
            table,
            row,
            format!("{what} index {idx} out of range (size {len})"),
        ));
    }
    Ok(())
}

fn check_prob(table: &str, row: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(HvError::validation(
            table,
            row,
            format!("probability {p} outside [0, 1]"),
        ));
    }
    Ok(())
}

fn check_row_sum(table: &str, row: &str, probs: impl IntoIterator<Item = f64>) -> Result<()> {
    let sum = stable_sum(probs);
    if (sum - 1.0).abs() > TOL {
        return Err(HvError::validation(
            table,
            row,
            format!("row sums to {sum}, not 1"),
        ));
    }
    Ok(())
}

fn opt_label(x: Option<usize>) -> String {
    x.map_or_else(|| "*".to_string(), |i| i.to_string())
}

fn nonlocal_row_label(i: usize, r: &NonlocalRow) -> String {
    format!(
        "#{i} (a={}, b={}, u={}, v={})",
        r.a,
        r.b,
        opt_label(r.u),
        opt_label(r.v)
    )
}

fn dense_responses(
    table: &str,
    rows: &[ResponseRow],
    n_settings: usize,
    n_w: usize,
    n_local: usize,
) -> Result<Vec<f64>> {
    let mut dense = vec![f64::NAN; n_settings * n_w * n_local];
    let mut seen = vec![false; n_settings * n_w];
    for (i, r) in rows.iter().enumerate() {
        let label = format!("#{i} (setting={}, w={})", r.setting, r.w);
        check_index(table, &label, "setting", r.setting, n_settings)?;
        check_index(table, &label, "w", r.w, n_w)?;
        if r.plus.len() != n_local {
            return Err(HvError::validation(
                table,
                &label,
                format!("expected {n_local} probabilities, found {}", r.plus.len()),
            ));
        }
        let slot = r.setting * n_w + r.w;
        if std::mem::replace(&mut seen[slot], true) {
            return Err(HvError::validation(table, &label, "duplicate row"));
        }
        for (k, &p) in r.plus.iter().enumerate() {
            check_prob(table, &format!("{label}[{k}]"), p)?;
            dense[slot * n_local + k] = p;
        }
    }
    if let Some(slot) = seen.iter().position(|s| !s) {
        return Err(HvError::validation(
            table,
            format!("(setting={}, w={})", slot / n_w, slot % n_w),
            "missing row",
        ));
    }
    Ok(dense)
}

impl DiscreteModel {
    pub fn new(spec: DiscreteSpec) -> Result<Self> {
        check_settings("settings_a", &spec.settings_a)?;
        check_settings("settings_b", &spec.settings_b)?;
        check_values("support_u", &spec.support_u)?;
        check_values("support_v", &spec.support_v)?;
        check_values("support_w", &spec.support_w)?;
        let (n_a, n_b) = (spec.settings_a.len(), spec.settings_b.len());
        let (n_u, n_v, n_w) = (
            spec.support_u.len(),
            spec.support_v.len(),
            spec.support_w.len(),
        );

        let mut seen_uv = HashMap::new();
        for (i, e) in spec.p_uv.iter().enumerate() {
            let label = format!("#{i} (u={}, v={})", e.u, e.v);
            check_index("p_uv", &label, "u", e.u, n_u)?;
            check_index("p_uv", &label, "v", e.v, n_v)?;
            check_prob("p_uv", &label, e.p)?;
            if seen_uv.insert((e.u, e.v), i).is_some() {
                return Err(HvError::validation("p_uv", label, "duplicate entry"));
            }
        }
        check_row_sum("p_uv", "all entries", spec.p_uv.iter().map(|e| e.p))?;

        let mut w_index = HashMap::new();
        for (i, r) in spec.p_w.iter().enumerate() {
            let label = nonlocal_row_label(i, r);
            let t = "p_w_given_abuv";
            check_index(t, &label, "a", r.a, n_a)?;
            check_index(t, &label, "b", r.b, n_b)?;
            if let Some(u) = r.u {
                check_index(t, &label, "u", u, n_u)?;
            }
            if let Some(v) = r.v {
                check_index(t, &label, "v", v, n_v)?;
            }
            for &(w, p) in &r.dist {
                check_index(t, &label, "w", w, n_w)?;
                check_prob(t, &label, p)?;
            }
            check_row_sum(t, &label, r.dist.iter().map(|&(_, p)| p))?;
            if w_index.insert((r.a, r.b, r.u, r.v), i).is_some() {
                return Err(HvError::validation(t, label, "duplicate row key"));
            }
        }

        let x_plus = dense_responses("p_x_given_auw", &spec.p_x, n_a, n_w, n_u)?;
        let y_plus = dense_responses("p_y_given_bvw", &spec.p_y, n_b, n_w, n_v)?;

        let mut acc = 0.0;
        let uv_cdf = spec
            .p_uv
            .iter()
            .map(|e| {
                acc += e.p;
                acc
            })
            .collect();

        let model = DiscreteModel {
            spec,
            uv_cdf,
            w_index,
            x_plus,
            y_plus,
        };

        // Every reachable conditioning event needs a distribution for W.
        for a in 0..n_a {
            for b in 0..n_b {
                for e in model.spec.p_uv.iter().filter(|e| e.p > 0.0) {
                    if model.w_dist(a, b, e.u, e.v).is_none() {
                        return Err(HvError::validation(
                            "p_w_given_abuv",
                            format!("(a={a}, b={b}, u={}, v={})", e.u, e.v),
                            "missing row for a conditioning event with positive probability",
                        ));
                    }
                }
            }
        }
        Ok(model)
    }

    pub fn from_file(file: &ModelFile) -> Result<Self> {
        for (i, r) in file.p_x_given_auw.iter().enumerate() {
            if r.b.is_some() || r.v.is_some() {
                return Err(HvError::validation(
                    "p_x_given_auw",
                    format!("#{i}"),
                    "response lists a remote index (b or v); such tables can only be audited, not loaded as a model",
                ));
            }
        }
        for (i, r) in file.p_y_given_bvw.iter().enumerate() {
            if r.a.is_some() || r.u.is_some() {
                return Err(HvError::validation(
                    "p_y_given_bvw",
                    format!("#{i}"),
                    "response lists a remote index (a or u); such tables can only be audited, not loaded as a model",
                ));
            }
        }
        let p_uv = file
            .p_uv
            .iter()
            .enumerate()
            .map(|(i, e)| {
                Ok(UvMass {
                    u: e.u,
                    v: e.v,
                    p: e.p.resolve("p_uv", format!("#{i}"))?,
                })
            })
            .collect::<Result<_>>()?;
        let p_w = file
            .p_w_given_abuv
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let dist =
                    r.w.iter()
                        .map(|(w, p)| Ok((*w, p.resolve("p_w_given_abuv", format!("#{i}"))?)))
                        .collect::<Result<_>>()?;
                Ok(NonlocalRow {
                    a: r.a,
                    b: r.b,
                    u: r.u,
                    v: r.v,
                    dist,
                })
            })
            .collect::<Result<_>>()?;
        let resolve_plus = |table: &str, i: usize, plus: &[Prob]| -> Result<Vec<f64>> {
            plus.iter()
                .map(|p| p.resolve(table, format!("#{i}")))
                .collect()
        };
        let p_x = file
            .p_x_given_auw
            .iter()
            .enumerate()
            .map(|(i, r)| {
                Ok(ResponseRow {
                    setting: r.a,
                    w: r.w,
                    plus: resolve_plus("p_x_given_auw", i, &r.plus)?,
                })
            })
            .collect::<Result<_>>()?;
        let p_y = file
            .p_y_given_bvw
            .iter()
            .enumerate()
            .map(|(i, r)| {
                Ok(ResponseRow {
                    setting: r.b,
                    w: r.w,
                    plus: resolve_plus("p_y_given_bvw", i, &r.plus)?,
                })
            })
            .collect::<Result<_>>()?;
        DiscreteModel::new(DiscreteSpec {
            name: file.name.clone().unwrap_or_else(|| "discrete".to_string()),
            settings_a: file.settings_a.clone(),
            settings_b: file.settings_b.clone(),
            support_u: file.support_u.clone(),
            support_v: file.support_v.clone(),
            support_w: file.support_w.clone(),
            p_uv,
            p_w,
            p_x,
            p_y,
        })
    }

    pub fn to_file(&self) -> ModelFile {
        let s = &self.spec;
        ModelFile {
            name: Some(s.name.clone()),
            settings_a: s.settings_a.clone(),
            settings_b: s.settings_b.clone(),
            support_u: s.support_u.clone(),
            support_v: s.support_v.clone(),
            support_w: s.support_w.clone(),
            p_uv: s
                .p_uv
                .iter()
                .map(|e| UvEntryFile {
                    u: e.u,
                    v: e.v,
                    p: Prob::decimal(e.p),
                })
                .collect(),
            p_w_given_abuv: s
                .p_w
                .iter()
                .map(|r| NonlocalRowFile {
                    a: r.a,
                    b: r.b,
                    u: r.u,
                    v: r.v,
                    w: r.dist.iter().map(|&(w, p)| (w, Prob::decimal(p))).collect(),
                })
                .collect(),
            p_x_given_auw: s
                .p_x
                .iter()
                .map(|r| XRowFile {
                    a: r.setting,
                    w: r.w,
                    b: None,
                    v: None,
                    plus: r.plus.iter().map(|&p| Prob::decimal(p)).collect(),
                })
                .collect(),
            p_y_given_bvw: s
                .p_y
                .iter()
                .map(|r| YRowFile {
                    b: r.setting,
                    w: r.w,
                    a: None,
                    u: None,
                    plus: r.plus.iter().map(|&p| Prob::decimal(p)).collect(),
                })
                .collect(),
        }
    }

    pub fn spec(&self) -> &DiscreteSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn settings_a(&self) -> &[f64] {
        &self.spec.settings_a
    }

    pub fn settings_b(&self) -> &[f64] {
        &self.spec.settings_b
    }

    pub fn support(&self, c: Component) -> &[f64] {
        match c {
            Component::U => &self.spec.support_u,
            Component::V => &self.spec.support_v,
            Component::W => &self.spec.support_w,
        }
    }

    /// Joint masses of `(u, v)` with positive probability.
    pub fn uv_masses(&self) -> impl Iterator<Item = &UvMass> + '_ {
        self.spec.p_uv.iter().filter(|e| e.p > 0.0)
    }

    /// `P(W | a, b, u, v)` as `(w, p)` pairs; the most specific matching row wins.
    pub fn w_dist(&self, a: usize, b: usize, u: usize, v: usize) -> Option<&[(usize, f64)]> {
        [
            (a, b, Some(u), Some(v)),
            (a, b, Some(u), None),
            (a, b, None, Some(v)),
            (a, b, None, None),
        ]
        .iter()
        .find_map(|k| self.w_index.get(k))
        .map(|&i| self.spec.p_w[i].dist.as_slice())
    }

    pub fn x_plus(&self, a: usize, u: usize, w: usize) -> f64 {
        let (n_w, n_u) = (self.spec.support_w.len(), self.spec.support_u.len());
        self.x_plus[(a * n_w + w) * n_u + u]
    }

    pub fn y_plus(&self, b: usize, v: usize, w: usize) -> f64 {
        let (n_w, n_v) = (self.spec.support_w.len(), self.spec.support_v.len());
        self.y_plus[(b * n_w + w) * n_v + v]
    }

    pub fn setting_a_index(&self, a: Angle) -> Result<usize> {
        find_setting(&self.spec.settings_a, a, "a")
    }

    pub fn setting_b_index(&self, b: Angle) -> Result<usize> {
        find_setting(&self.spec.settings_b, b, "b")
    }

    pub fn support_index(&self, c: Component, value: f64) -> Result<usize> {
        self.support(c)
            .iter()
            .position(|&x| (x - value).abs() <= SETTING_MATCH_TOL)
            .ok_or_else(|| HvError::Domain(format!("{value} is not in the support of {c}")))
    }

    /// Marginal distribution of one local component.
    pub fn local_marginal(&self, c: Component) -> Vec<f64> {
        let mut m = vec![0.0; self.support(c).len()];
        for e in &self.spec.p_uv {
            match c {
                Component::U => m[e.u] += e.p,
                Component::V => m[e.v] += e.p,
                Component::W => panic!("W has no setting-independent marginal"),
            }
        }
        m
    }

    /// Re-expresses the model with the listed local components merged into
    /// the nonlocal variable. An absorbed component keeps a one-point support;
    /// the new `W` enumerates the reachable `(absorbed values…, w)` tuples.
    pub fn absorb(&self, components: &[Component]) -> Result<DiscreteModel> {
        let take_u = components.contains(&Component::U);
        let take_v = components.contains(&Component::V);
        if !take_u && !take_v {
            return Ok(self.clone());
        }
        let s = &self.spec;
        let (n_a, n_b) = (s.settings_a.len(), s.settings_b.len());
        let project = |u: usize, v: usize| (if take_u { 0 } else { u }, if take_v { 0 } else { v });

        // Mass of each retained (u', v') cell.
        let mut cell_mass: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for e in self.uv_masses() {
            *cell_mass.entry(project(e.u, e.v)).or_default() += e.p;
        }

        type Tuple = (Option<usize>, Option<usize>, usize);
        let mut tuples: BTreeMap<Tuple, usize> = BTreeMap::new();
        let mut rows: BTreeMap<(usize, usize, usize, usize), BTreeMap<Tuple, f64>> =
            BTreeMap::new();
        for a in 0..n_a {
            for b in 0..n_b {
                for e in self.uv_masses() {
                    let cell = project(e.u, e.v);
                    let cond = e.p / cell_mass[&cell];
                    let dist = self.w_dist(a, b, e.u, e.v).expect("validated coverage");
                    for &(w, pw) in dist.iter().filter(|(_, p)| *p > 0.0) {
                        let t = (take_u.then_some(e.u), take_v.then_some(e.v), w);
                        let next = tuples.len();
                        tuples.entry(t).or_insert(next);
                        *rows
                            .entry((a, b, cell.0, cell.1))
                            .or_default()
                            .entry(t)
                            .or_default() += cond * pw;
                    }
                }
            }
        }
        // Renumber tuples in sorted order so the result is deterministic.
        let order: BTreeMap<Tuple, usize> =
            tuples.keys().enumerate().map(|(i, t)| (*t, i)).collect();
        let tuple_list: Vec<Tuple> = order.keys().copied().collect();

        let p_w = rows
            .into_iter()
            .map(|((a, b, u, v), dist)| NonlocalRow {
                a,
                b,
                u: Some(u),
                v: Some(v),
                dist: dist.into_iter().map(|(t, p)| (order[&t], p)).collect(),
            })
            .collect();
        let n_u2 = if take_u { 1 } else { s.support_u.len() };
        let n_v2 = if take_v { 1 } else { s.support_v.len() };
        let mut p_x = Vec::new();
        for a in 0..n_a {
            for (k, &(tu, _, w)) in tuple_list.iter().enumerate() {
                let plus = (0..n_u2)
                    .map(|u| self.x_plus(a, tu.unwrap_or(u), w))
                    .collect();
                p_x.push(ResponseRow {
                    setting: a,
                    w: k,
                    plus,
                });
            }
        }
        let mut p_y = Vec::new();
        for b in 0..n_b {
            for (k, &(_, tv, w)) in tuple_list.iter().enumerate() {
                let plus = (0..n_v2)
                    .map(|v| self.y_plus(b, tv.unwrap_or(v), w))
                    .collect();
                p_y.push(ResponseRow {
                    setting: b,
                    w: k,
                    plus,
                });
            }
        }
        let mut name = s.name.clone();
        let _ = write!(
            name,
            " [absorbed {}]",
            components
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        DiscreteModel::new(DiscreteSpec {
            name,
            settings_a: s.settings_a.clone(),
            settings_b: s.settings_b.clone(),
            support_u: if take_u {
                vec![0.0]
            } else {
                s.support_u.clone()
            },
            support_v: if take_v {
                vec![0.0]
            } else {
                s.support_v.clone()
            },
            support_w: (0..tuple_list.len()).map(|k| k as f64).collect(),
            p_uv: cell_mass
                .into_iter()
                .map(|((u, v), p)| UvMass { u, v, p })
                .collect(),
            p_w,
            p_x,
            p_y,
        })
    }
}

fn find_setting(settings: &[f64], x: Angle, which: &str) -> Result<usize> {
    settings
        .iter()
        .position(|&s| Angle::new(s).distance(x) <= SETTING_MATCH_TOL)
        .ok_or_else(|| {
            HvError::Domain(format!(
                "setting {which}={x} is not one of the model's settings {settings:?}"
            ))
        })
}

impl HvModel for DiscreteModel {
    type Setting = usize;
    type LocalA = usize;
    type LocalB = usize;
    type Nonlocal = usize;

    fn sample_local<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let total = *self.uv_cdf.last().expect("p_uv is non-empty");
        let x = rng.gen::<f64>() * total;
        let i = self
            .uv_cdf
            .partition_point(|&c| c <= x)
            .min(self.uv_cdf.len() - 1);
        // Never land on a zero-mass entry at the top end.
        let i = (0..=i)
            .rev()
            .find(|&j| self.spec.p_uv[j].p > 0.0)
            .unwrap_or(i);
        let e = &self.spec.p_uv[i];
        (e.u, e.v)
    }

    fn sample_nonlocal<R: Rng + ?Sized>(
        &self,
        a: usize,
        b: usize,
        u: usize,
        v: usize,
        rng: &mut R,
    ) -> usize {
        let dist = self.w_dist(a, b, u, v).expect("validated coverage");
        let x = rng.gen::<f64>();
        let mut acc = 0.0;
        let mut last = dist[0].0;
        for &(w, p) in dist {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last = w;
            if x < acc {
                return w;
            }
        }
        last
    }

    fn response_x(&self, a: usize, u: usize, w: usize) -> OutcomeDist {
        OutcomeDist::new(self.x_plus(a, u, w)).expect("validated response")
    }

    fn response_y(&self, b: usize, v: usize, w: usize) -> OutcomeDist {
        OutcomeDist::new(self.y_plus(b, v, w)).expect("validated response")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::local::anticorrelated_coin;
    use crate::rng::chunk_stream;

    fn tiny_spec() -> DiscreteSpec {
        DiscreteSpec {
            name: "tiny".into(),
            settings_a: vec![0.0, 1.0],
            settings_b: vec![0.0],
            support_u: vec![0.0, 1.0],
            support_v: vec![0.0],
            support_w: vec![0.0],
            p_uv: vec![
                UvMass {
                    u: 0,
                    v: 0,
                    p: 0.25,
                },
                UvMass {
                    u: 1,
                    v: 0,
                    p: 0.75,
                },
            ],
            p_w: vec![
                NonlocalRow {
                    a: 0,
                    b: 0,
                    u: None,
                    v: None,
                    dist: vec![(0, 1.0)],
                },
                NonlocalRow {
                    a: 1,
                    b: 0,
                    u: None,
                    v: None,
                    dist: vec![(0, 1.0)],
                },
            ],
            p_x: vec![
                ResponseRow {
                    setting: 0,
                    w: 0,
                    plus: vec![1.0, 0.0],
                },
                ResponseRow {
                    setting: 1,
                    w: 0,
                    plus: vec![0.5, 0.5],
                },
            ],
            p_y: vec![ResponseRow {
                setting: 0,
                w: 0,
                plus: vec![0.3],
            }],
        }
    }

    #[test]
    fn valid_spec_builds() {
        let m = DiscreteModel::new(tiny_spec()).unwrap();
        assert_eq!(m.x_plus(0, 0, 0), 1.0);
        assert_eq!(m.y_plus(0, 0, 0), 0.3);
        assert_eq!(m.w_dist(1, 0, 1, 0).unwrap(), &[(0, 1.0)]);
    }

    #[test]
    fn unnormalized_row_is_named() {
        let mut s = tiny_spec();
        s.p_w[1].dist = vec![(0, 0.9)];
        let err = DiscreteModel::new(s).unwrap_err();
        match err {
            HvError::Validation { table, row, .. } => {
                assert_eq!(table, "p_w_given_abuv");
                assert!(row.contains("#1"), "{row}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_and_missing_entries_rejected() {
        let mut s = tiny_spec();
        s.p_uv[0].p = -0.25;
        s.p_uv[1].p = 1.25;
        assert!(matches!(
            DiscreteModel::new(s),
            Err(HvError::Validation { .. })
        ));

        let mut s = tiny_spec();
        s.p_x.pop();
        let err = DiscreteModel::new(s).unwrap_err().to_string();
        assert!(err.contains("missing row"), "{err}");

        let mut s = tiny_spec();
        s.p_w.pop();
        let err = DiscreteModel::new(s).unwrap_err().to_string();
        assert!(err.contains("a=1"), "{err}");
    }

    #[test]
    fn duplicate_settings_rejected() {
        let mut s = tiny_spec();
        s.settings_a = vec![0.0, std::f64::consts::TAU];
        assert!(DiscreteModel::new(s).is_err());
    }

    #[test]
    fn specific_rows_override_wildcards() {
        let mut s = tiny_spec();
        s.support_w = vec![0.0, 1.0];
        s.p_w.push(NonlocalRow {
            a: 0,
            b: 0,
            u: Some(1),
            v: None,
            dist: vec![(1, 1.0)],
        });
        s.p_x = vec![
            ResponseRow {
                setting: 0,
                w: 0,
                plus: vec![1.0, 0.0],
            },
            ResponseRow {
                setting: 0,
                w: 1,
                plus: vec![1.0, 0.0],
            },
            ResponseRow {
                setting: 1,
                w: 0,
                plus: vec![0.5, 0.5],
            },
            ResponseRow {
                setting: 1,
                w: 1,
                plus: vec![0.5, 0.5],
            },
        ];
        s.p_y = vec![
            ResponseRow {
                setting: 0,
                w: 0,
                plus: vec![0.3],
            },
            ResponseRow {
                setting: 0,
                w: 1,
                plus: vec![0.3],
            },
        ];
        let m = DiscreteModel::new(s).unwrap();
        assert_eq!(m.w_dist(0, 0, 1, 0).unwrap(), &[(1, 1.0)]);
        assert_eq!(m.w_dist(0, 0, 0, 0).unwrap(), &[(0, 1.0)]);
    }

    #[test]
    fn file_round_trip_preserves_model() {
        let m = DiscreteModel::new(tiny_spec()).unwrap();
        let text = serde_json::to_string(&m.to_file()).unwrap();
        let back = ModelFile::parse(&text, std::path::Path::new("mem")).unwrap();
        assert_eq!(DiscreteModel::from_file(&back).unwrap(), m);
    }

    #[test]
    fn sampling_frequencies_follow_p_uv() {
        let m = DiscreteModel::new(tiny_spec()).unwrap();
        let mut rng = chunk_stream(1, 0);
        let n = 200_000;
        let ones = (0..n).filter(|_| m.sample_local(&mut rng).0 == 1).count() as f64;
        let sigma = (0.75 * 0.25 * n as f64).sqrt();
        assert!((ones - 0.75 * n as f64).abs() < 5.0 * sigma);
    }

    #[test]
    fn absorbing_nothing_is_identity() {
        let m = anticorrelated_coin();
        assert_eq!(m.absorb(&[]).unwrap(), m);
    }

    #[test]
    fn absorbing_both_leaves_trivial_local_part() {
        let m = anticorrelated_coin();
        let r = m.absorb(&[Component::V, Component::U]).unwrap();
        assert_eq!(r.support(Component::U).len(), 1);
        assert_eq!(r.support(Component::V).len(), 1);
        assert_eq!(r.support(Component::W).len(), 2);
    }
}
