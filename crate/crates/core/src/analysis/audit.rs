//! Response functions indexed by every setting and HV component, for the
//! generalized locality check.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::path::Path;

use crate::analysis::marginal::Site;
use crate::analysis::report::{coords, scan_site, CheckKind, Coords, DependenceReport};
use crate::circle::Angle;
use crate::error::{HvError, Result};
use crate::models::file::ModelFile;
use crate::models::paper::{paper_response_x, paper_response_y};
use crate::models::{probe_settings, Component, DiscreteModel, Model};
use crate::prob::TOL;

/// Grid size for the shared HV value when auditing the continuous arc model.
pub const AUDIT_GRID: usize = 72;

// (own setting, w, remote setting, remote HV) → row over own HV values.
type RowKey = (usize, usize, Option<usize>, Option<usize>);

#[derive(Debug, Clone)]
enum Source {
    Paper,
    Tables {
        x: HashMap<RowKey, Vec<f64>>,
        y: HashMap<RowKey, Vec<f64>>,
    },
}

/// `P(X = +1 | a, b, u, v, w)` and `P(Y = +1 | a, b, u, v, w)` on finite grids.
#[derive(Debug, Clone)]
pub struct ResponseAudit {
    name: String,
    settings_a: Vec<f64>,
    settings_b: Vec<f64>,
    support_u: Vec<f64>,
    support_v: Vec<f64>,
    support_w: Vec<f64>,
    source: Source,
}

fn lookup(
    rows: &HashMap<RowKey, Vec<f64>>,
    own: usize,
    w: usize,
    remote: usize,
    remote_hv: usize,
) -> Option<&Vec<f64>> {
    [
        (own, w, Some(remote), Some(remote_hv)),
        (own, w, Some(remote), None),
        (own, w, None, Some(remote_hv)),
        (own, w, None, None),
    ]
    .iter()
    .find_map(|k| rows.get(k))
}

impl ResponseAudit {
    /// The arc model on the π/4 settings, a 72-point grid for `u` and `v`,
    /// and `W` over the settings of `a`.
    pub fn paper() -> Self {
        let grid: Vec<f64> = (0..AUDIT_GRID)
            .map(|k| TAU * k as f64 / AUDIT_GRID as f64)
            .collect();
        let settings: Vec<f64> = probe_settings().iter().map(|s| s.radians()).collect();
        ResponseAudit {
            name: "paper".into(),
            settings_a: settings.clone(),
            settings_b: settings.clone(),
            support_u: grid.clone(),
            support_v: grid,
            support_w: settings,
            source: Source::Paper,
        }
    }

    pub fn from_discrete(m: &DiscreteModel) -> Self {
        let s = m.spec();
        let x = s
            .p_x
            .iter()
            .map(|r| ((r.setting, r.w, None, None), r.plus.clone()))
            .collect();
        let y = s
            .p_y
            .iter()
            .map(|r| ((r.setting, r.w, None, None), r.plus.clone()))
            .collect();
        ResponseAudit {
            name: m.name().to_string(),
            settings_a: s.settings_a.clone(),
            settings_b: s.settings_b.clone(),
            support_u: s.support_u.clone(),
            support_v: s.support_v.clone(),
            support_w: s.support_w.clone(),
            source: Source::Tables { x, y },
        }
    }

    pub fn from_model(model: &Model) -> Result<Self> {
        match model {
            Model::Paper(_) => Ok(Self::paper()),
            Model::Discrete(m) => Ok(Self::from_discrete(m)),
            Model::Singlet(_) => Err(HvError::UnsupportedModel(
                "the singlet reference has no response functions to audit".into(),
            )),
        }
    }

    /// Builds an audit from the response tables of a model file. Unlike
    /// [`crate::models::load_model`], rows may list the remote setting or
    /// remote HV index; the most specific matching row wins.
    pub fn from_file(file: &ModelFile) -> Result<Self> {
        let n = |v: &Vec<f64>, what: &str| {
            if v.is_empty() {
                Err(HvError::validation(what, "-", "must not be empty"))
            } else {
                Ok(v.len())
            }
        };
        let (n_a, n_b) = (
            n(&file.settings_a, "settings_a")?,
            n(&file.settings_b, "settings_b")?,
        );
        let (n_u, n_v, n_w) = (
            n(&file.support_u, "support_u")?,
            n(&file.support_v, "support_v")?,
            n(&file.support_w, "support_w")?,
        );
        let mut x = HashMap::new();
        for (i, r) in file.p_x_given_auw.iter().enumerate() {
            let key = (r.a, r.w, r.b, r.v);
            let row = audit_row(
                &r.plus,
                "p_x_given_auw",
                i,
                n_u,
                [(r.a, n_a, "a"), (r.w, n_w, "w")],
                [(r.b, n_b, "b"), (r.v, n_v, "v")],
            )?;
            if x.insert(key, row).is_some() {
                return Err(HvError::validation("p_x_given_auw", i, "duplicate row"));
            }
        }
        let mut y = HashMap::new();
        for (i, r) in file.p_y_given_bvw.iter().enumerate() {
            let key = (r.b, r.w, r.a, r.u);
            let row = audit_row(
                &r.plus,
                "p_y_given_bvw",
                i,
                n_v,
                [(r.b, n_b, "b"), (r.w, n_w, "w")],
                [(r.a, n_a, "a"), (r.u, n_u, "u")],
            )?;
            if y.insert(key, row).is_some() {
                return Err(HvError::validation("p_y_given_bvw", i, "duplicate row"));
            }
        }
        for a in 0..n_a {
            for w in 0..n_w {
                for b in 0..n_b {
                    for v in 0..n_v {
                        if lookup(&x, a, w, b, v).is_none() {
                            return Err(HvError::validation(
                                "p_x_given_auw",
                                "-",
                                format!("no row covers a={a}, w={w}, b={b}, v={v}"),
                            ));
                        }
                    }
                }
            }
        }
        for b in 0..n_b {
            for w in 0..n_w {
                for a in 0..n_a {
                    for u in 0..n_u {
                        if lookup(&y, b, w, a, u).is_none() {
                            return Err(HvError::validation(
                                "p_y_given_bvw",
                                "-",
                                format!("no row covers b={b}, w={w}, a={a}, u={u}"),
                            ));
                        }
                    }
                }
            }
        }
        Ok(ResponseAudit {
            name: file.name.clone().unwrap_or_else(|| "audit".into()),
            settings_a: file.settings_a.clone(),
            settings_b: file.settings_b.clone(),
            support_u: file.support_u.clone(),
            support_v: file.support_v.clone(),
            support_w: file.support_w.clone(),
            source: Source::Tables { x, y },
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_file(&ModelFile::read(path.as_ref())?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self, c: Component) -> &[f64] {
        match c {
            Component::U => &self.support_u,
            Component::V => &self.support_v,
            Component::W => &self.support_w,
        }
    }

    /// Probability of `+1` at `site` for grid indices `(a, b, u, v, w)`.
    pub fn plus(&self, site: Site, [a, b, u, v, w]: [usize; 5]) -> f64 {
        match &self.source {
            Source::Paper => {
                let ang = |xs: &[f64], i: usize| Angle::new(xs[i]);
                match site {
                    Site::X => {
                        paper_response_x(ang(&self.settings_a, a), ang(&self.support_u, u)).p_plus()
                    }
                    Site::Y => paper_response_y(
                        ang(&self.settings_b, b),
                        ang(&self.support_v, v),
                        ang(&self.support_w, w),
                    )
                    .p_plus(),
                }
            }
            Source::Tables { x, y } => match site {
                Site::X => lookup(x, a, w, b, v).expect("validated coverage")[u],
                Site::Y => lookup(y, b, w, a, u).expect("validated coverage")[v],
            },
        }
    }

    /// Probability of `+1` at named coordinates; each must lie on its grid.
    pub fn plus_at(&self, site: Site, point: &Coords) -> Result<f64> {
        let idx = |key: &str, grid: &[f64]| -> Result<usize> {
            let x = *point
                .get(key)
                .ok_or_else(|| HvError::Domain(format!("missing coordinate `{key}`")))?;
            grid.iter()
                .position(|&g| (g - x).abs() <= 1e-9)
                .ok_or_else(|| HvError::Domain(format!("{key} = {x} is not on the audit grid")))
        };
        Ok(self.plus(
            site,
            [
                idx("a", &self.settings_a)?,
                idx("b", &self.settings_b)?,
                idx("u", &self.support_u)?,
                idx("v", &self.support_v)?,
                idx("w", &self.support_w)?,
            ],
        ))
    }
}

fn audit_row(
    plus: &[crate::models::file::Prob],
    table: &str,
    row: usize,
    n_local: usize,
    required: [(usize, usize, &str); 2],
    optional: [(Option<usize>, usize, &str); 2],
) -> Result<Vec<f64>> {
    for (i, n, key) in required {
        if i >= n {
            return Err(HvError::validation(
                table,
                row,
                format!("index {key}={i} is out of range"),
            ));
        }
    }
    for (i, n, key) in optional {
        if let Some(i) = i {
            if i >= n {
                return Err(HvError::validation(
                    table,
                    row,
                    format!("index {key}={i} is out of range"),
                ));
            }
        }
    }
    if plus.len() != n_local {
        return Err(HvError::validation(
            table,
            row,
            format!("has {} entries, expected {n_local}", plus.len()),
        ));
    }
    plus.iter()
        .map(|p| {
            let p = p.resolve(table, row)?;
            if !(-TOL..=1.0 + TOL).contains(&p) {
                return Err(HvError::validation(
                    table,
                    row,
                    format!("probability {p} is outside [0, 1]"),
                ));
            }
            Ok(p.clamp(0.0, 1.0))
        })
        .collect()
}

/// Largest change of a response probability when the remote setting and
/// remote HV change with the own setting, own HV and `w` held fixed.
pub fn check_generalized_locality(audit: &ResponseAudit) -> Result<DependenceReport> {
    let (n_a, n_b) = (audit.settings_a.len(), audit.settings_b.len());
    let (n_u, n_v, n_w) = (
        audit.support_u.len(),
        audit.support_v.len(),
        audit.support_w.len(),
    );

    let scan = |site: Site| {
        let (own_n, own_loc, own_keys, rem_n, rem_loc, rem_keys) = match site {
            Site::X => (n_a, n_u, ["a", "u"], n_b, n_v, ["b", "v"]),
            Site::Y => (n_b, n_v, ["b", "v"], n_a, n_u, ["a", "u"]),
        };
        let own_grid = |k: &str| match k {
            "a" => &audit.settings_a,
            "b" => &audit.settings_b,
            "u" => &audit.support_u,
            _ => &audit.support_v,
        };
        let mut fixed = Vec::with_capacity(own_n * own_loc * n_w);
        for s in 0..own_n {
            for l in 0..own_loc {
                for w in 0..n_w {
                    fixed.push(coords(&[
                        (own_keys[0], own_grid(own_keys[0])[s]),
                        (own_keys[1], own_grid(own_keys[1])[l]),
                        ("w", audit.support_w[w]),
                    ]));
                }
            }
        }
        let mut varied = Vec::with_capacity(rem_n * rem_loc);
        for r in 0..rem_n {
            for l in 0..rem_loc {
                varied.push(coords(&[
                    (rem_keys[0], own_grid(rem_keys[0])[r]),
                    (rem_keys[1], own_grid(rem_keys[1])[l]),
                ]));
            }
        }
        scan_site(site, &fixed, &varied, |i, j| {
            let (s, l, w) = (i / (own_loc * n_w), (i / n_w) % own_loc, i % n_w);
            let (r, rl) = (j / rem_loc, j % rem_loc);
            Ok(match site {
                Site::X => audit.plus(site, [s, r, l, rl, w]),
                Site::Y => audit.plus(site, [r, s, rl, l, w]),
            })
        })
    };
    let x = scan(Site::X)?;
    let y = scan(Site::Y)?;
    Ok(DependenceReport::assemble(
        CheckKind::Generalized,
        audit.name.clone(),
        x,
        y,
        TOL,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::anticorrelated_coin;

    #[test]
    fn arc_model_responses_ignore_remote_indices() {
        // Bob reads Alice's setting only through w.
        let r = check_generalized_locality(&ResponseAudit::paper()).unwrap();
        assert_eq!(r.max_deviation, 0.0);
        assert!(r.passed);
    }

    #[test]
    fn local_model_passes() {
        let r = check_generalized_locality(&ResponseAudit::from_discrete(&anticorrelated_coin()))
            .unwrap();
        assert!(r.passed);
    }

    #[test]
    fn witness_reevaluates_on_the_audit() {
        let audit = ResponseAudit::paper();
        let r = check_generalized_locality(&audit).unwrap();
        let w = r.witness.unwrap();
        let p = [
            audit.plus_at(w.site, &w.point(0)).unwrap(),
            audit.plus_at(w.site, &w.point(1)).unwrap(),
        ];
        assert_eq!(p, w.p_plus);
    }

    fn remote_file(y_rows: &str) -> String {
        format!(
            r#"{{"settings_a":[0,1],"settings_b":[0],"support_u":[0],"support_v":[0],"support_w":[0],
            "p_uv":[{{"u":0,"v":0,"p":"1"}}],
            "p_w_given_abuv":[{{"a":0,"b":0,"w":[[0,"1"]]}},{{"a":1,"b":0,"w":[[0,"1"]]}}],
            "p_x_given_auw":[{{"a":0,"w":0,"plus":["0.5"]}},{{"a":1,"w":0,"plus":["0.5"]}}],
            "p_y_given_bvw":{y_rows}}}"#
        )
    }

    #[test]
    fn hand_built_remote_dependence_is_found() {
        let text = remote_file(
            r#"[{"b":0,"w":0,"a":0,"plus":["0.9"]},{"b":0,"w":0,"a":1,"plus":["0.2"]}]"#,
        );
        let file = ModelFile::parse(&text, Path::new("inline")).unwrap();
        assert!(crate::models::DiscreteModel::from_file(&file).is_err());
        let r = check_generalized_locality(&ResponseAudit::from_file(&file).unwrap()).unwrap();
        assert!((r.y_deviation - 0.7).abs() < TOL);
        let w = r.witness.unwrap();
        assert_eq!(w.site, Site::Y);
        assert_eq!((w.varied[0]["a"], w.varied[1]["a"]), (0.0, 1.0));
    }

    #[test]
    fn uncovered_audit_rows_are_rejected() {
        let text = remote_file(r#"[{"b":0,"w":0,"a":0,"plus":["0.9"]}]"#);
        let file = ModelFile::parse(&text, Path::new("inline")).unwrap();
        let err = ResponseAudit::from_file(&file).unwrap_err();
        assert!(err.to_string().contains("p_y_given_bvw"));
    }
}
