//! Serializable experiment reports (`report-v1`).
//!
//! A report holds the run parameters, one record per trial, aggregates that
//! can be recomputed from the trials, and named pass/fail checks. Every
//! failing check and every trial with a failed boolean carries a witness.
//!
//! JSON is the primary encoding. The CSV encoding is the same document
//! flattened to `field,value` rows with dotted paths (`trials.0.n`), so the
//! two agree field by field.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub const SCHEMA: &str = "report-v1";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown schema {0:?}")]
    Schema(String),
    #[error("check {0:?} failed without a witness")]
    MissingCheckWitness(String),
    #[error("trial {0} has a failed flag but no witness")]
    MissingTrialWitness(usize),
    #[error("aggregate {name} (q={q:?}) is {stored}, trials give {recomputed}")]
    Aggregate {
        name: String,
        q: Option<u32>,
        stored: f64,
        recomputed: f64,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Incidence,
    Furedi,
    Evasive,
    Graph,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub q: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_y: Option<u64>,
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

/// One trial. Only the fields meaningful for the report kind are set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialRecord {
    pub trial: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_x: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_y: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ktt_count: Option<u64>,
    /// Largest `|X ∩ l|` or `|Y ∩ l|` over all lines.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_line_hits: Option<usize>,
    /// `K_{s,m}`-freeness with the `s` side on the left (or the only side).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_left: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_right: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k3t_free: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_bound_ok: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_hits_x0: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_hits_x: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_vanishes: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_bad: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vanishing_lines: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl TrialRecord {
    fn has_failed_flag(&self) -> bool {
        [
            self.free_left,
            self.free_right,
            self.k3t_free,
            self.upper_bound_ok,
        ]
        .contains(&Some(false))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aggregate {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u32>,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_err: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
}

impl Aggregate {
    pub fn plain(name: &str, q: Option<u32>, value: f64) -> Aggregate {
        Aggregate {
            name: name.to_string(),
            q,
            value,
            target: None,
            std_err: None,
            z: None,
        }
    }

    /// An estimate compared with a target; `z` is left unset when the
    /// standard error is zero.
    pub fn estimate(
        name: &str,
        q: Option<u32>,
        value: f64,
        target: f64,
        std_err: f64,
    ) -> Aggregate {
        Aggregate {
            name: name.to_string(),
            q,
            value,
            target: Some(target),
            std_err: Some(std_err),
            z: (std_err > 0.0).then(|| (value - target) / std_err),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsReport {
    pub schema: String,
    pub kind: ReportKind,
    pub params: Params,
    pub trials: Vec<TrialRecord>,
    pub aggregates: Vec<Aggregate>,
    pub checks: Vec<Check>,
    /// Left unset by default so reports are byte-reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<u64>,
}

/// Mean, min and max of `ktt_count`, per `q`, in first-seen `q` order.
pub fn ktt_aggregates(trials: &[TrialRecord]) -> Vec<Aggregate> {
    let mut qs: Vec<Option<u32>> = Vec::new();
    for r in trials.iter().filter(|r| r.ktt_count.is_some()) {
        if !qs.contains(&r.q) {
            qs.push(r.q);
        }
    }
    let mut out = Vec::new();
    for q in qs {
        let counts: Vec<u64> = trials
            .iter()
            .filter(|r| r.q == q)
            .filter_map(|r| r.ktt_count)
            .collect();
        let mean = counts.iter().sum::<u64>() as f64 / counts.len() as f64;
        out.push(Aggregate::plain("ktt_mean", q, mean));
        out.push(Aggregate::plain(
            "ktt_min",
            q,
            *counts.iter().min().unwrap() as f64,
        ));
        out.push(Aggregate::plain(
            "ktt_max",
            q,
            *counts.iter().max().unwrap() as f64,
        ));
    }
    out
}

impl StatsReport {
    pub fn new(kind: ReportKind, params: Params) -> StatsReport {
        StatsReport {
            schema: SCHEMA.to_string(),
            kind,
            params,
            trials: Vec::new(),
            aggregates: Vec::new(),
            checks: Vec::new(),
            wall_clock_ms: None,
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, witness: impl FnOnce() -> String) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            witness: (!passed).then(witness),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn aggregate(&self, name: &str, q: Option<u32>) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.name == name && a.q == q)
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Structural validation against `report-v1`.
    pub fn validate(&self) -> Result<(), ReportError> {
        if self.schema != SCHEMA {
            return Err(ReportError::Schema(self.schema.clone()));
        }
        if let Some(c) = self
            .checks
            .iter()
            .find(|c| !c.passed && c.witness.is_none())
        {
            return Err(ReportError::MissingCheckWitness(c.name.clone()));
        }
        if let Some(r) = self
            .trials
            .iter()
            .find(|r| r.has_failed_flag() && r.witness.is_none())
        {
            return Err(ReportError::MissingTrialWitness(r.trial));
        }
        for fresh in ktt_aggregates(&self.trials) {
            if let Some(stored) = self.aggregate(&fresh.name, fresh.q) {
                let tol = 1e-9 * fresh.value.abs().max(1.0);
                if (stored.value - fresh.value).abs() > tol {
                    return Err(ReportError::Aggregate {
                        name: fresh.name,
                        q: fresh.q,
                        stored: stored.value,
                        recomputed: fresh.value,
                    });
                }
            }
        }
        Ok(())
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String, ReportError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<StatsReport, ReportError> {
        Ok(serde_json::from_str(s)?)
    }

    /// `(dotted path, value)` pairs in document order.
    pub fn flatten(&self) -> Result<Vec<(String, String)>, ReportError> {
        let mut out = Vec::new();
        flatten_value("", &serde_json::to_value(self)?, &mut out);
        Ok(out)
    }

    pub fn to_csv(&self) -> Result<String, ReportError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["field", "value"])?;
        for (k, v) in self.flatten()? {
            w.write_record([k, v])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn flatten_value(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Null => {}
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        Value::Number(n) => out.push((prefix.to_string(), n.to_string())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten_value(&join(&i.to_string()), item, out);
            }
        }
        Value::Object(map) => {
            for (k, item) in map {
                flatten_value(&join(k), item, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> StatsReport {
        let mut r = StatsReport::new(
            ReportKind::Incidence,
            Params {
                q: vec![7],
                t: Some(3),
                seed: Some(1),
                trials: 2,
                ..Params::default()
            },
        );
        for (i, k) in [10u64, 20].into_iter().enumerate() {
            r.trials.push(TrialRecord {
                trial: i,
                q: Some(7),
                ktt_count: Some(k),
                free_left: Some(true),
                ..TrialRecord::default()
            });
        }
        r.aggregates = ktt_aggregates(&r.trials);
        r.check("all_free", true, String::new);
        r
    }

    #[test]
    fn aggregates_and_validation() {
        let r = sample();
        assert_eq!(r.aggregate("ktt_mean", Some(7)).unwrap().value, 15.0);
        assert_eq!(r.aggregate("ktt_max", Some(7)).unwrap().value, 20.0);
        r.validate().unwrap();

        let mut bad = r.clone();
        bad.aggregates[0].value = 3.0;
        assert!(matches!(bad.validate(), Err(ReportError::Aggregate { .. })));

        let mut bad = r.clone();
        bad.checks.push(Check {
            name: "x".into(),
            passed: false,
            witness: None,
        });
        assert!(matches!(
            bad.validate(),
            Err(ReportError::MissingCheckWitness(_))
        ));

        let mut bad = r.clone();
        bad.trials[1].free_left = Some(false);
        assert!(matches!(
            bad.validate(),
            Err(ReportError::MissingTrialWitness(1))
        ));

        let mut bad = r;
        bad.schema = "report-v0".into();
        assert!(matches!(bad.validate(), Err(ReportError::Schema(_))));
    }

    #[test]
    fn json_and_csv_agree() {
        let r = sample();
        let json = r.to_json().unwrap();
        assert!(json.contains("\"schema\": \"report-v1\""));
        assert_eq!(StatsReport::from_json(&json).unwrap(), r);
        let csv = r.to_csv().unwrap();
        let mut rd = csv::Reader::from_reader(csv.as_bytes());
        let rows: Vec<(String, String)> = rd
            .records()
            .map(|rec| {
                let rec = rec.unwrap();
                (rec[0].to_string(), rec[1].to_string())
            })
            .collect();
        assert_eq!(rows, r.flatten().unwrap());
        assert!(rows.contains(&("trials.1.ktt_count".into(), "20".into())));
        assert!(rows.contains(&("schema".into(), "report-v1".into())));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let json = sample()
            .to_json()
            .unwrap()
            .replace("\"trials\": 2", "\"trials\": 2, \"bogus\": 1");
        assert!(StatsReport::from_json(&json).is_err());
    }

    #[test]
    fn z_scores() {
        let a = Aggregate::estimate("p", None, 0.12, 0.1, 0.01);
        assert!((a.z.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(Aggregate::estimate("p", None, 0.0, 0.0, 0.0).z, None);
    }
}
