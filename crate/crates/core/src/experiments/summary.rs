use serde::{Deserialize, Serialize};

use super::{Model, RunRecord};
use crate::error::{Error, Result};
use crate::metrics::{paired_t_test, TTestResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    Binary,
    Categorical,
}

impl SuiteKind {
    pub fn models(self) -> &'static [Model] {
        match self {
            SuiteKind::Binary => &[Model::Control1, Model::Control2, Model::Test],
            SuiteKind::Categorical => &[Model::Control, Model::Experimental],
        }
    }

    pub fn metrics(self) -> &'static [Metric] {
        match self {
            SuiteKind::Binary => &[
                Metric::FalseNegatives,
                Metric::FalsePositives,
                Metric::Top1Error,
                Metric::RealWorldCost,
            ],
            SuiteKind::Categorical => &[
                Metric::HighCostErrors,
                Metric::Top1Error,
                Metric::RealWorldCost,
            ],
        }
    }

    /// (baseline, candidate) pairs that get paired t-tests.
    pub fn comparisons(self) -> &'static [(Model, Model)] {
        match self {
            SuiteKind::Binary => &[
                (Model::Control1, Model::Test),
                (Model::Control2, Model::Test),
            ],
            SuiteKind::Categorical => &[(Model::Control, Model::Experimental)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    FalseNegatives,
    FalsePositives,
    HighCostErrors,
    Top1Error,
    RealWorldCost,
}

impl Metric {
    pub fn column(self) -> &'static str {
        match self {
            Metric::FalseNegatives => "MeanFN",
            Metric::FalsePositives => "MeanFP",
            Metric::HighCostErrors => "MeanHighCostErrors",
            Metric::Top1Error => "MeanTop1Error",
            Metric::RealWorldCost => "MeanRealWorldCost",
        }
    }

    pub fn of(self, r: &RunRecord) -> Result<f64> {
        let count = |v: Option<u64>| {
            v.map(|c| c as f64).ok_or_else(|| {
                Error::Input(format!(
                    "{} record of trial {} has no {self:?}",
                    r.model, r.trial
                ))
            })
        };
        match self {
            Metric::FalseNegatives => count(r.false_negatives),
            Metric::FalsePositives => count(r.false_positives),
            Metric::HighCostErrors => count(r.high_cost_errors),
            Metric::Top1Error => Ok(r.top1_error),
            Metric::RealWorldCost => Ok(r.real_world_cost),
        }
    }

    fn format(self, v: f64) -> String {
        match self {
            Metric::Top1Error => format!("{:.2}%", 100.0 * v),
            Metric::RealWorldCost => format!("${v:.4}"),
            _ => format!("{v:.2}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: Model,
    /// Means in the order of [`SuiteKind::metrics`].
    pub means: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline: Model,
    pub candidate: Model,
    pub metric: Metric,
    /// None when the paired differences have no spread.
    pub test: Option<TTestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub kind: SuiteKind,
    /// Trials per model.
    pub n: usize,
    pub models: Vec<ModelSummary>,
    pub comparisons: Vec<Comparison>,
}

impl SuiteSummary {
    /// Means per model and paired t-tests across trials. Records may come in any order.
    pub fn from_records(kind: SuiteKind, records: &[RunRecord]) -> Result<SuiteSummary> {
        let series = |model: Model, metric: Metric| -> Result<Vec<f64>> {
            let mut rows: Vec<&RunRecord> = records.iter().filter(|r| r.model == model).collect();
            rows.sort_by_key(|r| r.trial);
            rows.into_iter().map(|r| metric.of(r)).collect()
        };
        let trials = |model: Model| {
            let mut t: Vec<usize> = records
                .iter()
                .filter(|r| r.model == model)
                .map(|r| r.trial)
                .collect();
            t.sort_unstable();
            t
        };
        let reference = trials(kind.models()[0]);
        if reference.is_empty() {
            return Err(Error::Input(format!("no records for {}", kind.models()[0])));
        }
        if records.iter().any(|r| !kind.models().contains(&r.model)) {
            return Err(Error::Input(format!(
                "records from outside a {kind:?} suite"
            )));
        }
        for &m in kind.models() {
            if trials(m) != reference {
                return Err(Error::Input(format!(
                    "{m} records do not cover the same trials"
                )));
            }
        }

        let mut models = Vec::new();
        for &model in kind.models() {
            let means = kind
                .metrics()
                .iter()
                .map(|&metric| {
                    series(model, metric).map(|v| v.iter().sum::<f64>() / v.len() as f64)
                })
                .collect::<Result<_>>()?;
            models.push(ModelSummary { model, means });
        }
        let mut comparisons = Vec::new();
        for &(baseline, candidate) in kind.comparisons() {
            for &metric in kind.metrics() {
                let test =
                    paired_t_test(&series(baseline, metric)?, &series(candidate, metric)?).ok();
                comparisons.push(Comparison {
                    baseline,
                    candidate,
                    metric,
                    test,
                });
            }
        }
        Ok(SuiteSummary {
            kind,
            n: reference.len(),
            models,
            comparisons,
        })
    }

    pub fn mean(&self, model: Model, metric: Metric) -> Option<f64> {
        let col = self.kind.metrics().iter().position(|&m| m == metric)?;
        self.models
            .iter()
            .find(|s| s.model == model)
            .map(|s| s.means[col])
    }

    pub fn comparison(
        &self,
        baseline: Model,
        candidate: Model,
        metric: Metric,
    ) -> Option<&Comparison> {
        self.comparisons
            .iter()
            .find(|c| c.baseline == baseline && c.candidate == candidate && c.metric == metric)
    }

    fn p_value_rows(&self) -> Vec<(String, Vec<Option<f64>>)> {
        self.kind
            .comparisons()
            .iter()
            .map(|&(b, c)| {
                let ps = self
                    .kind
                    .metrics()
                    .iter()
                    .map(|&m| {
                        self.comparison(b, c, m)
                            .and_then(|x| x.test)
                            .map(|t| t.p_value)
                    })
                    .collect();
                (format!("p-value ({b} vs {c})"), ps)
            })
            .collect()
    }

    /// One row per model, then one p-value row per comparison; empty cells
    /// mark t-tests that could not be computed.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["Model"];
        header.extend(self.kind.metrics().iter().map(|m| m.column()));
        w.write_record(&header)?;
        for s in &self.models {
            let mut row = vec![s.model.to_string()];
            row.extend(s.means.iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        for (label, ps) in self.p_value_rows() {
            let mut row = vec![label];
            row.extend(
                ps.iter()
                    .map(|p| p.map(|v| v.to_string()).unwrap_or_default()),
            );
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Input(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Aligned plain-text table for terminals.
    pub fn to_table(&self) -> String {
        let metrics = self.kind.metrics();
        let mut rows: Vec<Vec<String>> = Vec::new();
        let mut header = vec![format!("n = {}", self.n)];
        header.extend(metrics.iter().map(|m| m.column().to_string()));
        rows.push(header);
        for s in &self.models {
            let mut row = vec![s.model.to_string()];
            row.extend(metrics.iter().zip(&s.means).map(|(m, &v)| m.format(v)));
            rows.push(row);
        }
        for (label, ps) in self.p_value_rows() {
            let mut row = vec![label];
            row.extend(ps.iter().map(|p| {
                p.map(|v| format!("{v:.3e}"))
                    .unwrap_or_else(|| "n/a".into())
            }));
            rows.push(row);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &rows {
            let mut line = format!("{:<w$}", row[0], w = widths[0]);
            for (cell, w) in row.iter().zip(&widths).skip(1) {
                line.push_str(&format!("  {cell:>w$}"));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}
