//! Report assembly: per-trace stats, per-condition aggregates, ANOVA, and
//! the improvement figures. Serializes losslessly as JSON.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, AnovaResult, TrialStats};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub label: String,
    pub fingerprint: String,
    pub stats: TrialStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionAggregate {
    pub label: String,
    pub n_traces: usize,
    pub min_distance_mean: f64,
    pub min_distance_std: Option<f64>,
    pub time_in_pdd_mean: f64,
    pub time_in_pdd_std: Option<f64>,
    /// Traces with at least one sample at or below d_ps.
    pub traces_with_psd_violation: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub traces: Vec<TraceSummary>,
    pub conditions: Vec<ConditionAggregate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anova_min_distance: Option<AnovaResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anova_time_in_pdd: Option<AnovaResult>,
    /// (improved - baseline) / baseline, percent, on mean min distance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_distance_improvement_pct: Option<f64>,
    /// baseline / improved, percent, on mean time in the dangerous band.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_in_pdd_ratio_pct: Option<f64>,
}

/// Build a report from per-trace summaries. Conditions are the distinct
/// labels in sorted order. With exactly two conditions the first sorted
/// label is treated as the baseline (so "v" is the baseline against "vh")
/// and the improvement figures are filled in; ANOVA runs when requested
/// and every condition has at least two traces.
pub fn build_report(traces: Vec<TraceSummary>, with_anova: bool) -> Result<Report> {
    if traces.is_empty() {
        return Err(Error::invalid("report needs at least one trace"));
    }
    let mut labels: Vec<String> = traces.iter().map(|t| t.label.clone()).collect();
    labels.sort();
    labels.dedup();

    let mut conditions = Vec::new();
    for label in &labels {
        let group: Vec<&TraceSummary> = traces.iter().filter(|t| &t.label == label).collect();
        let mins: Vec<f64> = group.iter().map(|t| t.stats.min_distance).collect();
        let times: Vec<f64> = group.iter().map(|t| t.stats.time_in_pdd).collect();
        let (min_mean, min_std) = mean_and_optional_std(&mins)?;
        let (time_mean, time_std) = mean_and_optional_std(&times)?;
        conditions.push(ConditionAggregate {
            label: label.clone(),
            n_traces: group.len(),
            min_distance_mean: min_mean,
            min_distance_std: min_std,
            time_in_pdd_mean: time_mean,
            time_in_pdd_std: time_std,
            traces_with_psd_violation: group
                .iter()
                .filter(|t| t.stats.psd_violations > 0)
                .count(),
        });
    }

    let mut report = Report {
        traces,
        conditions,
        anova_min_distance: None,
        anova_time_in_pdd: None,
        min_distance_improvement_pct: None,
        time_in_pdd_ratio_pct: None,
    };

    if report.conditions.len() == 2 {
        let baseline = &report.conditions[0];
        let improved = &report.conditions[1];
        report.min_distance_improvement_pct = Some(metrics::improvement_difference_pct(
            baseline.min_distance_mean,
            improved.min_distance_mean,
        )?);
        if improved.time_in_pdd_mean != 0.0 {
            report.time_in_pdd_ratio_pct = Some(metrics::improvement_ratio_pct(
                baseline.time_in_pdd_mean,
                improved.time_in_pdd_mean,
            )?);
        }
    }

    if with_anova {
        if report.conditions.len() < 2 {
            return Err(Error::invalid("ANOVA needs at least two conditions"));
        }
        let group_values = |f: fn(&TrialStats) -> f64| -> Vec<Vec<f64>> {
            report
                .conditions
                .iter()
                .map(|c| {
                    report
                        .traces
                        .iter()
                        .filter(|t| t.label == c.label)
                        .map(|t| f(&t.stats))
                        .collect()
                })
                .collect()
        };
        report.anova_min_distance =
            Some(metrics::oneway_anova(&group_values(|s| s.min_distance))?);
        report.anova_time_in_pdd =
            Some(metrics::oneway_anova(&group_values(|s| s.time_in_pdd))?);
    }

    Ok(report)
}

fn mean_and_optional_std(values: &[f64]) -> Result<(f64, Option<f64>)> {
    if values.len() >= 2 {
        let (m, s) = metrics::summary(values)?;
        Ok((m, Some(s)))
    } else {
        Ok((metrics::mean(values)?, None))
    }
}

pub fn to_json(report: &Report) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(|e| Error::Parse(e.to_string()))
}

pub fn from_json(text: &str) -> Result<Report> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(label: &str, min_d: f64, time: f64, violations: usize) -> TraceSummary {
        TraceSummary {
            label: label.into(),
            fingerprint: format!("f-{label}-{min_d}"),
            stats: TrialStats {
                min_distance: min_d,
                time_in_pdd: time,
                psd_violations: violations,
                reaction_times: None,
            },
        }
    }

    fn two_condition_traces() -> Vec<TraceSummary> {
        vec![
            summary("v", 0.20, 22.0, 3),
            summary("v", 0.21, 20.0, 1),
            summary("v", 0.19, 25.0, 2),
            summary("vh", 0.28, 5.0, 0),
            summary("vh", 0.29, 6.0, 0),
            summary("vh", 0.30, 4.5, 0),
        ]
    }

    #[test]
    fn aggregates_group_by_sorted_label() {
        let report = build_report(two_condition_traces(), false).unwrap();
        assert_eq!(report.conditions.len(), 2);
        assert_eq!(report.conditions[0].label, "v");
        assert_eq!(report.conditions[1].label, "vh");
        assert_eq!(report.conditions[0].traces_with_psd_violation, 3);
        assert_eq!(report.conditions[1].traces_with_psd_violation, 0);
        assert!(report.min_distance_improvement_pct.unwrap() > 0.0);
        assert!(report.time_in_pdd_ratio_pct.unwrap() > 100.0);
    }

    #[test]
    fn anova_fills_both_metrics() {
        let report = build_report(two_condition_traces(), true).unwrap();
        let a = report.anova_min_distance.unwrap();
        assert_eq!((a.df_between, a.df_within), (1, 4));
        assert!(a.f_value > 0.0);
        assert!(report.anova_time_in_pdd.is_some());
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let report = build_report(two_condition_traces(), true).unwrap();
        let text = to_json(&report).unwrap();
        let back = from_json(&text).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(build_report(vec![], false).is_err());
    }
}
