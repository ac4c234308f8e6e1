//! Aggregate statistics over traces: minimum distance, time inside the
//! dangerous band, mean/std summaries, one-way ANOVA, and the two
//! improvement-ratio conventions used in the result reporting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Trace;

pub mod special;

/// Per-trace aggregate metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    /// Minimum TCP-hand distance over the trace (m).
    pub min_distance: f64,
    /// Time spent at or below the potentially dangerous distance (s).
    pub time_in_pdd: f64,
    /// Number of samples at or below the protective separation distance.
    pub psd_violations: usize,
    pub reaction_times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub f_value: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p_value: f64,
}

/// Minimum over samples of the TCP-hand distance.
pub fn min_distance(trace: &Trace) -> Result<f64> {
    if trace.steps.is_empty() {
        return Err(Error::invalid("trace is empty"));
    }
    Ok(trace
        .steps
        .iter()
        .map(|s| s.eval.d)
        .fold(f64::INFINITY, f64::min))
}

/// dt times the count of samples with d <= threshold (closed boundary,
/// consistent with the zone classification).
pub fn time_inside(trace: &Trace, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0) {
        return Err(Error::invalid("threshold must be > 0"));
    }
    let n = trace.steps.iter().filter(|s| s.eval.d <= threshold).count();
    Ok(n as f64 * trace.dt())
}

/// Full per-trace stats against the trace's own safety parameters.
pub fn trial_stats(trace: &Trace) -> Result<TrialStats> {
    let params = &trace.scenario.params;
    Ok(TrialStats {
        min_distance: min_distance(trace)?,
        time_in_pdd: time_inside(trace, params.d_pdd)?,
        psd_violations: trace
            .steps
            .iter()
            .filter(|s| s.eval.d <= params.d_ps)
            .count(),
        reaction_times: None,
    })
}

/// Arithmetic mean and sample (n-1) standard deviation.
pub fn summary(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::UndefinedStatistic(
            "sample std needs at least 2 values".into(),
        ));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt()))
}

pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("mean of empty list"));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// One-way (between-groups) ANOVA: F = MS_between / MS_within with
/// df (k-1, N-k); p from the F survival function via the regularized
/// incomplete beta function.
///
/// Zero within-group variance with nonzero between-group variance reports
/// F = +inf with p = 0; all-identical data is an undefined-F error.
pub fn oneway_anova(groups: &[Vec<f64>]) -> Result<AnovaResult> {
    if groups.len() < 2 {
        return Err(Error::invalid("ANOVA needs at least 2 groups"));
    }
    if groups.iter().any(|g| g.len() < 2) {
        return Err(Error::invalid("each ANOVA group needs at least 2 values"));
    }
    let k = groups.len();
    let n_total: usize = groups.iter().map(|g| g.len()).sum();
    let grand_mean = groups.iter().flatten().sum::<f64>() / n_total as f64;

    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ss_between += g.len() as f64 * (m - grand_mean) * (m - grand_mean);
        ss_within += g.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    }

    let df_between = k - 1;
    let df_within = n_total - k;
    if ss_within == 0.0 {
        if ss_between == 0.0 {
            return Err(Error::UndefinedStatistic(
                "all values identical: F is undefined".into(),
            ));
        }
        return Ok(AnovaResult {
            f_value: f64::INFINITY,
            df_between,
            df_within,
            p_value: 0.0,
        });
    }

    let ms_between = ss_between / df_between as f64;
    let ms_within = ss_within / df_within as f64;
    let f_value = ms_between / ms_within;
    let p_value = special::f_sf(f_value, df_between as f64, df_within as f64);
    Ok(AnovaResult { f_value, df_between, df_within, p_value })
}

/// Difference form: (improved - baseline) / baseline * 100. Used for the
/// minimum-distance improvement.
pub fn improvement_difference_pct(baseline: f64, improved: f64) -> Result<f64> {
    if baseline == 0.0 {
        return Err(Error::invalid("baseline must be nonzero"));
    }
    Ok((improved - baseline) / baseline * 100.0)
}

/// Ratio form: baseline / improved * 100. Used for the time-in-danger
/// reduction (the "407%" convention: old time over new time).
pub fn improvement_ratio_pct(baseline: f64, improved: f64) -> Result<f64> {
    if improved == 0.0 {
        return Err(Error::invalid("improved value must be nonzero"));
    }
    Ok(baseline / improved * 100.0)
}
