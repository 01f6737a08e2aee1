use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::domain::ConvergenceTrace;
use crate::error::{Error, Result};

/// Linear-interpolation percentile (numpy's default): rank `q/100 * (n-1)`
/// in the sorted samples.
pub fn percentiles(samples: &[f64], q: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("percentile samples"));
    }
    if !(0.0..=100.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("percentile {q} outside [0, 100]")));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(sorted_percentile(&s, q))
}

fn sorted_percentile(s: &[f64], q: f64) -> f64 {
    let rank = q / 100.0 * (s.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    if lo == hi {
        s[lo]
    } else {
        s[lo] + frac * (s[hi] - s[lo])
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Population standard deviation (divides by n).
fn std_pop(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Per-evaluation-index statistics of best-so-far traces across trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub label: String,
    pub trials: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub p10: Vec<f64>,
    pub p90: Vec<f64>,
    #[serde(rename = "final")]
    pub final_stats: FinalStats,
}

impl StatsSummary {
    pub fn from_traces(label: impl Into<String>, traces: &[ConvergenceTrace]) -> Result<Self> {
        let first = traces.first().ok_or(Error::EmptyInput("trace set"))?;
        let len = first.len();
        if len == 0 {
            return Err(Error::EmptyInput("trace"));
        }
        if let Some(t) = traces.iter().find(|t| t.len() != len) {
            return Err(Error::dim("trace length", len, t.len()));
        }
        let mut out = StatsSummary {
            label: label.into(),
            trials: traces.len(),
            mean: Vec::with_capacity(len),
            std: Vec::with_capacity(len),
            p10: Vec::with_capacity(len),
            p90: Vec::with_capacity(len),
            final_stats: FinalStats {
                mean: 0.0,
                std: 0.0,
                min: 0.0,
                max: 0.0,
            },
        };
        let mut column = vec![0.0; traces.len()];
        for i in 0..len {
            for (c, t) in column.iter_mut().zip(traces) {
                *c = t.values()[i];
            }
            out.mean.push(mean(&column));
            out.std.push(std_pop(&column));
            column.sort_by(f64::total_cmp);
            out.p10.push(sorted_percentile(&column, 10.0));
            out.p90.push(sorted_percentile(&column, 90.0));
        }
        let finals = final_values(traces);
        out.final_stats = FinalStats {
            mean: mean(&finals),
            std: std_pop(&finals),
            min: finals.iter().copied().fold(f64::INFINITY, f64::min),
            max: finals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        };
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// Mean best-so-far after `n` evaluations (1-based).
    pub fn mean_at(&self, n: usize) -> f64 {
        self.mean[n - 1]
    }
}

pub fn final_values(traces: &[ConvergenceTrace]) -> Vec<f64> {
    traces.iter().map(|t| t.last()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    /// Two-sided p-value for equal means.
    pub p_two_sided: f64,
    /// One-sided p-value for `mean(a) < mean(b)`.
    pub p_less: f64,
}

/// Welch's unequal-variance t-test with sample variances.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidArgument("Welch test needs at least two samples per group".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let va = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / (na - 1.0);
    let vb = b.iter().map(|x| (x - mb).powi(2)).sum::<f64>() / (nb - 1.0);
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    if se2 == 0.0 {
        let p = if ma == mb { 1.0 } else { 0.0 };
        return Ok(WelchResult {
            t: if ma == mb { 0.0 } else { (ma - mb).signum() * f64::INFINITY },
            df: na + nb - 2.0,
            p_two_sided: p,
            p_less: if ma < mb { 0.0 } else { 1.0 },
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(WelchResult {
        t,
        df,
        p_two_sided: 2.0 * dist.cdf(-t.abs()),
        p_less: dist.cdf(t),
    })
}
