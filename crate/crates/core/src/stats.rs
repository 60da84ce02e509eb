//! Descriptive statistics shared by aggregation, tables and figures.

use serde::Serialize;

/// Count, mean and population variance of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count as f64;
        Some(Summary {
            count,
            mean,
            variance,
        })
    }
}

/// Box-and-whisker statistics: quartiles by linear interpolation between
/// order statistics, whiskers at the most extreme points within 1.5 IQR.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxStats {
    pub summary: Summary,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl BoxStats {
    pub fn of(values: &[f64]) -> Option<BoxStats> {
        let summary = Summary::of(values)?;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q1 = quantile_sorted(&sorted, 0.25);
        let median = quantile_sorted(&sorted, 0.5);
        let q3 = quantile_sorted(&sorted, 0.75);
        let iqr = q3 - q1;
        let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let inside = sorted.iter().copied().filter(|v| (lo_fence..=hi_fence).contains(v));
        let whisker_low = inside.clone().next().unwrap_or(q1);
        let whisker_high = inside.last().unwrap_or(q3);
        let outliers = sorted
            .iter()
            .copied()
            .filter(|v| !(lo_fence..=hi_fence).contains(v))
            .collect();
        Some(BoxStats {
            summary,
            q1,
            median,
            q3,
            whisker_low,
            whisker_high,
            outliers,
        })
    }
}

/// Per-index mean and variance over traces of unequal length. Each trace is
/// first turned into its running minimum, and shorter traces are padded with
/// their final value.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Curve {
    pub runs: usize,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

pub fn best_so_far(trace: &[f64]) -> Vec<f64> {
    trace
        .iter()
        .scan(f64::INFINITY, |best, &v| {
            *best = best.min(v);
            Some(*best)
        })
        .collect()
}

impl Curve {
    pub fn of<'a>(traces: impl IntoIterator<Item = &'a [f64]>) -> Curve {
        let runs: Vec<Vec<f64>> = traces
            .into_iter()
            .filter(|t| !t.is_empty())
            .map(best_so_far)
            .collect();
        let len = runs.iter().map(Vec::len).max().unwrap_or(0);
        let mut mean = Vec::with_capacity(len);
        let mut variance = Vec::with_capacity(len);
        let mut column = Vec::with_capacity(runs.len());
        for k in 0..len {
            column.clear();
            column.extend(runs.iter().map(|r| r.get(k).copied().unwrap_or(*r.last().unwrap())));
            let s = Summary::of(&column).expect("at least one run");
            mean.push(s.mean);
            variance.push(s.variance);
        }
        Curve {
            runs: runs.len(),
            mean,
            variance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_basics() {
        let s = Summary::of(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((s.mean, s.variance), (1.0, 0.0));
        let s = Summary::of(&[0.0, 2.0]).unwrap();
        assert_eq!((s.mean, s.variance), (1.0, 1.0));
        assert!(Summary::of(&[]).is_none());
    }

    #[test]
    fn box_stats_whiskers() {
        let b = BoxStats::of(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!((b.q1, b.median, b.q3), (2.0, 3.0, 4.0));
        assert_eq!(b.whisker_low, 1.0);
        assert_eq!(b.whisker_high, 4.0);
        assert_eq!(b.outliers, vec![100.0]);
    }

    #[test]
    fn curve_pads_with_final_best() {
        let a = [3.0, 1.0, 2.0];
        let b = [4.0];
        let c = Curve::of([&a[..], &b[..]]);
        assert_eq!(c.runs, 2);
        assert_eq!(c.mean, vec![3.5, 2.5, 2.5]);
        assert_eq!(c.variance, vec![0.25, 2.25, 2.25]);
        let single = Curve::of([&a[..]]);
        assert!(single.variance.iter().all(|&v| v == 0.0));
    }
}
