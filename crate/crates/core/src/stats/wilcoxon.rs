use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Largest effective sample size that gets the exact null distribution.
pub const EXACT_MAX_N: usize = 25;
const MIN_NONZERO: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WilcoxonMethod {
    Exact,
    NormalApproximation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilcoxonResult {
    /// Sum of signed ranks.
    pub statistic: f64,
    /// Pairs left after dropping zero differences.
    pub n_effective: usize,
    /// Two-sided.
    pub p_value: f64,
    pub method: WilcoxonMethod,
    /// Lower median of all differences, zeros included.
    pub median_delta: f64,
}

/// Average ranks of `|d|`, doubled so ties stay integral.
pub(crate) fn doubled_ranks(d: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[a].abs().total_cmp(&d[b].abs()));
    let mut ranks = vec![0u64; d.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && d[order[end + 1]].abs() == d[order[start]].abs() {
            end += 1;
        }
        // Positions start..=end share rank ((start + 1) + (end + 1)) / 2.
        for &i in &order[start..=end] {
            ranks[i] = (start + end + 2) as u64;
        }
        start = end + 1;
    }
    ranks
}

pub(crate) fn lower_median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[(v.len() - 1) / 2]
}

/// Largest effective sample size the exact distribution accepts when forced.
pub const EXACT_LIMIT: usize = 60;

/// Two-sided signed-rank test on paired differences.
///
/// Zero differences are dropped and tied magnitudes share their average rank.
/// Up to [`EXACT_MAX_N`] remaining pairs, the p-value comes from the exact
/// null distribution of the statistic over all `2^n` sign assignments
/// (built by dynamic programming over rank sums). Beyond that a normal
/// approximation with tie-corrected variance and a continuity correction
/// is used.
pub fn wilcoxon_signed_rank(deltas: &[f64]) -> Result<WilcoxonResult> {
    wilcoxon_signed_rank_using(deltas, None)
}

/// As [`wilcoxon_signed_rank`], optionally forcing the method. Forced exact
/// tests accept at most [`EXACT_LIMIT`] non-zero differences.
pub fn wilcoxon_signed_rank_using(deltas: &[f64], method: Option<WilcoxonMethod>) -> Result<WilcoxonResult> {
    if deltas.iter().any(|d| !d.is_finite()) {
        return Err(Error::invalid("differences must be finite"));
    }
    let nonzero: Vec<f64> = deltas.iter().copied().filter(|&d| d != 0.0).collect();
    let n = nonzero.len();
    if n < MIN_NONZERO {
        return Err(Error::InsufficientData(format!(
            "{n} non-zero differences, need at least {MIN_NONZERO}"
        )));
    }
    let method = method.unwrap_or(if n <= EXACT_MAX_N {
        WilcoxonMethod::Exact
    } else {
        WilcoxonMethod::NormalApproximation
    });
    if method == WilcoxonMethod::Exact && n > EXACT_LIMIT {
        return Err(Error::invalid(format!(
            "exact test limited to {EXACT_LIMIT} pairs, got {n}"
        )));
    }
    let ranks = doubled_ranks(&nonzero);
    let w2: i64 = nonzero
        .iter()
        .zip(&ranks)
        .map(|(&d, &r)| if d > 0.0 { r as i64 } else { -(r as i64) })
        .sum();

    let p_value = match method {
        WilcoxonMethod::Exact => exact_p(&ranks, w2.unsigned_abs()),
        WilcoxonMethod::NormalApproximation => {
            let var: f64 = ranks.iter().map(|&r| (r as f64 / 2.0).powi(2)).sum();
            let z = ((w2.unsigned_abs() as f64 / 2.0) - 1.0).max(0.0) / var.sqrt();
            erfc(z / std::f64::consts::SQRT_2).min(1.0)
        }
    };
    Ok(WilcoxonResult {
        statistic: w2 as f64 / 2.0,
        n_effective: n,
        p_value,
        method,
        median_delta: lower_median(deltas),
    })
}

/// `P(|W| >= |w|)` under random signs, with `W` and `w` in doubled units.
fn exact_p(ranks: &[u64], w2_abs: u64) -> f64 {
    let total: u64 = ranks.iter().sum();
    // counts[t]: sign assignments whose positive doubled ranks sum to t.
    // Counts stay exact up to 2^53 and are otherwise rounded consistently.
    let mut counts = vec![0f64; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in ranks {
        let r = r as usize;
        for t in (0..=reach).rev() {
            counts[t + r] += counts[t];
        }
        reach += r;
    }
    let extreme: f64 = counts
        .iter()
        .enumerate()
        .filter(|&(t, _)| (2 * t as i64 - total as i64).unsigned_abs() >= w2_abs)
        .map(|(_, c)| c)
        .sum();
    (extreme / 2f64.powi(ranks.len() as i32)).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(doubled_ranks(&[3.0, -1.0, 1.0, 2.0]), vec![8, 3, 3, 6]);
    }

    #[test]
    fn all_positive_is_extreme() {
        let d: Vec<f64> = (1..=20).map(|i| i as f64 * 0.1).collect();
        let r = wilcoxon_signed_rank(&d).unwrap();
        assert_eq!(r.method, WilcoxonMethod::Exact);
        assert_eq!(r.p_value, 2.0 / (1u64 << 20) as f64);
        assert_eq!(r.statistic, 210.0);
    }

    #[test]
    fn symmetric_pairs_give_unit_p() {
        let d = [1.0, -1.0, 2.0, -2.0, 3.5, -3.5];
        let r = wilcoxon_signed_rank(&d).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn zeros_are_dropped_and_counted() {
        let d = [0.0, 1.0, 2.0, 0.0, 3.0, 4.0];
        assert!(matches!(wilcoxon_signed_rank(&d), Err(Error::InsufficientData(_))));
        let r = wilcoxon_signed_rank(&[0.0, 1.0, 2.0, 3.0, 4.0, -5.0]).unwrap();
        assert_eq!(r.n_effective, 5);
        assert_eq!(r.median_delta, 1.0);
    }

    #[test]
    fn large_samples_switch_to_normal() {
        let d: Vec<f64> = (1..=26)
            .map(|i| if i % 3 == 0 { -(i as f64) } else { i as f64 })
            .collect();
        let r = wilcoxon_signed_rank(&d).unwrap();
        assert_eq!(r.method, WilcoxonMethod::NormalApproximation);
        assert!(r.p_value > 0.0 && r.p_value < 1.0);
    }
}
