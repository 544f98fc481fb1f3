//! Reference computations for the stochastic estimator.
//!
//! Closed forms assume i.i.d. uniform thresholds: with
//! `p = (|x| / 2^E_X) * (|d| / 2^E_D)` each AND event is Bernoulli(p), the
//! count is Binomial(M, p), and the packed value is `sign * F * count` with
//! `F` the power-of-two scale. Hence `mean = sign * F * M * p` and
//! `variance = F^2 * M * p * (1 - p)`; for power-of-two `M` the mean is exactly
//! `x * d`.

use rayon::prelude::*;
use serde::Serialize;

use crate::encoder::exceeds_threshold;
use crate::engine::{outer_product, OuterProductJob};
use crate::error::{Error, Result};
use crate::lfsr::derive_seed_pair;
use crate::numeric::{pow2, Binary16Value};
use crate::unit_cell::f_scale;

/// `delta_j * x_i` in double precision, one row per `delta` entry.
pub fn exact_outer(x: &[f64], delta: &[f64]) -> Vec<Vec<f64>> {
    delta.iter().map(|&d| x.iter().map(|&v| d * v).collect()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

/// Mean and variance of one stochastic product under i.i.d. thresholds.
pub fn analytic_moments(x: f64, delta: f64, exp_x: i32, exp_delta: i32, seq_len: usize) -> Result<Moments> {
    for (v, e) in [(x, exp_x), (delta, exp_delta)] {
        if !v.is_finite() || v.abs() > pow2(e) {
            return Err(Error::OutOfRange { value: v, exponent: e });
        }
    }
    let p = (x.abs() * pow2(-exp_x)) * (delta.abs() * pow2(-exp_delta));
    let scale = f_scale(exp_x, exp_delta, seq_len)?.value();
    let m = seq_len as f64;
    let sign = if (x < 0.0) ^ (delta < 0.0) { -1.0 } else { 1.0 };
    Ok(Moments { mean: sign * scale * m * p, variance: scale * scale * m * p * (1.0 - p) })
}

/// Exact moments of the encoder + AND + count pipeline over every assignment
/// of `word_bits`-bit threshold words to the `2 * seq_len` events.
///
/// Cost is `2^(word_bits * 2 * seq_len)`; intended for tiny instances.
pub fn enumerate_moments(x: Binary16Value, delta: Binary16Value, exp_x: i32, exp_delta: i32, seq_len: usize, word_bits: u32) -> Result<Moments> {
    let total_bits = word_bits as usize * 2 * seq_len;
    if total_bits > 24 {
        return Err(Error::Contract(format!("enumeration of 2^{total_bits} cases is too large")));
    }
    let scale = f_scale(exp_x, exp_delta, seq_len)?.value();
    let sign = if x.is_sign_negative() ^ delta.is_sign_negative() { -1.0 } else { 1.0 };
    let (sx, ex) = x.significand_exponent();
    let (sd, ed) = delta.significand_exponent();
    let mask = (1u32 << word_bits) - 1;
    let cases = 1u64 << total_bits;

    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for code in 0..cases {
        let mut count = 0u32;
        for k in 0..seq_len {
            let wx = (code >> (word_bits as usize * 2 * k)) as u32 & mask;
            let wd = (code >> (word_bits as usize * (2 * k + 1))) as u32 & mask;
            let bx = !x.is_zero() && exceeds_threshold(sx, ex, exp_x, wx, word_bits);
            let bd = !delta.is_zero() && exceeds_threshold(sd, ed, exp_delta, wd, word_bits);
            count += (bx && bd) as u32;
        }
        let v = sign * scale * count as f64;
        sum += v;
        sum_sq += v * v;
    }
    let n = cases as f64;
    let mean = sum / n;
    Ok(Moments { mean, variance: sum_sq / n - mean * mean })
}

/// Sample statistics of one matrix entry across trials.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimatorStats {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub trials: usize,
    /// 95% normal-approximation half-width, `1.96 * sqrt(variance / trials)`.
    pub confidence_halfwidth: f64,
}

impl EstimatorStats {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        // Welford
        let (mut mean, mut m2) = (0.0, 0.0);
        for (k, &v) in samples.iter().enumerate() {
            let d = v - mean;
            mean += d / (k + 1) as f64;
            m2 += d * (v - mean);
        }
        let variance = if n > 1 { (m2 / (n - 1) as f64).max(0.0) } else { 0.0 };
        Self { mean, variance, trials: n, confidence_halfwidth: 1.96 * (variance / n as f64).sqrt() }
    }
}

/// 95% normal half-width for `trials` draws of a quantity with `variance`.
pub fn clt_halfwidth(variance: f64, trials: usize) -> f64 {
    1.96 * (variance / trials as f64).sqrt()
}

/// How trial seeds are chosen in [`empirical_stats`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedSchedule {
    /// Every trial reuses the same pair.
    Fixed { seed_x: u16, seed_delta: u16 },
    /// Trial `t` uses [`derive_seed_pair`]`(base, t)`.
    Derived { base: u16 },
}

impl SeedSchedule {
    pub fn seeds(&self, trial: u64) -> (u16, u16) {
        match *self {
            SeedSchedule::Fixed { seed_x, seed_delta } => (seed_x, seed_delta),
            SeedSchedule::Derived { base } => derive_seed_pair(base, trial),
        }
    }
}

/// Per-entry statistics of repeated outer products, row-major.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsReport {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<EstimatorStats>,
}

impl StatsReport {
    pub fn entry(&self, row: usize, col: usize) -> &EstimatorStats {
        &self.entries[row * self.cols + col]
    }
}

/// Run `template` under `trials` seed pairs and summarize every entry.
pub fn empirical_stats(template: &OuterProductJob, trials: usize, schedule: SeedSchedule) -> Result<StatsReport> {
    if trials < 2 {
        return Err(Error::Contract(format!("need at least 2 trials, got {trials}")));
    }
    let results: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let (seed_x, seed_delta) = schedule.seeds(t);
            let job = OuterProductJob { seed_x, seed_delta, ..template.clone() };
            outer_product(&job).map(|r| r.matrix.to_f64())
        })
        .collect::<Result<_>>()?;

    let (rows, cols) = (template.delta.len(), template.x.len());
    let mut column = vec![0.0; trials];
    let entries = (0..rows * cols)
        .map(|e| {
            for (slot, r) in column.iter_mut().zip(&results) {
                *slot = r[e];
            }
            EstimatorStats::from_samples(&column)
        })
        .collect();
    Ok(StatsReport { rows, cols, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(v: f64) -> Binary16Value {
        Binary16Value::from_f64(v)
    }

    #[test]
    fn exact_outer_examples() {
        assert_eq!(exact_outer(&[1.0, 2.0], &[3.0]), vec![vec![3.0, 6.0]]);
        assert_eq!(exact_outer(&[1.0, -7.5], &[0.0]), vec![vec![0.0, -0.0]]);
        assert_eq!(exact_outer(&[0.5], &[-0.5]), vec![vec![-0.25]]);
    }

    #[test]
    fn analytic_examples() {
        assert_eq!(analytic_moments(1.0, 1.0, 0, 0, 16).unwrap(), Moments { mean: 1.0, variance: 0.0 });
        assert_eq!(analytic_moments(0.0, 0.9, 0, 0, 16).unwrap(), Moments { mean: 0.0, variance: 0.0 });
        let m = analytic_moments(0.6, 0.7, 0, 0, 16).unwrap();
        assert!((m.mean - 0.42).abs() < 1e-12);
        let want = 16.0 * 0.42 * 0.58 / 256.0;
        assert!((m.variance - want).abs() < 1e-12);
        assert!((m.variance - 0.0152).abs() < 5e-5);
        assert!(analytic_moments(1.5, 0.1, 0, 0, 4).is_err());
    }

    #[test]
    fn enumeration_reproduces_closed_form_m2() {
        // 4-bit words: dyadic operands k/16 give exact probabilities.
        let m = enumerate_moments(h(0.625), h(-0.75), 0, 0, 2, 4).unwrap();
        let a = analytic_moments(0.625, -0.75, 0, 0, 2).unwrap();
        assert_eq!(m, a);
    }

    #[test]
    fn welford_matches_two_pass() {
        let s = [1.0, 2.0, 4.0, 8.0];
        let st = EstimatorStats::from_samples(&s);
        assert_eq!(st.mean, 3.75);
        let two_pass = s.iter().map(|v| (v - 3.75f64).powi(2)).sum::<f64>() / 3.0;
        assert!((st.variance - two_pass).abs() < 1e-12);
        assert_eq!(st.confidence_halfwidth, clt_halfwidth(st.variance, 4));
    }

    #[test]
    fn fixed_seeds_have_zero_variance() {
        let job = OuterProductJob::new(vec![h(0.6), h(-0.1)], vec![h(0.7)], 16, 3, 4);
        let r = empirical_stats(&job, 2, SeedSchedule::Fixed { seed_x: 3, seed_delta: 4 }).unwrap();
        assert!(r.entries.iter().all(|e| e.variance == 0.0));
        assert!(empirical_stats(&job, 1, SeedSchedule::Derived { base: 1 }).is_err());
    }

    #[test]
    fn full_scale_has_zero_variance() {
        let job = OuterProductJob::new(vec![h(1.0)], vec![h(-2.0)], 16, 3, 4);
        let r = empirical_stats(&job, 50, SeedSchedule::Derived { base: 99 }).unwrap();
        assert_eq!(r.entry(0, 0).mean, -2.0);
        assert_eq!(r.entry(0, 0).variance, 0.0);
    }

    #[test]
    fn point_four_two_scenario() {
        let job = OuterProductJob::new(vec![h(0.6)], vec![h(0.7)], 16, 1, 2);
        let r = empirical_stats(&job, 10_000, SeedSchedule::Derived { base: 0xACE1 }).unwrap();
        let a = analytic_moments(h(0.6).to_f64(), h(0.7).to_f64(), 0, 0, 16).unwrap();
        let e = r.entry(0, 0);
        assert!((e.mean - a.mean).abs() < 3.0 * clt_halfwidth(a.variance, 10_000), "{e:?} vs {a:?}");
    }
}
