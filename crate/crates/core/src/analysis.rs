//! Closed-form ARQ error analysis over a binary symmetric channel: acceptance
//! and undetected-error probabilities from the weight enumerator, the share a
//! radius-d list decoder can repair, and the post-ARQ error rates.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::weights::{log_big, WeightDistribution};

/// Probability that a transmission is accepted as some codeword other than
/// the sent one *and* lands at distance exactly d, the part a radius-d list
/// decoder captures: A_d p^d (1-p)^(n-d).
pub fn list_correctable_probability(dist: &WeightDistribution, p: f64) -> Result<f64> {
    check_p(p)?;
    let d = dist
        .min_distance()
        .ok_or_else(|| Error::Parameter("distribution has no nonzero weight".into()))?;
    let n = dist.n();
    if p == 0.0 {
        return Ok(0.0);
    }
    let log_term = log_big(dist.count(d)) + d as f64 * p.ln() + (n - d) as f64 * (1.0 - p).ln();
    Ok(log_term.exp())
}

/// Closed-form per-delivery metrics of an ARQ system at crossover `p`.
///
/// With A(x, y) the weight enumerator and q = 1 - p:
/// acceptance happens with probability A(q, p) per attempt, splitting into
/// `p_correct` = q^n and `p_undetected` = A(q, p) - q^n, the latter computed
/// directly as the sum over nonzero weights so no cancellation occurs.
#[derive(Clone, Debug)]
pub struct ArqAnalysis {
    pub p: f64,
    /// q^n: the accepted word is the sent word.
    pub p_correct: f64,
    /// An accepted word differs from the sent one (undetected error).
    pub p_undetected: f64,
    /// Undetected errors at distance exactly d (list-correctable part).
    pub p_list: f64,
    /// P(delivered word wrong) = p_undetected / A(q, p).
    pub pe_arq: f64,
    /// Residual error after radius-d list correction.
    pub pe_arq_list: f64,
    /// Share of undetected errors the list decoder repairs, p_list /
    /// p_undetected; absent when p_undetected = 0.
    pub benefit: Option<f64>,
    /// Decoding-list size, A_d + 1.
    pub list_size: BigUint,
}

impl ArqAnalysis {
    pub fn compute(dist: &WeightDistribution, p: f64) -> Result<Self> {
        check_p(p)?;
        let d = dist
            .min_distance()
            .ok_or_else(|| Error::Parameter("distribution has no nonzero weight".into()))?;
        let n = dist.n();
        let q = 1.0 - p;
        let p_correct = dist.evaluate_range(q, p, 0, 0);
        let p_undetected = dist.evaluate_range(q, p, 1, n);
        let p_list = list_correctable_probability(dist, p)?;
        // The tail beyond weight d, not its difference from p_undetected:
        // both sums share their terms, so pe identities hold by construction.
        let p_beyond = dist.evaluate_range(q, p, d + 1, n);
        let accept = p_correct + p_undetected;
        Ok(ArqAnalysis {
            p,
            p_correct,
            p_undetected,
            p_list,
            pe_arq: p_undetected / accept,
            pe_arq_list: p_beyond / accept,
            benefit: (p_undetected > 0.0).then(|| p_list / p_undetected),
            list_size: dist.count(d) + 1u32,
        })
    }

    /// A(q, p): per-attempt acceptance probability.
    pub fn acceptance(&self) -> f64 {
        self.p_correct + self.p_undetected
    }

    pub const CSV_HEADER: &'static str = "p,P_c,P_ue,P_list,Pe_arq,Pe_arq_list,P_b,list_size";

    /// One CSV row matching [`Self::CSV_HEADER`]; floats carry 10 significant
    /// digits, an absent benefit is an empty field.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            format_sig10(self.p),
            format_sig10(self.p_correct),
            format_sig10(self.p_undetected),
            format_sig10(self.p_list),
            format_sig10(self.pe_arq),
            format_sig10(self.pe_arq_list),
            self.benefit.map(format_sig10).unwrap_or_default(),
            self.list_size
        )
    }
}

/// Metrics across a grid of crossover probabilities.
pub fn sweep(dist: &WeightDistribution, grid: &[f64]) -> Result<Vec<ArqAnalysis>> {
    grid.iter()
        .map(|&p| ArqAnalysis::compute(dist, p))
        .collect()
}

/// Deterministic 10-significant-digit scientific notation.
pub fn format_sig10(v: f64) -> String {
    format!("{v:.9e}")
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::Parameter(format!(
            "crossover probability must lie in [0, 0.5], got {p}"
        )));
    }
    Ok(())
}
