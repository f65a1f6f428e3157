//! Sentence-level performance of list decoding with context selection:
//! retransmission load, correct-selection bounds, feasible sentence
//! lengths, the average selection probability, and a full simulation of
//! the selection pipeline.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use serde::Serialize;

use crate::analysis::check_p;
use crate::bits::BitWord;
use crate::channel::{arq_transmit, sample_sentence, BscChannel};
use crate::clda::{select, MarkovContext, SentenceLists, TieBreak};
use crate::codes::{LinearCode, MessageSolver};
use crate::error::{Error, Result};
use crate::list_decoding::{decode_list_with_radius, list_stabilizer};
use crate::weights::{minimum_distance, weight_distribution_exhaustive, WeightDistribution};

/// Probability that a single transmission is rejected and repeated:
/// one minus the acceptance probability. Relative precision degrades as
/// acceptance approaches one, where the difference underflows.
pub fn retransmission_probability(dist: &WeightDistribution, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(1.0 - dist.evaluate(1.0 - p, p))
}

/// Largest sentence length N for which the probability that all N words
/// are delivered without undetected error, given acceptance, still meets
/// `reliability`. The per-word factor is P_correct / P_accept; when it
/// reaches 1 (a noiseless channel) any length works and u64::MAX returns.
pub fn max_sentence_length(dist: &WeightDistribution, p: f64, reliability: f64) -> Result<u64> {
    check_p(p)?;
    if !(reliability > 0.0 && reliability < 1.0) {
        return Err(Error::Parameter(format!(
            "reliability target must lie in (0, 1), got {reliability}"
        )));
    }
    let q = 1.0 - p;
    let factor = dist.evaluate_range(q, p, 0, 0) / dist.evaluate(q, p);
    if factor >= 1.0 {
        return Ok(u64::MAX);
    }
    let meets = |n: u64| (n as f64 * factor.ln()).exp() >= reliability;
    let mut n = (reliability.ln() / factor.ln()).floor().max(0.0) as u64;
    while n < u64::MAX && meets(n + 1) {
        n += 1;
    }
    while n > 0 && !meets(n) {
        n -= 1;
    }
    Ok(n)
}

/// A lower bound on correct sentence selection and the same-list set sizes
/// behind it.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub value: f64,
    /// Size of the same-list set at each sentence position. The sets are
    /// translates of one stabilizer, so the sizes are equal by construction.
    pub s_sizes: Vec<usize>,
    /// True when the sizes were assumed 1 rather than computed, either by
    /// request or because the code is too large to enumerate.
    pub assume_singleton: bool,
}

/// Lower-bounds the probability that context selection recovers the sent
/// sentence, given every word was accepted: per word, the accepted word
/// reproduces the sent word's list when it is the sent word itself
/// (probability P_correct) or one of the other |S| - 1 same-list codewords,
/// each reached with probability at least p^d q^(n-d).
pub fn selection_lower_bound(
    code: &LinearCode,
    dist: &WeightDistribution,
    sentence: &[u64],
    p: f64,
    assume_singleton: bool,
) -> Result<BoundReport> {
    check_p(p)?;
    if sentence.is_empty() {
        return Err(Error::Parameter("sentence must be non-empty".into()));
    }
    if dist.n() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            got: dist.n(),
        });
    }
    if code.k() < 64 {
        let limit = 1u64 << code.k();
        if let Some(&s) = sentence.iter().find(|&&s| s >= limit) {
            return Err(Error::Parameter(format!(
                "sentence state {s} exceeds the {limit} messages of {}",
                code.name()
            )));
        }
    }
    let d = dist
        .min_distance()
        .ok_or_else(|| Error::Parameter("code has no nonzero codeword".into()))?;
    let (s_size, assumed) = if assume_singleton {
        (1, true)
    } else {
        match list_stabilizer(code, d) {
            Ok(stab) => (stab.len(), false),
            Err(Error::Capacity(_)) => (1, true),
            Err(e) => return Err(e),
        }
    };
    let q = 1.0 - p;
    let n = code.n();
    let accept = dist.evaluate(q, p);
    let p_correct = dist.evaluate_range(q, p, 0, 0);
    let per_pattern = if p == 0.0 {
        0.0
    } else {
        (d as f64 * p.ln() + (n - d) as f64 * q.ln()).exp()
    };
    let factor = (p_correct + (s_size - 1) as f64 * per_pattern) / accept;
    Ok(BoundReport {
        value: (sentence.len() as f64 * factor.ln()).exp(),
        s_sizes: vec![s_size; sentence.len()],
        assume_singleton: assumed,
    })
}

/// State-space budget for the average selection probability: all M^N
/// sentences are enumerated.
pub const AVERAGE_STATES_MAX: f64 = 1e5;
/// Product budget: each candidate's list product has L^N members.
pub const AVERAGE_PRODUCT_MAX: f64 = 1e6;

/// The average selection probability and its two factors.
#[derive(Clone, Debug, Serialize)]
pub struct AverageSelectionReport {
    /// win_mass times containment^N.
    pub value: f64,
    /// Context mass of the sentences that are the highest-weight member of
    /// their own list product (ties resolved toward the earliest sentence
    /// in descending-weight, then ascending-lexicographic order).
    pub win_mass: f64,
    /// Per-word probability that an accepted word still lies in the sent
    /// word's list.
    pub containment: f64,
    pub states: usize,
    pub list_size: usize,
    pub length: usize,
}

/// Averages, over sentences drawn from the context, the probability that
/// selection reproduces the sent sentence: the sentence must win its own
/// list product and every accepted word must stay inside the sent word's
/// list.
///
/// Winners are found by claiming: sentences are visited in selection order,
/// and each visit claims every sentence whose product contains the visitor
/// (membership is symmetric, so those are the visitor's own product). A
/// sentence wins exactly when its first claimant is itself.
pub fn average_selection_probability(
    code: &LinearCode,
    dist: &WeightDistribution,
    ctx: &MarkovContext,
    length: usize,
    p: f64,
) -> Result<AverageSelectionReport> {
    check_p(p)?;
    if length == 0 {
        return Err(Error::Parameter("sentence must be non-empty".into()));
    }
    let k = code.k();
    if k >= 32 || ctx.m() != 1usize << k {
        return Err(Error::Parameter(format!(
            "context has {} states but {} has 2^{} messages",
            ctx.m(),
            code.name(),
            k
        )));
    }
    if dist.n() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            got: dist.n(),
        });
    }
    let d = dist
        .min_distance()
        .ok_or_else(|| Error::Parameter("code has no nonzero codeword".into()))?;
    let m = ctx.m();
    if (m as f64).powi(length as i32) > AVERAGE_STATES_MAX {
        return Err(Error::Capacity(format!(
            "{m}^{length} sentences exceed the {AVERAGE_STATES_MAX:e} budget"
        )));
    }
    let lists: Vec<Vec<u64>> = (0..m as u64)
        .map(|s| {
            let cw = code.encode_index(s)?;
            Ok(decode_list_with_radius(code, &cw, d)?.indices())
        })
        .collect::<Result<_>>()?;
    let l = lists[0].len();
    if (l as f64).powi(length as i32) > AVERAGE_PRODUCT_MAX {
        return Err(Error::Capacity(format!(
            "list products of {l}^{length} sentences exceed the {AVERAGE_PRODUCT_MAX:e} budget"
        )));
    }

    // Sentence index: big-endian base-m digits, so ascending index is
    // ascending lexicographic order.
    let total = m.pow(length as u32);
    let digits = |mut idx: usize| {
        let mut s = vec![0u64; length];
        for pos in (0..length).rev() {
            s[pos] = (idx % m) as u64;
            idx /= m;
        }
        s
    };
    let log_weights: Vec<f64> = (0..total)
        .map(|idx| {
            ctx.log_sentence_weight(&digits(idx))
                .expect("states in range")
        })
        .collect();
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&a, &b| log_weights[b].total_cmp(&log_weights[a]).then(a.cmp(&b)));

    let mut claimed = vec![false; total];
    let mut remaining = total;
    let mut win_mass = 0.0;
    for &t in &order {
        if remaining == 0 {
            break;
        }
        let sentence = digits(t);
        // Odometer over the visitor's list product.
        let mut rows = vec![0usize; length];
        'product: loop {
            let mut s_idx = 0usize;
            for (pos, &r) in rows.iter().enumerate() {
                s_idx = s_idx * m + lists[sentence[pos] as usize][r] as usize;
            }
            if !claimed[s_idx] {
                claimed[s_idx] = true;
                remaining -= 1;
                if s_idx == t {
                    win_mass += log_weights[t].exp();
                }
            }
            let mut pos = length;
            loop {
                if pos == 0 {
                    break 'product;
                }
                pos -= 1;
                rows[pos] += 1;
                if rows[pos] < l {
                    break;
                }
                rows[pos] = 0;
            }
        }
    }

    let q = 1.0 - p;
    let containment = dist.evaluate_range(q, p, 0, d) / dist.evaluate(q, p);
    Ok(AverageSelectionReport {
        value: win_mass * (length as f64 * containment.ln()).exp(),
        win_mass,
        containment,
        states: m,
        list_size: l,
        length,
    })
}

/// Monte Carlo results for the full pipeline: per-word retransmission
/// until acceptance, list decoding around each accepted word, and context
/// selection across the sentence.
#[derive(Clone, Debug, Serialize)]
pub struct CldaSimReport {
    pub trials: u64,
    pub seed: u64,
    pub estimates: CldaEstimates,
    /// 3-sigma half-widths of the estimates.
    pub ci: CldaEstimates,
    /// Closed-form lower bound for this code, context length, and p.
    pub lower_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CldaEstimates {
    /// Share of trials whose selected sentence equals the sent one.
    pub correct_rate: f64,
    /// Share of trials where the sent sentence already has the highest
    /// weight in its own list product, so selection can succeed at all.
    pub assumption_hold_rate: f64,
    /// Correct share among the trials satisfying that assumption; absent
    /// when no trial does.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correct_given_assumption: Option<f64>,
}

/// Simulates `trials` sentence deliveries end to end. Each trial owns a
/// random stream derived from (seed, trial), so reports are reproducible
/// and independent of batching.
pub fn simulate_clda(
    code: &LinearCode,
    ctx: &MarkovContext,
    length: usize,
    p: f64,
    trials: u64,
    seed: u64,
    tie: TieBreak,
) -> Result<CldaSimReport> {
    if trials == 0 {
        return Err(Error::Parameter("need at least one trial".into()));
    }
    if length == 0 {
        return Err(Error::Parameter("sentence must be non-empty".into()));
    }
    let k = code.k();
    if k >= 32 || ctx.m() != 1usize << k {
        return Err(Error::Parameter(format!(
            "context has {} states but {} has 2^{} messages",
            ctx.m(),
            code.name(),
            k
        )));
    }
    let dist = weight_distribution_exhaustive(code)?;
    let d = minimum_distance(code)?;
    let solver = MessageSolver::new(code)?;
    let lower_bound = selection_lower_bound(code, &dist, &vec![0u64; length], p, false)?.value;

    let mut words: HashMap<u64, BitWord> = HashMap::new();
    let mut lists: HashMap<u64, Vec<u64>> = HashMap::new();
    let list_of = |state: u64, lists: &mut HashMap<u64, Vec<u64>>| -> Result<Vec<u64>> {
        if let Some(l) = lists.get(&state) {
            return Ok(l.clone());
        }
        let cw = code.encode_index(state)?;
        let l = decode_list_with_radius(code, &cw, d)?.indices();
        lists.insert(state, l.clone());
        Ok(l)
    };

    let mut correct = 0u64;
    let mut held = 0u64;
    let mut correct_held = 0u64;
    for trial in 0..trials {
        let mut channel = BscChannel::for_trial(p, seed, trial)?;
        let sentence = sample_sentence(ctx, length, channel.rng_mut())?;
        let mut received = Vec::with_capacity(length);
        for &state in &sentence {
            if let Entry::Vacant(slot) = words.entry(state) {
                slot.insert(code.encode_index(state)?);
            }
            let outcome = arq_transmit(code, &words[&state], &mut channel)?;
            received.push(
                solver
                    .solve(&outcome.delivered)
                    .expect("accepted word is a codeword"),
            );
        }

        let sent_lists = SentenceLists::new(
            sentence
                .iter()
                .map(|&s| list_of(s, &mut lists))
                .collect::<Result<_>>()?,
        )?;
        let best = select(ctx, &sent_lists, TieBreak::FirstIndex)?.best_log_weight();
        let own = ctx.log_sentence_weight(&sentence)?;
        let assumption = best - own < 1e-9;

        let received_lists = SentenceLists::new(
            received
                .iter()
                .map(|&r| list_of(r, &mut lists))
                .collect::<Result<_>>()?,
        )?;
        let selected = select(ctx, &received_lists, tie)?.sentence;
        let ok = selected == sentence;

        correct += ok as u64;
        held += assumption as u64;
        correct_held += (ok && assumption) as u64;
    }

    let rate = |num: u64, den: u64| num as f64 / den as f64;
    let half = |r: f64, den: u64| 3.0 * (r * (1.0 - r) / den as f64).sqrt();
    let correct_rate = rate(correct, trials);
    let hold_rate = rate(held, trials);
    let given = (held > 0).then(|| rate(correct_held, held));
    Ok(CldaSimReport {
        trials,
        seed,
        estimates: CldaEstimates {
            correct_rate,
            assumption_hold_rate: hold_rate,
            correct_given_assumption: given,
        },
        ci: CldaEstimates {
            correct_rate: half(correct_rate, trials),
            assumption_hold_rate: half(hold_rate, trials),
            correct_given_assumption: given.map(|g| half(g, held)),
        },
        lower_bound,
    })
}
