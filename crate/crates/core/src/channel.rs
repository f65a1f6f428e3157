//! Binary symmetric channel simulation and the retransmit-until-accepted
//! protocol built on it, with deterministic per-trial random streams.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::check_p;
use crate::bits::BitWord;
use crate::clda::MarkovContext;
use crate::codes::LinearCode;
use crate::error::{Error, Result};

/// A memoryless binary symmetric channel: each bit flips independently with
/// the crossover probability.
pub struct BscChannel {
    p: f64,
    /// Flip when a uniform u64 draw falls below round(p * 2^64); exact for
    /// p = 0 and unbiased to within 2^-64 otherwise.
    threshold: u64,
    rng: ChaCha8Rng,
}

impl BscChannel {
    pub fn new(p: f64, seed: u64) -> Result<Self> {
        Self::with_rng(p, ChaCha8Rng::seed_from_u64(seed))
    }

    /// A channel on an independent stream of the seed's generator. Distinct
    /// trial indices never share randomness, so aggregate results do not
    /// depend on how trials are batched.
    pub fn for_trial(p: f64, seed: u64, trial: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        Self::with_rng(p, rng)
    }

    fn with_rng(p: f64, rng: ChaCha8Rng) -> Result<Self> {
        check_p(p)?;
        let threshold = (p * 2f64.powi(64)).round() as u64;
        Ok(BscChannel { p, threshold, rng })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Sends a word through the channel, flipping each bit independently.
    pub fn transmit(&mut self, word: &BitWord) -> BitWord {
        let mut out = word.clone();
        for i in 0..word.len() {
            if self.rng.next_u64() < self.threshold {
                out.flip(i);
            }
        }
        out
    }

    pub(crate) fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Attempt cap for a single delivery; at any p <= 1/2 and practical block
/// length the odds of hitting it are negligible, so reaching it signals a
/// misconfigured channel rather than bad luck.
pub const ARQ_ATTEMPT_CAP: u64 = 1_000_000;

/// One completed delivery: the word the receiver accepted, how many extra
/// transmissions it took, and whether acceptance was silently wrong.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArqOutcome {
    pub delivered: BitWord,
    pub retransmissions: u64,
    pub undetected_error: bool,
}

/// Repeats transmission of a codeword until the received word passes the
/// code membership check, as an error-detect-and-retransmit receiver does.
/// Accepting any codeword other than the sent one is an undetected error.
pub fn arq_transmit(
    code: &LinearCode,
    sent: &BitWord,
    channel: &mut BscChannel,
) -> Result<ArqOutcome> {
    arq_transmit_with_cap(code, sent, channel, ARQ_ATTEMPT_CAP)
}

pub fn arq_transmit_with_cap(
    code: &LinearCode,
    sent: &BitWord,
    channel: &mut BscChannel,
    cap: u64,
) -> Result<ArqOutcome> {
    if sent.len() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            got: sent.len(),
        });
    }
    for attempt in 0..cap {
        let received = channel.transmit(sent);
        if code.accepts(&received) {
            return Ok(ArqOutcome {
                undetected_error: received != *sent,
                delivered: received,
                retransmissions: attempt,
            });
        }
    }
    Err(Error::RunawayChannel { cap })
}

/// Monte Carlo estimates for the retransmission protocol, with 3-sigma
/// half-widths on each rate.
#[derive(Clone, Debug, Serialize)]
pub struct ArqSimReport {
    pub trials: u64,
    pub seed: u64,
    pub estimates: ArqEstimates,
    pub ci: ArqEstimates,
}

#[derive(Clone, Debug, Serialize)]
pub struct ArqEstimates {
    /// Share of deliveries accepted with an undetected error.
    pub pe_arq: f64,
    /// Among erroneous deliveries, the share at distance exactly d from the
    /// sent word; absent when no trial erred.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist_d_share: Option<f64>,
    pub mean_retransmissions: f64,
}

/// Runs `trials` independent deliveries of random messages over a BSC and
/// tallies undetected-error outcomes. Each trial draws its message and noise
/// from its own stream, so results are reproducible for a (seed, trials)
/// pair no matter how the work is split.
pub fn monte_carlo_arq(code: &LinearCode, p: f64, trials: u64, seed: u64) -> Result<ArqSimReport> {
    if trials == 0 {
        return Err(Error::Parameter("need at least one trial".into()));
    }
    let tally = arq_trial_range(code, p, seed, 0..trials)?;
    Ok(tally.report(trials, seed))
}

/// Integer outcome counts over a set of trials. Tallies from disjoint
/// trial ranges of the same (code, p, seed) merge into exactly the tally
/// of the combined range, so work can be sharded freely.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ArqTally {
    pub undetected: u64,
    pub undetected_at_d: u64,
    pub retransmissions: u64,
}

impl ArqTally {
    pub fn merge(self, other: ArqTally) -> ArqTally {
        ArqTally {
            undetected: self.undetected + other.undetected,
            undetected_at_d: self.undetected_at_d + other.undetected_at_d,
            retransmissions: self.retransmissions + other.retransmissions,
        }
    }

    fn report(self, trials: u64, seed: u64) -> ArqSimReport {
        let n = trials as f64;
        let pe = self.undetected as f64 / n;
        let share = if self.undetected > 0 {
            Some(self.undetected_at_d as f64 / self.undetected as f64)
        } else {
            None
        };
        let share_ci = share.map(|s| 3.0 * (s * (1.0 - s) / self.undetected as f64).sqrt());
        ArqSimReport {
            trials,
            seed,
            estimates: ArqEstimates {
                pe_arq: pe,
                dist_d_share: share,
                mean_retransmissions: self.retransmissions as f64 / n,
            },
            ci: ArqEstimates {
                pe_arq: 3.0 * (pe * (1.0 - pe) / n).sqrt(),
                dist_d_share: share_ci,
                // Retransmission counts are geometric; 3 sigma of the sample
                // mean using the model variance (1 - a) / a^2 at the
                // observed acceptance rate a.
                mean_retransmissions: {
                    let a = 1.0 / (1.0 + self.retransmissions as f64 / n);
                    3.0 * ((1.0 - a) / (a * a * n)).sqrt()
                },
            },
        }
    }
}

/// Integer tallies over a contiguous trial range. Splitting a range and
/// merging the parts gives the same tally as one pass.
pub fn arq_trial_range(
    code: &LinearCode,
    p: f64,
    seed: u64,
    range: std::ops::Range<u64>,
) -> Result<ArqTally> {
    let d = crate::weights::minimum_distance(code)?;
    let mut tally = ArqTally::default();
    for trial in range {
        let mut channel = BscChannel::for_trial(p, seed, trial)?;
        let message = draw_message(code.k(), channel.rng_mut());
        let sent = code.encode_index(message)?;
        let outcome = arq_transmit(code, &sent, &mut channel)?;
        tally.retransmissions += outcome.retransmissions;
        if outcome.undetected_error {
            tally.undetected += 1;
            if sent.distance(&outcome.delivered) == d {
                tally.undetected_at_d += 1;
            }
        }
    }
    Ok(tally)
}

/// A uniform k-bit message index (k <= 64 by the enumeration budget).
pub(crate) fn draw_message(k: usize, rng: &mut ChaCha8Rng) -> u64 {
    debug_assert!(k <= 64);
    if k == 64 {
        rng.next_u64()
    } else {
        rng.next_u64() & ((1u64 << k) - 1)
    }
}

/// Draws a state sentence from a Markov chain by inverse-CDF walks: first
/// the prior, then one transition row per step.
pub fn sample_sentence(ctx: &MarkovContext, len: usize, rng: &mut ChaCha8Rng) -> Result<Vec<u64>> {
    if len == 0 {
        return Err(Error::Parameter("sentence must be non-empty".into()));
    }
    let mut sentence = Vec::with_capacity(len);
    let mut state = draw_from(ctx.prior(), rng);
    sentence.push(state as u64);
    for _ in 1..len {
        state = draw_from(ctx.row(state), rng);
        sentence.push(state as u64);
    }
    Ok(sentence)
}

fn draw_from(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    // 53-bit uniform in [0, 1); the final index catches rounding residue.
    let u = (rng.next_u64() >> 11) as f64 * 2f64.powi(-53);
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}
