//! List decoding around accepted words: every codeword within a given
//! Hamming radius of the received word, plus the set of codewords that
//! produce an identical list.

use crate::bits::BitWord;
use crate::codes::{LinearCode, MessageSolver};
use crate::error::{Error, Result};
use crate::weights::minimum_distance;

/// Rough operation budget shared by both ball-enumeration routes.
pub const LIST_BALL_MAX_OPS: f64 = 2e8;

/// A codeword inside a ball, as its message index and distance from the
/// center.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BallMember {
    pub index: u64,
    pub distance: usize,
}

/// All codewords within `radius` of `center`, sorted by distance and then
/// message index. The center need not be a codeword here.
///
/// Two routes with the same output: walking the whole code in Gray order
/// (2^k steps) or testing every error pattern of weight at most `radius`
/// against the parity checks (sum of C(n, i) steps). The cheaper one runs;
/// if both exceed [`LIST_BALL_MAX_OPS`] the call is refused.
pub fn ball(code: &LinearCode, center: &BitWord, radius: usize) -> Result<Vec<BallMember>> {
    if center.len() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            got: center.len(),
        });
    }
    if code.k() > 64 {
        return Err(Error::Capacity(
            "ball members are indexed by u64 messages, so k must be at most 64".into(),
        ));
    }
    let gray = gray_cost(code);
    let patterns = pattern_cost(code, radius);
    if gray.min(patterns) > LIST_BALL_MAX_OPS {
        return Err(Error::Capacity(format!(
            "ball of radius {radius} in {} needs about {:.1e} operations, budget is {LIST_BALL_MAX_OPS:e}",
            code.name(),
            gray.min(patterns)
        )));
    }
    let mut members = if gray <= patterns {
        ball_gray(code, center, radius)
    } else {
        ball_patterns(code, center, radius)?
    };
    members.sort_unstable_by_key(|m| (m.distance, m.index));
    Ok(members)
}

fn gray_cost(code: &LinearCode) -> f64 {
    let limbs = (code.n() as f64 / 64.0).ceil().max(1.0);
    2f64.powi(code.k().min(1_000) as i32) * limbs
}

fn pattern_cost(code: &LinearCode, radius: usize) -> f64 {
    let n = code.n();
    let limbs = (n as f64 / 64.0).ceil().max(1.0);
    let checks = (code.n() - code.k()).max(1) as f64;
    let mut count = 0.0;
    let mut binom = 1.0;
    for i in 0..=radius.min(n) {
        if i > 0 {
            binom *= (n - i + 1) as f64 / i as f64;
        }
        count += binom;
    }
    count * checks * limbs
}

/// Walks every codeword via single-row Gray steps, keeping those near the
/// center. Message index of Gray position t is t ^ (t >> 1).
fn ball_gray(code: &LinearCode, center: &BitWord, radius: usize) -> Vec<BallMember> {
    let k = code.k();
    let rows = code.generator();
    let mut members = Vec::new();
    // Track cw ^ center so the distance is just its weight.
    let mut diff = center.clone();
    let total: u64 = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    let mut record = |diff: &BitWord, t: u64| {
        let dist = diff.weight();
        if dist <= radius {
            members.push(BallMember {
                index: t ^ (t >> 1),
                distance: dist,
            });
        }
    };
    record(&diff, 0);
    for t in 1..=total {
        diff.xor_assign(&rows[t.trailing_zeros() as usize]);
        record(&diff, t);
    }
    members
}

/// Flips every pattern of up to `radius` positions on the center and keeps
/// the candidates that satisfy all parity checks.
fn ball_patterns(code: &LinearCode, center: &BitWord, radius: usize) -> Result<Vec<BallMember>> {
    let solver = MessageSolver::new(code)?;
    let n = code.n();
    let mut members = Vec::new();
    let mut cand = center.clone();
    let consider = |cand: &BitWord, dist: usize, members: &mut Vec<BallMember>| {
        if code.accepts(cand) {
            let index = solver
                .solve(cand)
                .expect("word passing all parity checks is a codeword");
            members.push(BallMember {
                index,
                distance: dist,
            });
        }
    };
    consider(&cand, 0, &mut members);
    for w in 1..=radius.min(n) {
        let mut idx: Vec<usize> = (0..w).collect();
        loop {
            for &p in &idx {
                cand.flip(p);
            }
            consider(&cand, w, &mut members);
            for &p in &idx {
                cand.flip(p);
            }
            if !next_combination(&mut idx, n) {
                break;
            }
        }
    }
    Ok(members)
}

/// Advances a sorted position tuple to the next combination of the same
/// size; false once exhausted.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let w = idx.len();
    let mut i = w;
    while i > 0 {
        i -= 1;
        if idx[i] < n - w + i {
            idx[i] += 1;
            for j in i + 1..w {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// The decoding list of an accepted word: the word itself plus every other
/// codeword within the radius, ordered by distance then message index, so
/// entry 0 is always the center.
#[derive(Clone, Debug)]
pub struct DecodeList {
    center: BitWord,
    center_index: u64,
    radius: usize,
    members: Vec<BallMember>,
}

impl DecodeList {
    pub fn center(&self) -> &BitWord {
        &self.center
    }

    pub fn center_index(&self) -> u64 {
        self.center_index
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[BallMember] {
        &self.members
    }

    /// Message indices in list order (distance, then index).
    pub fn indices(&self) -> Vec<u64> {
        self.members.iter().map(|m| m.index).collect()
    }

    /// Message indices in ascending order, for set comparisons.
    pub fn index_set(&self) -> Vec<u64> {
        let mut v = self.indices();
        v.sort_unstable();
        v
    }

    pub fn contains(&self, index: u64) -> bool {
        self.members.iter().any(|m| m.index == index)
    }
}

/// Lists an accepted word's neighborhood at the code's minimum distance,
/// the radius that captures every undetectable corruption of one
/// transmission error event.
pub fn decode_list(code: &LinearCode, received: &BitWord) -> Result<DecodeList> {
    let radius = minimum_distance(code)?;
    decode_list_with_radius(code, received, radius)
}

/// Same as [`decode_list`] with an explicit radius. The received word must
/// be a codeword: lists are built for words the receiver accepted.
pub fn decode_list_with_radius(
    code: &LinearCode,
    received: &BitWord,
    radius: usize,
) -> Result<DecodeList> {
    let center_index = code
        .message_index_of(received)?
        .ok_or_else(|| Error::Parameter("decoding lists are centered on codewords".into()))?;
    let members = ball(code, received, radius)?;
    debug_assert_eq!(members[0].index, center_index);
    Ok(DecodeList {
        center: received.clone(),
        center_index,
        radius,
        members,
    })
}

/// Message indices of codewords whose radius-`radius` list equals the list
/// of `word` (itself included), ascending.
///
/// For a codeword c the list is a coset shift L(c) = c + K, where K is the
/// set of codewords of weight at most the radius. So L(c) = L(s) exactly
/// when e = c + s keeps K fixed under translation. That stabilizer is found
/// once over K and shifted onto the word, all in message-index space where
/// encoding is linear.
pub fn same_list_set(code: &LinearCode, word: &BitWord, radius: usize) -> Result<Vec<u64>> {
    let word_index = code
        .message_index_of(word)?
        .ok_or_else(|| Error::Parameter("same-list sets are defined for codewords".into()))?;
    let stab = list_stabilizer(code, radius)?;
    let mut set: Vec<u64> = stab.into_iter().map(|e| e ^ word_index).collect();
    set.sort_unstable();
    Ok(set)
}

/// Message indices e with e + K = K, for K the codewords of weight at most
/// `radius`; always contains 0. Every same-list set of this radius is a
/// shift of it, so its size is the common size of all such sets.
pub fn list_stabilizer(code: &LinearCode, radius: usize) -> Result<Vec<u64>> {
    let zero = BitWord::zeros(code.n());
    let kernel: Vec<u64> = ball(code, &zero, radius)?
        .into_iter()
        .map(|m| m.index)
        .collect();
    let mut sorted = kernel.clone();
    sorted.sort_unstable();
    let mut stab = Vec::new();
    let mut shifted = vec![0u64; sorted.len()];
    for &e in &sorted {
        for (dst, &x) in shifted.iter_mut().zip(&sorted) {
            *dst = e ^ x;
        }
        shifted.sort_unstable();
        if shifted == sorted {
            stab.push(e);
        }
    }
    Ok(stab)
}
