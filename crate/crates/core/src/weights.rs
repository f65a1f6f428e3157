//! Weight distributions of linear codes: exact enumeration via a Gray-code
//! walk, the MacWilliams transform in exact integer arithmetic, and numeric
//! evaluation of the weight enumerator with log-domain per-term products.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::codes::LinearCode;
use crate::error::{Error, Result};

/// Largest message dimension the exhaustive walk will enumerate (2^32 words).
pub const ENUMERATION_MAX_K: usize = 32;

/// The weight distribution A_0..A_n of an [n, k] code. Counts are exact
/// arbitrary-precision integers; they reach 2^247 already for RM(6, 8).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightDistribution {
    counts: Vec<BigUint>,
}

impl WeightDistribution {
    /// Wraps raw counts (index = weight). Requires A_0 = 1, the zero word.
    pub fn from_counts(counts: Vec<BigUint>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Parameter(
                "weight distribution must cover A_0".into(),
            ));
        }
        if counts[0] != BigUint::from(1u32) {
            return Err(Error::Inconsistent(
                "A_0 must be 1: a linear code contains exactly one zero word".into(),
            ));
        }
        Ok(WeightDistribution { counts })
    }

    pub fn n(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn count(&self, weight: usize) -> &BigUint {
        &self.counts[weight]
    }

    /// Total number of codewords, 2^k.
    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    /// Smallest nonzero weight with a positive count; `None` for the zero code.
    pub fn min_distance(&self) -> Option<usize> {
        (1..self.counts.len()).find(|&i| !self.counts[i].is_zero())
    }

    /// Evaluates the homogeneous enumerator sum_i A_i x^(n-i) y^i.
    ///
    /// Each term is computed in the log domain and the terms are summed with
    /// a compensated max-shifted accumulation, so tiny tail terms survive next
    /// to dominant ones.
    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        self.evaluate_range(x, y, 0, self.n())
    }

    /// Evaluates sum_{i = lo..=hi} A_i x^(n-i) y^i over a weight range.
    pub fn evaluate_range(&self, x: f64, y: f64, lo: usize, hi: usize) -> f64 {
        let n = self.n();
        let hi = hi.min(n);
        let mut log_terms = Vec::new();
        for i in lo..=hi {
            let a = &self.counts[i];
            if a.is_zero() {
                continue;
            }
            // x^(n-i) and y^i; a zero base kills the term unless its exponent
            // is zero (0^0 = 1 here, the empty product).
            let mut t = log_big(a);
            match power_log(x, (n - i) as f64) {
                Some(l) => t += l,
                None => continue,
            }
            match power_log(y, i as f64) {
                Some(l) => t += l,
                None => continue,
            }
            log_terms.push(t);
        }
        if log_terms.is_empty() {
            return 0.0;
        }
        let m = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return 0.0;
        }
        // Kahan summation of the shifted terms.
        let mut sum = 0.0f64;
        let mut c = 0.0f64;
        for t in &log_terms {
            let v = (t - m).exp() - c;
            let s = sum + v;
            c = (s - sum) - v;
            sum = s;
        }
        m.exp() * sum
    }
}

/// log(base^exp) as exp * ln(base); `None` marks a term that is exactly zero.
fn power_log(base: f64, exp: f64) -> Option<f64> {
    if exp == 0.0 {
        Some(0.0)
    } else if base == 0.0 {
        None
    } else {
        Some(exp * base.ln())
    }
}

/// Natural log of a positive big integer, good to ~1 ulp even far beyond the
/// f64 range: reads the top 53 bits as a mantissa and adds the shift.
pub(crate) fn log_big(v: &BigUint) -> f64 {
    debug_assert!(!v.is_zero());
    let bits = v.bits();
    if bits <= 53 {
        return v.to_f64().expect("fits f64").ln();
    }
    let shift = bits - 53;
    let top = (v >> shift).to_f64().expect("53 bits fit f64");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Counts codeword weights by walking the message space in Gray-code order,
/// so each step XORs a single generator row. Bounded by [`ENUMERATION_MAX_K`];
/// larger codes should go through the dual and [`macwilliams_transform`].
pub fn weight_distribution_exhaustive(code: &LinearCode) -> Result<WeightDistribution> {
    let k = code.k();
    let n = code.n();
    if k > ENUMERATION_MAX_K {
        return Err(Error::Capacity(format!(
            "exhaustive enumeration covers k <= {ENUMERATION_MAX_K}, code has k = {k}; \
             enumerate the dual and apply the MacWilliams transform instead"
        )));
    }
    let mut counts = vec![0u64; n + 1];
    counts[0] = 1;
    if k > 0 {
        let total: u64 = 1u64 << k;
        if n <= 64 {
            // Single-limb fast path: the walk is three ALU ops per codeword.
            let rows: Vec<u64> = code.generator().iter().map(|r| r.as_u64()).collect();
            let mut cw = 0u64;
            for i in 1..total {
                cw ^= rows[i.trailing_zeros() as usize];
                counts[cw.count_ones() as usize] += 1;
            }
        } else {
            let mut cw = crate::bits::BitWord::zeros(n);
            for i in 1..total {
                cw.xor_assign(&code.generator()[i.trailing_zeros() as usize]);
                counts[cw.weight()] += 1;
            }
        }
    }
    WeightDistribution::from_counts(counts.into_iter().map(BigUint::from).collect())
}

/// Minimum distance by exhaustive minimum-weight scan; the same budget as
/// [`weight_distribution_exhaustive`]. Errors for the zero code.
pub fn minimum_distance(code: &LinearCode) -> Result<usize> {
    let k = code.k();
    if k == 0 {
        return Err(Error::Parameter(
            "the zero code has no nonzero codeword, so no minimum distance".into(),
        ));
    }
    if k > ENUMERATION_MAX_K {
        return Err(Error::Capacity(format!(
            "minimum-distance scan covers k <= {ENUMERATION_MAX_K}, code has k = {k}"
        )));
    }
    let n = code.n();
    let total: u64 = 1u64 << k;
    let mut best = usize::MAX;
    if n <= 64 {
        let rows: Vec<u64> = code.generator().iter().map(|r| r.as_u64()).collect();
        let mut cw = 0u64;
        for i in 1..total {
            cw ^= rows[i.trailing_zeros() as usize];
            best = best.min(cw.count_ones() as usize);
        }
    } else {
        let mut cw = crate::bits::BitWord::zeros(n);
        for i in 1..total {
            cw.xor_assign(&code.generator()[i.trailing_zeros() as usize]);
            best = best.min(cw.weight());
        }
    }
    Ok(best)
}

/// MacWilliams transform: recovers the primal distribution of an [n, n - k']
/// code from the distribution of its [n, k'] dual,
///
///   A_i = 2^(-k') * sum_j A'_j * K_i(j),
///   K_i(j) = sum_s (-1)^s C(j, s) C(n - j, i - s)   (Krawtchouk polynomial).
///
/// All arithmetic is exact; a result that is negative or not divisible by
/// 2^k' means the input was not a weight distribution and is rejected.
pub fn macwilliams_transform(
    dual: &WeightDistribution,
    dual_k: usize,
) -> Result<WeightDistribution> {
    let n = dual.n();
    let expected_total = BigUint::from(1u32) << dual_k;
    if dual.total() != expected_total {
        return Err(Error::Inconsistent(format!(
            "dual distribution sums to {}, expected 2^{dual_k}",
            dual.total()
        )));
    }
    let pascal = pascal_rows(n);
    let divisor = BigInt::from(expected_total);
    let mut counts = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut acc = BigInt::zero();
        for (j, aj) in dual.counts().iter().enumerate() {
            if aj.is_zero() {
                continue;
            }
            let mut k_ij = BigInt::zero();
            let row_j = &pascal[j];
            let row_nj = &pascal[n - j];
            for s in 0..=i.min(j) {
                if i - s > n - j {
                    continue;
                }
                let term = BigInt::from(row_j[s].clone() * &row_nj[i - s]);
                if s % 2 == 0 {
                    k_ij += term;
                } else {
                    k_ij -= term;
                }
            }
            acc += BigInt::from_biguint(Sign::Plus, aj.clone()) * k_ij;
        }
        if acc.sign() == Sign::Minus {
            return Err(Error::Inconsistent(format!(
                "transform produced a negative count at weight {i}"
            )));
        }
        if !(&acc % &divisor).is_zero() {
            return Err(Error::Inconsistent(format!(
                "transform count at weight {i} is not divisible by 2^{dual_k}"
            )));
        }
        counts.push((acc / &divisor).to_biguint().expect("non-negative"));
    }
    WeightDistribution::from_counts(counts)
}

/// Rows 0..=n of Pascal's triangle.
fn pascal_rows(n: usize) -> Vec<Vec<BigUint>> {
    let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(n + 1);
    rows.push(vec![BigUint::from(1u32)]);
    for r in 1..=n {
        let prev = &rows[r - 1];
        let mut row = Vec::with_capacity(r + 1);
        row.push(BigUint::from(1u32));
        for c in 1..r {
            row.push(&prev[c - 1] + &prev[c]);
        }
        row.push(BigUint::from(1u32));
        rows.push(row);
    }
    rows
}

// Counts serialize as decimal strings: they overflow every JSON number type.
impl Serialize for WeightDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.counts.iter().map(|c| c.to_str_radix(10)).collect();
        strings.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WeightDistribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(deserializer)?;
        let counts = strings
            .iter()
            .map(|s| {
                s.parse::<BigUint>()
                    .map_err(|_| D::Error::custom(format!("invalid count {s:?}")))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        WeightDistribution::from_counts(counts).map_err(D::Error::custom)
    }
}
