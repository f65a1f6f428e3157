//! Binary [n, k] linear codes: Hamming and Reed-Muller constructions, explicit
//! generator matrices, encoding, parity-check membership, and duals.

use serde::Deserialize;

use crate::bits::BitWord;
use crate::error::{Error, Result};

/// A binary linear code given by a generator matrix and a parity-check matrix.
///
/// Invariants, checked on construction: every generator row is orthogonal to
/// every parity-check row, the generator has full rank `k`, and the
/// parity-check matrix has rank `n - k`. Matrices are kept in the natural form
/// produced by each construction; they are not row-reduced.
#[derive(Clone, Debug)]
pub struct LinearCode {
    name: String,
    n: usize,
    k: usize,
    generator: Vec<BitWord>,
    parity_check: Vec<BitWord>,
}

impl LinearCode {
    /// Shared constructor. `rank_checked` callers guarantee row independence
    /// structurally (Hamming rows carry a private data position; Reed-Muller
    /// rows evaluate distinct monomials); the explicit path derives both
    /// matrices from a row reduction that establishes rank directly.
    fn from_parts(
        name: String,
        n: usize,
        generator: Vec<BitWord>,
        parity_check: Vec<BitWord>,
    ) -> Result<Self> {
        let k = generator.len();
        if parity_check.len() != n - k {
            return Err(Error::InvalidCode(format!(
                "expected {} parity rows for [{}, {}], got {}",
                n - k,
                n,
                k,
                parity_check.len()
            )));
        }
        for row in generator.iter().chain(&parity_check) {
            if row.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
        }
        for g in &generator {
            for h in &parity_check {
                if g.dot_parity(h) {
                    return Err(Error::InvalidCode(
                        "generator and parity-check matrices are not orthogonal".into(),
                    ));
                }
            }
        }
        Ok(LinearCode {
            name,
            n,
            k,
            generator,
            parity_check,
        })
    }

    /// The [2^m - 1, 2^m - 1 - m, 3] Hamming code. Parity-check columns are
    /// the binary expansions of 1..=n; generator rows put one message bit on
    /// each non-power-of-two position and repair the parity positions.
    pub fn hamming(m: u32) -> Result<Self> {
        if !(2..=16).contains(&m) {
            return Err(Error::Parameter(format!(
                "Hamming order m must be in 2..=16, got {m}"
            )));
        }
        let n = (1usize << m) - 1;
        let mut parity_check = Vec::with_capacity(m as usize);
        for j in 0..m {
            let mut row = BitWord::zeros(n);
            for i in 0..n {
                if ((i + 1) >> j) & 1 == 1 {
                    row.set(i, true);
                }
            }
            parity_check.push(row);
        }
        let mut generator = Vec::with_capacity(n - m as usize);
        for q in 0..n {
            if (q + 1).is_power_of_two() {
                continue; // parity position
            }
            let mut row = BitWord::zeros(n);
            row.set(q, true);
            for j in 0..m {
                if ((q + 1) >> j) & 1 == 1 {
                    row.flip((1usize << j) - 1);
                }
            }
            generator.push(row);
        }
        let k = n - m as usize;
        Self::from_parts(format!("Hamming({n},{k})"), n, generator, parity_check)
    }

    /// The Reed-Muller code RM(r, m) of length 2^m. Generator rows are the
    /// evaluation vectors of the monomials of degree <= r, ordered by degree
    /// and then lexicographically by variable index; variable x_j reads bit j
    /// of the evaluation point. The parity-check matrix is the generator of
    /// RM(m - r - 1, m), empty when r = m.
    pub fn reed_muller(r: u32, m: u32) -> Result<Self> {
        if m > 10 {
            return Err(Error::Parameter(format!(
                "Reed-Muller order m must be at most 10, got {m}"
            )));
        }
        if r > m {
            return Err(Error::Parameter(format!(
                "Reed-Muller degree r must satisfy r <= m, got r={r}, m={m}"
            )));
        }
        let generator = rm_monomial_rows(r, m);
        let parity_check = if r == m {
            Vec::new()
        } else {
            rm_monomial_rows(m - r - 1, m)
        };
        Self::from_parts(format!("RM({r},{m})"), 1usize << m, generator, parity_check)
    }

    /// The [n, 1, n] repetition code.
    pub fn repetition(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter(
                "repetition length must be positive".into(),
            ));
        }
        Self::from_generator(Some(format!("Rep({n})")), &[vec![1; n]])
    }

    /// A code from explicit generator rows (0/1 entries). Rows must be
    /// linearly independent; the parity-check matrix is derived from the row
    /// reduction of the generator.
    pub fn from_generator(name: Option<String>, rows: &[Vec<u8>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Parameter("generator needs at least one row".into()));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::Parameter("generator rows must be non-empty".into()));
        }
        let generator = rows
            .iter()
            .map(|row| {
                if row.len() != n {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        got: row.len(),
                    });
                }
                BitWord::from_bits(row)
            })
            .collect::<Result<Vec<_>>>()?;
        let k = generator.len();

        // Row-reduce a copy; a zero row or missing pivot means dependent rows.
        let mut rref = generator.clone();
        let mut pivots = Vec::with_capacity(k);
        let mut rank = 0usize;
        for col in 0..n {
            let Some(pivot_row) = (rank..k).find(|&r| rref[r].get(col)) else {
                continue;
            };
            rref.swap(rank, pivot_row);
            let current = rref[rank].clone();
            for (r, row) in rref.iter_mut().enumerate() {
                if r != rank && row.get(col) {
                    row.xor_assign(&current);
                }
            }
            pivots.push(col);
            rank += 1;
            if rank == k {
                break;
            }
        }
        if rank < k {
            return Err(Error::InvalidCode(format!(
                "generator rows are linearly dependent (rank {rank} < {k})"
            )));
        }

        // Null space of the generator: one parity row per non-pivot column.
        let mut parity_check = Vec::with_capacity(n - k);
        for f in 0..n {
            if pivots.contains(&f) {
                continue;
            }
            let mut h = BitWord::zeros(n);
            h.set(f, true);
            for (i, &p) in pivots.iter().enumerate() {
                if rref[i].get(f) {
                    h.set(p, true);
                }
            }
            parity_check.push(h);
        }
        let name = name.unwrap_or_else(|| format!("explicit[{n},{k}]"));
        Self::from_parts(name, n, generator, parity_check)
    }

    /// The dual code: generator and parity-check matrices swap roles.
    pub fn dual(&self) -> Result<Self> {
        Self::from_parts(
            format!("dual({})", self.name),
            self.n,
            self.parity_check.clone(),
            self.generator.clone(),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn generator(&self) -> &[BitWord] {
        &self.generator
    }

    pub fn parity_check(&self) -> &[BitWord] {
        &self.parity_check
    }

    /// Encodes a k-bit message word: the XOR of the generator rows selected by
    /// the message bits.
    pub fn encode(&self, message: &BitWord) -> Result<BitWord> {
        if message.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                got: message.len(),
            });
        }
        let mut out = BitWord::zeros(self.n);
        for (j, row) in self.generator.iter().enumerate() {
            if message.get(j) {
                out.xor_assign(row);
            }
        }
        Ok(out)
    }

    /// Encodes a message given as an integer index; bit j of the index selects
    /// generator row j. Requires `k <= 64`.
    pub fn encode_index(&self, index: u64) -> Result<BitWord> {
        if self.k > 64 {
            return Err(Error::Capacity(format!(
                "message indices cover k <= 64, code has k = {}",
                self.k
            )));
        }
        if self.k < 64 && index >> self.k != 0 {
            return Err(Error::Parameter(format!(
                "message index {index} out of range for k = {}",
                self.k
            )));
        }
        let mut out = BitWord::zeros(self.n);
        for (j, row) in self.generator.iter().enumerate() {
            if (index >> j) & 1 == 1 {
                out.xor_assign(row);
            }
        }
        Ok(out)
    }

    /// Membership test via the parity-check matrix only.
    pub fn is_codeword(&self, word: &BitWord) -> Result<bool> {
        if word.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: word.len(),
            });
        }
        Ok(self.accepts(word))
    }

    /// Unchecked membership test for hot loops; `word` must have length n.
    pub(crate) fn accepts(&self, word: &BitWord) -> bool {
        self.parity_check.iter().all(|h| !h.dot_parity(word))
    }

    /// The message index that encodes to `word`, or `None` if `word` is not a
    /// codeword. Builds a fresh solver; reuse [`MessageSolver`] in loops.
    pub fn message_index_of(&self, word: &BitWord) -> Result<Option<u64>> {
        Ok(MessageSolver::new(self)?.solve(word))
    }
}

/// Evaluation rows of all monomials of degree <= r in m variables, ordered by
/// degree then lexicographically by variable tuple.
fn rm_monomial_rows(r: u32, m: u32) -> Vec<BitWord> {
    let n = 1usize << m;
    let mut rows = Vec::new();
    for deg in 0..=r {
        for mono in combinations(m as usize, deg as usize) {
            let mut row = BitWord::zeros(n);
            for t in 0..n {
                if mono.iter().all(|&v| (t >> v) & 1 == 1) {
                    row.set(t, true);
                }
            }
            rows.push(row);
        }
    }
    rows
}

/// All size-`take` subsets of 0..m in lexicographic order.
fn combinations(m: usize, take: usize) -> Vec<Vec<usize>> {
    if take == 0 {
        return vec![Vec::new()];
    }
    if take > m {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..take).collect();
    loop {
        out.push(idx.clone());
        // Advance the rightmost index that still has room.
        let mut i = take;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + m - take {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..take {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Maps codewords back to message indices by row-reducing the generator once.
/// Requires `k <= 64` so the combination masks fit a machine word.
pub struct MessageSolver {
    pivots: Vec<usize>,
    rref: Vec<BitWord>,
    combos: Vec<u64>,
}

impl MessageSolver {
    pub fn new(code: &LinearCode) -> Result<Self> {
        if code.k() > 64 {
            return Err(Error::Capacity(format!(
                "message indices cover k <= 64, code has k = {}",
                code.k()
            )));
        }
        let k = code.k();
        let n = code.n();
        let mut rref: Vec<BitWord> = code.generator().to_vec();
        let mut combos: Vec<u64> = (0..k).map(|i| 1u64 << i).collect();
        let mut pivots = Vec::with_capacity(k);
        let mut rank = 0usize;
        for col in 0..n {
            let Some(pivot_row) = (rank..k).find(|&r| rref[r].get(col)) else {
                continue;
            };
            rref.swap(rank, pivot_row);
            combos.swap(rank, pivot_row);
            let row = rref[rank].clone();
            let combo = combos[rank];
            for r in 0..k {
                if r != rank && rref[r].get(col) {
                    rref[r].xor_assign(&row);
                    combos[r] ^= combo;
                }
            }
            pivots.push(col);
            rank += 1;
            if rank == k {
                break;
            }
        }
        debug_assert_eq!(rank, k, "generator rank checked at construction");
        Ok(MessageSolver {
            pivots,
            rref,
            combos,
        })
    }

    /// The message index encoding to `word`, or `None` for non-codewords.
    pub fn solve(&self, word: &BitWord) -> Option<u64> {
        let mut v = word.clone();
        let mut msg = 0u64;
        for (i, &p) in self.pivots.iter().enumerate() {
            if v.get(p) {
                v.xor_assign(&self.rref[i]);
                msg ^= self.combos[i];
            }
        }
        (v.weight() == 0).then_some(msg)
    }
}

/// On-disk description of a code, decoded from JSON.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSpec {
    pub family: String,
    #[serde(default)]
    pub m: Option<u32>,
    #[serde(default)]
    pub r: Option<u32>,
    #[serde(default)]
    pub generator: Option<Vec<Vec<u8>>>,
}

impl CodeSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<LinearCode> {
        match self.family.as_str() {
            "hamming" => {
                let m = self
                    .m
                    .ok_or_else(|| Error::Parameter("hamming spec needs field \"m\"".into()))?;
                LinearCode::hamming(m)
            }
            "reed_muller" => {
                let r = self
                    .r
                    .ok_or_else(|| Error::Parameter("reed_muller spec needs field \"r\"".into()))?;
                let m = self
                    .m
                    .ok_or_else(|| Error::Parameter("reed_muller spec needs field \"m\"".into()))?;
                LinearCode::reed_muller(r, m)
            }
            "explicit" => {
                let rows = self.generator.as_ref().ok_or_else(|| {
                    Error::Parameter("explicit spec needs field \"generator\"".into())
                })?;
                LinearCode::from_generator(None, rows)
            }
            other => Err(Error::Parameter(format!(
                "unknown code family {other:?}; expected hamming, reed_muller, or explicit"
            ))),
        }
    }
}
