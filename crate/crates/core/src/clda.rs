//! Context-driven selection among decoding lists: a first-order Markov model
//! over message states and a Viterbi-style dynamic program that picks the
//! most probable sentence from the per-position lists, with a full trace.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const STOCHASTIC_TOL: f64 = 1e-12;

/// A first-order Markov chain over `m` states: a prior row and an m-by-m
/// transition matrix, both validated to be stochastic within 1e-12.
#[derive(Clone, Debug)]
pub struct MarkovContext {
    prior: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl MarkovContext {
    pub fn new(prior: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = prior.len();
        if m == 0 {
            return Err(Error::Parameter("context needs at least one state".into()));
        }
        if rows.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                got: rows.len(),
            });
        }
        check_stochastic("prior", &prior)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::LengthMismatch {
                    expected: m,
                    got: row.len(),
                });
            }
            check_stochastic(&format!("transition row {i}"), row)?;
        }
        Ok(MarkovContext { prior, rows })
    }

    /// Uniform prior and uniform transitions.
    pub fn uniform(m: usize) -> Result<Self> {
        let p = vec![1.0 / m as f64; m];
        Self::new(p.clone(), vec![p; m])
    }

    /// Uniform prior, deterministic cycle i -> i + 1 mod m.
    pub fn cyclic(m: usize) -> Result<Self> {
        let mut rows = vec![vec![0.0; m]; m];
        for (i, row) in rows.iter_mut().enumerate() {
            row[(i + 1) % m] = 1.0;
        }
        Self::new(vec![1.0 / m as f64; m], rows)
    }

    /// A seeded random row-stochastic context (normalized uniform draws).
    pub fn random(m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Parameter("context needs at least one state".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw_row = |rng: &mut ChaCha8Rng| {
            let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / total).collect::<Vec<f64>>()
        };
        let prior = draw_row(&mut rng);
        let rows = (0..m).map(|_| draw_row(&mut rng)).collect();
        Self::new(prior, rows)
    }

    /// The three-state chain used by the built-in demo: prior (1/5, 3/5, 1/5)
    /// and transitions [[1/3, 2/3, 0], [2/9, 5/9, 2/9], [0, 2/3, 1/3]].
    pub fn three_state_demo() -> Self {
        Self::new(
            vec![0.2, 0.6, 0.2],
            vec![
                vec![1.0 / 3.0, 2.0 / 3.0, 0.0],
                vec![2.0 / 9.0, 5.0 / 9.0, 2.0 / 9.0],
                vec![0.0, 2.0 / 3.0, 1.0 / 3.0],
            ],
        )
        .expect("demo chain is stochastic")
    }

    pub fn m(&self) -> usize {
        self.prior.len()
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.rows[from][to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.rows[from]
    }

    /// Probability of a state sentence under the chain:
    /// prior(s_0) * prod_t P(s_{t-1} -> s_t).
    pub fn sentence_weight(&self, sentence: &[u64]) -> Result<f64> {
        self.check_states(sentence)?;
        let mut w = self.prior[sentence[0] as usize];
        for t in 1..sentence.len() {
            w *= self.rows[sentence[t - 1] as usize][sentence[t] as usize];
        }
        Ok(w)
    }

    /// Log-domain sentence weight; -inf for impossible sentences.
    pub fn log_sentence_weight(&self, sentence: &[u64]) -> Result<f64> {
        self.check_states(sentence)?;
        let mut w = ln(self.prior[sentence[0] as usize]);
        for t in 1..sentence.len() {
            w += ln(self.rows[sentence[t - 1] as usize][sentence[t] as usize]);
        }
        Ok(w)
    }

    fn check_states(&self, sentence: &[u64]) -> Result<()> {
        if sentence.is_empty() {
            return Err(Error::Parameter("sentence must be non-empty".into()));
        }
        let m = self.m() as u64;
        if let Some(&s) = sentence.iter().find(|&&s| s >= m) {
            return Err(Error::Parameter(format!(
                "state {s} out of range for {m} states"
            )));
        }
        Ok(())
    }
}

fn check_stochastic(what: &str, row: &[f64]) -> Result<()> {
    if let Some(&v) = row.iter().find(|&&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::Parameter(format!(
            "{what}: entry {v} outside [0, 1]"
        )));
    }
    let total: f64 = row.iter().sum();
    if (total - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::Parameter(format!(
            "{what}: entries sum to {total}, not 1"
        )));
    }
    Ok(())
}

fn ln(p: f64) -> f64 {
    if p == 0.0 {
        f64::NEG_INFINITY
    } else {
        p.ln()
    }
}

/// On-disk description of a Markov context. Transitions are sparse
/// `[from, to, probability]` triples; rows with no entry fall back to the
/// `default` fill (only "uniform" is defined). A missing prior is uniform.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextSpec {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(default)]
    pub prior: Option<Vec<f64>>,
    #[serde(default)]
    pub transitions: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub default: Option<String>,
}

impl ContextSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<MarkovContext> {
        let m = self.m;
        if m == 0 {
            return Err(Error::Parameter("context needs at least one state".into()));
        }
        match self.default.as_deref() {
            None | Some("uniform") => {}
            Some(other) => {
                return Err(Error::Parameter(format!(
                    "unknown default fill {other:?}; expected \"uniform\""
                )))
            }
        }
        let prior = self
            .prior
            .clone()
            .unwrap_or_else(|| vec![1.0 / m as f64; m]);
        let mut rows: Vec<Option<Vec<f64>>> = vec![None; m];
        for &(from, to, p) in &self.transitions {
            if from >= m || to >= m {
                return Err(Error::Parameter(format!(
                    "transition ({from}, {to}) out of range for {m} states"
                )));
            }
            rows[from].get_or_insert_with(|| vec![0.0; m])[to] = p;
        }
        let rows = rows
            .into_iter()
            .map(|row| row.unwrap_or_else(|| vec![1.0 / m as f64; m]))
            .collect();
        MarkovContext::new(prior, rows)
    }
}

/// Per-position candidate lists: `n` lists of equal size `L`, entries are
/// message states of the context.
#[derive(Clone, Debug)]
pub struct SentenceLists {
    lists: Vec<Vec<u64>>,
}

impl SentenceLists {
    pub fn new(lists: Vec<Vec<u64>>) -> Result<Self> {
        if lists.is_empty() {
            return Err(Error::Parameter("need at least one list".into()));
        }
        let l = lists[0].len();
        if l == 0 {
            return Err(Error::Parameter("lists must be non-empty".into()));
        }
        if let Some(bad) = lists.iter().find(|list| list.len() != l) {
            return Err(Error::LengthMismatch {
                expected: l,
                got: bad.len(),
            });
        }
        Ok(SentenceLists { lists })
    }

    pub fn positions(&self) -> usize {
        self.lists.len()
    }

    pub fn list_size(&self) -> usize {
        self.lists[0].len()
    }

    pub fn list(&self, position: usize) -> &[u64] {
        &self.lists[position]
    }

    pub fn lists(&self) -> &[Vec<u64>] {
        &self.lists
    }

    fn check_states(&self, m: usize) -> Result<()> {
        for list in &self.lists {
            if let Some(&s) = list.iter().find(|&&s| s >= m as u64) {
                return Err(Error::Parameter(format!(
                    "list entry {s} out of range for {m} states"
                )));
            }
        }
        Ok(())
    }
}

/// How ties between equally weighted paths are resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TieBreak {
    /// Keep the smallest row index (deterministic default).
    FirstIndex,
    /// Choose uniformly among the tied rows with a seeded generator.
    Seeded(u64),
}

/// The dynamic-programming trace: path weights T (log domain), backpointers
/// D, the winning row path R, and the selected sentence F.
#[derive(Clone, Debug, Serialize)]
pub struct SelectionTrace {
    /// T\[row\]\[position\]: best log-weight of any partial sentence ending at
    /// this list entry. Impossible paths carry -inf (null in JSON).
    #[serde(rename = "T")]
    pub log_weights: Vec<Vec<f64>>,
    /// D\[row\]\[position\]: predecessor row; position 0 is unused and kept 0.
    #[serde(rename = "D")]
    pub backpointers: Vec<Vec<usize>>,
    /// R: winning row per position, reconstructed from D.
    #[serde(rename = "R")]
    pub path: Vec<usize>,
    /// F: the selected state sentence, list\[position\]\[R\[position\]\].
    #[serde(rename = "F")]
    pub sentence: Vec<u64>,
}

impl SelectionTrace {
    /// T in linear space, exp of each entry.
    pub fn linear_weights(&self) -> Vec<Vec<f64>> {
        self.log_weights
            .iter()
            .map(|row| row.iter().map(|&v| v.exp()).collect())
            .collect()
    }

    /// The log-weight of the winning path, max over the last column.
    pub fn best_log_weight(&self) -> f64 {
        let last = self.log_weights[0].len() - 1;
        self.log_weights
            .iter()
            .map(|row| row[last])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Runs the list-selection dynamic program over an L-by-N trellis.
///
/// Column 0 holds the priors of the first list's entries; afterwards
/// T\[i\]\[j\] = max_k T\[k\]\[j-1\] + ln P(list\[j-1\]\[k\] -> list\[j\]\[i\]).
/// The sentence is read back through the backpointers from the best final
/// entry. Runs in O(L^2 N) time.
pub fn select(ctx: &MarkovContext, lists: &SentenceLists, tie: TieBreak) -> Result<SelectionTrace> {
    lists.check_states(ctx.m())?;
    let n = lists.positions();
    let l = lists.list_size();
    let mut rng = match tie {
        TieBreak::FirstIndex => None,
        TieBreak::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    let mut t = vec![vec![f64::NEG_INFINITY; n]; l];
    let mut d = vec![vec![0usize; n]; l];
    for (i, row) in t.iter_mut().enumerate() {
        row[0] = ln(ctx.prior[lists.list(0)[i] as usize]);
    }
    for j in 1..n {
        for i in 0..l {
            let to = lists.list(j)[i] as usize;
            let mut best = f64::NEG_INFINITY;
            let mut best_k = 0usize;
            let mut tied = 1u64;
            for (k, (trow, &from)) in t.iter().zip(lists.list(j - 1)).enumerate() {
                let w = trow[j - 1] + ln(ctx.rows[from as usize][to]);
                if w > best {
                    best = w;
                    best_k = k;
                    tied = 1;
                } else if w == best && w > f64::NEG_INFINITY {
                    // Reservoir-style uniform choice among tied predecessors.
                    if let Some(rng) = rng.as_mut() {
                        tied += 1;
                        if rng.gen_range(0..tied) == 0 {
                            best_k = k;
                        }
                    }
                }
            }
            t[i][j] = best;
            d[i][j] = best_k;
        }
    }

    let last = n - 1;
    let mut best = f64::NEG_INFINITY;
    let mut best_row = 0usize;
    let mut tied = 1u64;
    for (i, row) in t.iter().enumerate() {
        let w = row[last];
        if w > best {
            best = w;
            best_row = i;
            tied = 1;
        } else if w == best && i > 0 {
            if let Some(rng) = rng.as_mut() {
                tied += 1;
                if rng.gen_range(0..tied) == 0 {
                    best_row = i;
                }
            }
        }
    }

    let mut path = vec![0usize; n];
    path[last] = best_row;
    for j in (1..n).rev() {
        path[j - 1] = d[path[j]][j];
    }
    let sentence = path
        .iter()
        .enumerate()
        .map(|(j, &r)| lists.list(j)[r])
        .collect();
    Ok(SelectionTrace {
        log_weights: t,
        backpointers: d,
        path,
        sentence,
    })
}

/// Budget for the brute-force reference: at most 10^7 candidate sentences.
pub const EXHAUSTIVE_SELECT_MAX: f64 = 1e7;

/// Brute-force argmax of the sentence weight over every tuple in the list
/// product; ties keep the lexicographically first row path. The quadratic
/// reference for [`select`].
pub fn exhaustive_select(ctx: &MarkovContext, lists: &SentenceLists) -> Result<Vec<u64>> {
    lists.check_states(ctx.m())?;
    let n = lists.positions();
    let l = lists.list_size();
    if (l as f64).powi(n as i32) > EXHAUSTIVE_SELECT_MAX {
        return Err(Error::Capacity(format!(
            "exhaustive selection over {l}^{n} sentences exceeds {EXHAUSTIVE_SELECT_MAX:e}"
        )));
    }
    let mut rows = vec![0usize; n];
    let mut best_rows: Option<Vec<usize>> = None;
    let mut best = f64::NEG_INFINITY;
    loop {
        let mut w = ln(ctx.prior[lists.list(0)[rows[0]] as usize]);
        for j in 1..n {
            let from = lists.list(j - 1)[rows[j - 1]] as usize;
            let to = lists.list(j)[rows[j]] as usize;
            w += ln(ctx.rows[from][to]);
            if w == f64::NEG_INFINITY {
                break;
            }
        }
        if w > best {
            best = w;
            best_rows = Some(rows.clone());
        }
        // Odometer step in lexicographic order.
        let mut j = n;
        loop {
            if j == 0 {
                let rows = best_rows.ok_or_else(|| {
                    Error::Inconsistent("every candidate sentence has zero weight".into())
                })?;
                return Ok(rows
                    .iter()
                    .enumerate()
                    .map(|(pos, &r)| lists.list(pos)[r])
                    .collect());
            }
            j -= 1;
            rows[j] += 1;
            if rows[j] < l {
                break;
            }
            rows[j] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_lists(n: usize) -> SentenceLists {
        SentenceLists::new(vec![vec![0, 1, 2]; n]).unwrap()
    }

    #[test]
    fn three_state_demo_trace_is_exact() {
        let ctx = MarkovContext::three_state_demo();
        let trace = select(&ctx, &demo_lists(3), TieBreak::FirstIndex).unwrap();
        let lin = trace.linear_weights();
        let expected = [
            [0.2, 2.0 / 15.0, 2.0 / 27.0],
            [0.6, 1.0 / 3.0, 5.0 / 27.0],
            [0.2, 2.0 / 15.0, 2.0 / 27.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                let rel = (lin[i][j] - expected[i][j]).abs() / expected[i][j];
                assert!(
                    rel < 1e-12,
                    "T[{i}][{j}] = {}, want {}",
                    lin[i][j],
                    expected[i][j]
                );
            }
        }
        for i in 0..3 {
            assert_eq!(trace.backpointers[i][0], 0);
            assert_eq!(trace.backpointers[i][1], 1);
            assert_eq!(trace.backpointers[i][2], 1);
        }
        assert_eq!(trace.path, vec![1, 1, 1]);
        assert_eq!(trace.sentence, vec![1, 1, 1]);
        let w = ctx.sentence_weight(&trace.sentence).unwrap();
        assert!((w - 5.0 / 27.0).abs() < 1e-15);
        assert!((trace.best_log_weight() - (5.0f64 / 27.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn sentence_weight_examples() {
        let ctx = MarkovContext::three_state_demo();
        assert!((ctx.sentence_weight(&[1, 1, 1]).unwrap() - 5.0 / 27.0).abs() < 1e-15);
        assert!((ctx.sentence_weight(&[1]).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(ctx.sentence_weight(&[0, 2]).unwrap(), 0.0);
        assert_eq!(ctx.log_sentence_weight(&[0, 2]).unwrap(), f64::NEG_INFINITY);
        assert!(ctx.sentence_weight(&[3]).is_err());
        assert!(ctx.sentence_weight(&[]).is_err());
    }

    #[test]
    fn single_position_picks_argmax_prior() {
        let ctx = MarkovContext::three_state_demo();
        let trace = select(&ctx, &demo_lists(1), TieBreak::FirstIndex).unwrap();
        assert_eq!(trace.sentence, vec![1]);
        assert_eq!(trace.path, vec![1]);
    }

    #[test]
    fn context_validation_rejects_bad_rows() {
        assert!(MarkovContext::new(vec![0.5, 0.5], vec![vec![0.6, 0.5], vec![0.5, 0.5]]).is_err());
        assert!(MarkovContext::new(vec![0.5, 0.5], vec![vec![1.1, -0.1], vec![0.5, 0.5]]).is_err());
        assert!(MarkovContext::new(vec![0.7, 0.5], vec![vec![0.5, 0.5], vec![0.5, 0.5]]).is_err());
        assert!(MarkovContext::new(vec![], vec![]).is_err());
        assert!(MarkovContext::uniform(4).is_ok());
    }

    #[test]
    fn cyclic_context_shifts_by_one() {
        let ctx = MarkovContext::cyclic(4).unwrap();
        assert_eq!(ctx.transition(0, 1), 1.0);
        assert_eq!(ctx.transition(3, 0), 1.0);
        assert_eq!(ctx.transition(1, 3), 0.0);
        let w = ctx.sentence_weight(&[2, 3, 0, 1]).unwrap();
        assert!((w - 0.25).abs() < 1e-15);
    }

    #[test]
    fn random_context_is_seed_deterministic() {
        let a = MarkovContext::random(5, 42).unwrap();
        let b = MarkovContext::random(5, 42).unwrap();
        let c = MarkovContext::random(5, 43).unwrap();
        assert_eq!(a.prior(), b.prior());
        assert_ne!(a.prior(), c.prior());
    }

    #[test]
    fn context_spec_builds_with_defaults() {
        let spec = ContextSpec::from_json(
            r#"{"M": 3, "transitions": [[0, 0, 0.5], [0, 1, 0.5]], "default": "uniform"}"#,
        )
        .unwrap();
        let ctx = spec.build().unwrap();
        assert_eq!(ctx.transition(0, 0), 0.5);
        assert_eq!(ctx.transition(0, 2), 0.0);
        // Rows 1 and 2 were absent: uniform fill.
        assert!((ctx.transition(1, 0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((ctx.prior()[0] - 1.0 / 3.0).abs() < 1e-15);
        // A partially specified row that does not sum to 1 is rejected.
        let bad = ContextSpec::from_json(r#"{"M": 2, "transitions": [[0, 0, 0.4]]}"#).unwrap();
        assert!(bad.build().is_err());
    }

    #[test]
    fn select_matches_exhaustive_on_random_instances() {
        for seed in 0..40u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let m = rng.gen_range(2..=8usize);
            let l = rng.gen_range(1..=4usize);
            let n = rng.gen_range(1..=5usize);
            let ctx = MarkovContext::random(m, seed).unwrap();
            let lists = SentenceLists::new(
                (0..n)
                    .map(|_| (0..l).map(|_| rng.gen_range(0..m as u64)).collect())
                    .collect(),
            )
            .unwrap();
            let trace = select(&ctx, &lists, TieBreak::FirstIndex).unwrap();
            let brute = exhaustive_select(&ctx, &lists).unwrap();
            let w_dp = ctx.log_sentence_weight(&trace.sentence).unwrap();
            let w_brute = ctx.log_sentence_weight(&brute).unwrap();
            assert!(
                (w_dp - w_brute).abs() < 1e-9,
                "seed {seed}: dp {w_dp} vs brute {w_brute}"
            );
            assert!((trace.best_log_weight() - w_dp).abs() < 1e-9);
        }
    }

    #[test]
    fn dp_weight_equals_sentence_weight_of_result() {
        // Zero-probability transitions force -inf paths without breaking
        // the traceback.
        let ctx = MarkovContext::three_state_demo();
        let lists = SentenceLists::new(vec![vec![0, 2], vec![0, 2], vec![0, 2]]).unwrap();
        let trace = select(&ctx, &lists, TieBreak::FirstIndex).unwrap();
        let w = ctx.log_sentence_weight(&trace.sentence).unwrap();
        assert!((trace.best_log_weight() - w).abs() < 1e-12);
        let brute = exhaustive_select(&ctx, &lists).unwrap();
        assert!((ctx.log_sentence_weight(&brute).unwrap() - w).abs() < 1e-12);
    }

    #[test]
    fn trellis_columns_have_prefix_property() {
        // T and D for the first n columns do not depend on later lists.
        let ctx = MarkovContext::three_state_demo();
        let short = select(&ctx, &demo_lists(3), TieBreak::FirstIndex).unwrap();
        let long = select(&ctx, &demo_lists(5), TieBreak::FirstIndex).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(short.log_weights[i][j], long.log_weights[i][j]);
                assert_eq!(short.backpointers[i][j], long.backpointers[i][j]);
            }
        }
    }

    #[test]
    fn seeded_tie_break_is_reproducible() {
        let ctx = MarkovContext::uniform(3).unwrap();
        let lists = demo_lists(4);
        let a = select(&ctx, &lists, TieBreak::Seeded(7)).unwrap();
        let b = select(&ctx, &lists, TieBreak::Seeded(7)).unwrap();
        assert_eq!(a.sentence, b.sentence);
        assert_eq!(a.path, b.path);
        // First-index ties always pick row 0 under a fully uniform context.
        let first = select(&ctx, &lists, TieBreak::FirstIndex).unwrap();
        assert_eq!(first.path, vec![0; 4]);
    }

    #[test]
    fn exhaustive_budget_is_enforced() {
        let ctx = MarkovContext::uniform(2).unwrap();
        let lists = SentenceLists::new(vec![vec![0, 1]; 24]).unwrap();
        assert!(matches!(
            exhaustive_select(&ctx, &lists),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn rejects_out_of_range_list_entries() {
        let ctx = MarkovContext::uniform(2).unwrap();
        let lists = SentenceLists::new(vec![vec![0, 2]]).unwrap();
        assert!(select(&ctx, &lists, TieBreak::FirstIndex).is_err());
        assert!(exhaustive_select(&ctx, &lists).is_err());
    }
}
