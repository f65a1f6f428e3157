//! Analysis and simulation of ARQ error control over binary linear codes:
//! exact weight distributions, undetected-error and retransmission rates,
//! list decoding around accepted words, and Markov-context selection of
//! whole sentences, with deterministic Monte Carlo counterparts.

pub mod analysis;
pub mod bits;
pub mod channel;
pub mod clda;
pub mod codes;
pub mod error;
pub mod list_decoding;
pub mod performance;
pub mod weights;

pub use analysis::{format_sig10, list_correctable_probability, sweep, ArqAnalysis};
pub use bits::{hamming_distance, BitWord};
pub use channel::{
    arq_transmit, arq_transmit_with_cap, arq_trial_range, monte_carlo_arq, sample_sentence,
    ArqOutcome, ArqSimReport, ArqTally, BscChannel, ARQ_ATTEMPT_CAP,
};
pub use clda::{
    exhaustive_select, select, ContextSpec, MarkovContext, SelectionTrace, SentenceLists, TieBreak,
};
pub use codes::{CodeSpec, LinearCode, MessageSolver};
pub use error::{Error, Result};
pub use list_decoding::{
    ball, decode_list, decode_list_with_radius, list_stabilizer, same_list_set, BallMember,
    DecodeList,
};
pub use performance::{
    average_selection_probability, max_sentence_length, retransmission_probability,
    selection_lower_bound, simulate_clda, AverageSelectionReport, BoundReport, CldaSimReport,
};
pub use weights::{
    macwilliams_transform, minimum_distance, weight_distribution_exhaustive, WeightDistribution,
    ENUMERATION_MAX_K,
};
