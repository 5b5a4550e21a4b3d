//! Graph sequence models at desk scale.
//!
//! A graph is turned into token sequences ([`tokenize`], [`hac`]), the tokens
//! are vectorized by a small message-passing encoder ([`local`]), and the
//! resulting sequences are mixed by linear state-space layers, softmax
//! attention or a hybrid of both ([`seq`]). Alongside the pipeline live the
//! exact constructions used to reason about these models: per-color counting
//! with a width-`C` recurrence, HiPPO sensitivity profiles, motif counting via
//! local encodings and an `O(k)`-state streaming connectivity automaton
//! ([`stream`]).
//!
//! Every stochastic routine takes an explicit `u64` seed and uses
//! [`rand_chacha::ChaCha8Rng`], so results are reproducible across platforms.

pub mod error;
pub mod graph;
pub mod hac;
pub mod local;
pub mod pipeline;
pub mod seq;
pub mod stream;
pub mod tokenize;

pub use error::{Error, Result};
pub use graph::Graph;

pub(crate) fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
