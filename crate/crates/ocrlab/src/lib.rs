//! Desk-scale OCR research laboratory.
//!
//! The crate trains small CNN-LSTM line recognizers with CTC loss on a
//! deterministic synthetic text-line corpus, runs 5-fold cross-validation,
//! decodes greedily, combines the fold outputs by ISRI-style sequence
//! voting, and evaluates with character error rates and confusion tables.
//! Every numerical piece is verified against a brute-force oracle or
//! central finite differences.
//!
//! Start with the `examples/` directory: each example is a runnable tour of
//! one capability (corpus generation, CTC, training, voting, evaluation,
//! serialization, timing). The `ocrlab` binary exposes the same pipeline as
//! subcommands.

pub mod codec;
pub mod ctc;
pub mod voting;
pub mod error;
pub mod eval;
pub mod nn;
pub mod probs;
pub mod synth;
pub mod tensor;

pub use codec::{Codec, LabelSeq};
pub use ctc::{ctc_brute_force, ctc_greedy_decode, ctc_loss, min_path_length, CtcVariant};
pub use error::{Error, Result};
pub use probs::ProbMatrix;
pub use tensor::Tensor;
