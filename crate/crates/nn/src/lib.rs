//! Minimal dense-network math for actor-critic learners.
//!
//! Everything runs on row-major `f64` matrices. Networks are plain values:
//! cloning one gives an independent copy, and no operation touches global
//! state. Randomness always flows through an explicit [`SeededRng`].

mod adam;
mod checkpoint;
mod error;
mod matrix;
mod net;
mod noise;
mod polyak;
mod rng;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{decode_net, encode_net, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use error::{NnError, Result};
pub use matrix::Matrix2D;
pub use net::{DenseNet, ForwardCache, HiddenActivation, NetGrads, OutputActivation};
pub use noise::{clipped_gaussian, gumbel_softmax, softmax, softmax_backward, GUMBEL_U_CLAMP};
pub use polyak::soft_update;
pub use rng::SeededRng;
