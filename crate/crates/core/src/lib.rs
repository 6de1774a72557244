//! Core models for a heterogeneous cloud small-cell network (HCSNet): network
//! layout, radio channel, CoMP clustering, user mobility, pool-hosted
//! handover and the metrics used to evaluate them.
//!
//! The numeric kernels are generic over [`Real`] (`f32` or `f64`); the
//! `*64` and `*32` aliases below fix the scalar for callers.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod clustering;
pub mod error;
pub mod handover;
pub mod metrics;
pub mod mobility;
pub mod rng;
pub mod scalar;
pub mod topology;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ChannelModel64 = channel::ChannelModel<f64>;
pub type ChannelModel32 = channel::ChannelModel<f32>;
pub type LinkBudget64 = channel::LinkBudget<f64>;
pub type SimilarityMatrix64 = clustering::SimilarityMatrix<f64>;
pub type SimilarityMatrix32 = clustering::SimilarityMatrix<f32>;
pub type ApState64 = clustering::ApState<f64>;
pub type ApState32 = clustering::ApState<f32>;
pub type SquareMatrix64 = clustering::SquareMatrix<f64>;
pub type ApbcOutcome64 = clustering::ApbcOutcome<f64>;
