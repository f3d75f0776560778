//! Time-stampless adaptive nonuniform sampling (TANS) for discrete-time
//! stochastic signals.
//!
//! The next sampling increment is a deterministic function of the `m` most
//! recent samples, so a decoder that knows the sampling function and the
//! initialization times recovers every sampling time from the sample values
//! alone. This crate holds the allocation-light numerical core:
//!
//! * [`signals`]: seeded AR(1), Markov-switching AR(1) and binary HMM sources.
//! * [`prediction`]: autocorrelation models/estimators and the generalized
//!   linear predictor over nonuniformly spaced past samples.
//! * [`greedy`]: closed-form AR(1) greedy increments, the maximum-likelihood
//!   regime estimator, the Markovian greedy sampler and its rate-distortion
//!   bounds.
//! * [`dp`]: value iteration for the binary online source-coding problem and
//!   the one-step approximate-DP sampler.
//! * [`reconstruct`]: GLP, causal and non-causal line-connecting
//!   reconstruction plus distortion accounting.
//! * [`sampling`]: sampling functions, encoder-side runs and decoder-side
//!   replay of sampling times.
//!
//! The crate is `no_std` (with `alloc`); file formats, the experiment harness
//! and the CLI live in the `tans` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod dp;
mod error;
pub mod greedy;
mod linalg;
pub mod num;
pub mod prediction;
pub mod reconstruct;
pub mod rng;
pub mod sampling;
pub mod signals;

pub use error::{Result, TansError};
pub use prediction::SamplingState;
pub use rng::SignalRng;
