//! Spiking neural coding network: predictive-coding spiking networks trained
//! online with spike-triggered local representation alignment, plus
//! feedforward spiking baselines and the experiment harness around them.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod checkpoint;
pub mod cli;
pub mod encode;
pub mod error;
pub mod metrics;
pub mod neuron;
pub mod spncn;
pub mod streams;

pub use error::{Error, Result};

