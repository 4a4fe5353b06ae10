//! Threshold-gated CSI sensing with joint communication and compute allocation.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod exec;
pub mod numerics;
pub mod seeds;
pub mod sensing_model;
pub mod signal_sim;
pub mod comm_model;
pub mod resource_alloc;
pub mod threshold_opt;
pub mod optimizer;
