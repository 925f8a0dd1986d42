//! Single-image dehazing built on a per-pixel airlight coefficient map.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only numerics:
//! image containers, windowed filters, the airlight-coefficient dehazing
//! pipeline, a dark channel prior baseline and a set of no-reference
//! haze-removal metrics. File IO and the command line live in `dehaze-cli`.
//!
//! All intensities are `f64` in `[0, 1]`.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod math;

pub mod dcp;
pub mod dehaze;
pub mod filter;
pub mod image;
pub mod metrics;

pub use dcp::{dark_channel, dcp_dehaze, dcp_transmission, estimate_airlight_dcp, Airlight, DcpParams};
pub use dehaze::{
    dehaze_pipeline, estimate_gray_offset, estimate_k_map, estimate_transmission, haze_intensity,
    neglected_term_score, raw_transmission, recover_radiance, synthesize_haze, transmission_normalizer, DehazeParams,
    DehazeResult, Field, GrayOffset, HazeSynthesisParams, TransmissionWindow,
};
pub use error::{Error, Result};
pub use filter::{box_mean_filter, channel_mean, guided_filter, min_channel, min_filter, FilterParams};
pub use image::{GrayMap, RgbImage};
pub use metrics::{assess, MetricParams, MetricReport};
