//! Hand-built stratifications, crossing indices, block recursion, and the
//! relative-length machinery.

pub mod blocks;
pub mod length;
pub mod stratification;
pub mod stratum;

pub use blocks::{alpha_at, assign_stratum, block_recursion, crossing_indices, Block, BlockStructure};
pub use length::{
    descent_residual, diameter_vs_relative_length, membership_segments, relative_length,
};
pub use stratification::{for_function, Stratification};
pub use stratum::{RegionForm, Stratum};
