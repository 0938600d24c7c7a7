//! Coded diffraction measurements: mask distributions, sampled masks, and
//! the lifted measurement maps.

mod dft;
mod distribution;
mod frame;
mod masks;

pub use dft::{crt_relabeling, dft_vector, dft_vector_2d, CrtRelabeling};
pub use distribution::{MaskAtom, MaskDistribution, OddMoment};
pub use frame::{measure, MeasurementFrame, MeasurementVector, TruncatedApplication};
pub(crate) use frame::check_rank_at_most_two;
pub use masks::{sample_masks, seeded_rng, MaskSet};
pub(crate) use masks::sample_masks_with;
