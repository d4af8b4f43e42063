//! Homeomorphism machinery on finite data.
//!
//! [`shear`] transports one length model onto another along a pair of
//! matched nests by composing vertical shears. [`shuffle`] rearranges the
//! blocks of a Cantor set so that an arbitrary compact hair set acquires the
//! decay and two-sided limit properties of a straight hairy Cantor set.

pub mod shear;
pub mod shuffle;

pub use shear::{
    compose_and_bound, injectivity_products, make_eta, shear_column, transfer_length, unshear_column,
    BoundReport, ComposedVerticalMap, EtaFunction, StepReport, VerticalShear,
};
pub use shuffle::{shuffle_run, shuffle_stage, ShuffleCertificate, ShuffleRun, ShuffleStage};
