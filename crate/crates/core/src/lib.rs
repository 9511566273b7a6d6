//! Zone-modular neural-network prediction of sand fraction from seismic
//! attributes, guided by well tops.
//!
//! The pipeline runs [`ingest`] (well logs and attribute volumes onto a
//! common time grid), [`preprocess`] (zonation and normalization), [`nn`]
//! and [`mann`] (per-zone perceptrons trained with scaled conjugate
//! gradient), [`metrics`], and [`volume`] (volumetric prediction and
//! smoothing). [`synth`] builds a synthetic field with a known answer.

pub mod acceptance;
pub mod error;
pub mod ingest;
pub mod mann;
pub mod metrics;
pub mod nn;
pub mod preprocess;
pub mod synth;
pub mod volume;

pub use error::{Error, Result};
pub use ingest::{
    AttributeVolume, Checkshot, RawWellLog, VolumeGeometry, WellLocation, WellLog, WellTops,
    N_ATTRIBUTES,
};
pub use mann::{BlindReport, HiddenSpec, MannModel, ScopeMetrics, SingleAnn, ZoneModel};
pub use nn::{Batch, MlpModel, StopReason, TrainConfig, TrainTrace};
pub use preprocess::{MinMaxStats, NormalizedSet, Well, ZScoreStats, Zone, ZonedDataset};
pub use synth::{SynthConfig, SynthField};
pub use volume::{Grid2, HorizonGrid, SandFractionVolume, Section};
