//! Built-environment features from satellite tiles and places-of-interest,
//! regularized linear models of census-tract outcomes, and the evaluation
//! artifacts that go with them.
//!
//! The crate is organised the way the pipeline runs:
//!
//! * [`geo`]: tract boundaries, Web-Mercator math, tile and POI-probe plans.
//! * [`acquisition`]: static-map tile and nearby-search clients with an
//!   on-disk cache and an offline fixture mode.
//! * [`cnn`]: a forward-only convolutional inference engine, its `CNW1`
//!   weight format, and a weight-free baseline descriptor.
//! * [`features`]: per-tract aggregation, POI matrices, feature stores.
//! * [`model`]: elastic net by coordinate descent, paths, k-fold CV.
//! * [`eval`]: metrics, pooled/per-region runs, scatter and choropleth output.
//! * [`synth`]: a seeded synthetic world with a planted signal.
//!
//! Data-parallel loops go through [`par`], which falls back to plain
//! iterators when the `parallel` feature is disabled. Output is identical
//! either way.

// `!(x > 0.0)` style checks are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acquisition;
pub mod cnn;
pub mod eval;
pub mod features;
pub mod geo;
pub mod model;
pub mod par;
pub mod rng;
pub mod synth;

pub use acquisition::{EndpointConfig, PoiRecord, RasterImage};
pub use cnn::{FeatureVector, NetworkSpec, Tensor};
pub use features::{DesignMatrix, FeatureStore, FeatureTable};
pub use geo::{LatLon, TileSpec, TractRecord};
pub use model::{ElasticNetConfig, ElasticNetFit};
