//! Forward-only convolutional inference.
//!
//! The architecture is read from the weight file rather than hard-coded:
//! any chain of conv / ReLU / max-pool / LRN / fully-connected layers runs.
//! Tensors are `f32`, channel-major; dot products accumulate in `f64`.

mod descriptor;
mod forward;
mod ops;
mod preprocess;
mod spec;
mod tensor;
mod weights;

pub use descriptor::{baseline_descriptor, BASELINE_DIM, BASELINE_ID};
pub use forward::{activation_maps, forward_to_layer, write_pgm, ActivationGrid};
pub use ops::{conv2d, fully_connected, lrn, max_pool, relu};
pub use preprocess::preprocess;
pub use spec::{ConvLayer, FcLayer, Layer, LayerKind, LrnLayer, NetworkSpec, PoolLayer};
pub use tensor::Tensor;
pub use weights::{parse_weights, read_weights, serialize_weights, WEIGHTS_MAGIC};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CnnError {
    #[error("bad magic: expected CNW1")]
    BadMagic,
    #[error("unsupported weight file version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated weight file while reading {0}")]
    Truncated(String),
    #[error("{0} trailing bytes after the last layer")]
    TrailingBytes(usize),
    #[error("unknown layer type tag {0}")]
    UnknownTag(u8),
    #[error("layer name is not valid UTF-8")]
    InvalidName,
    #[error("duplicate layer name {0:?}")]
    DuplicateLayer(String),
    #[error("dim mismatch: {0}")]
    DimMismatch(String),
    #[error("invalid layer {layer:?}: {reason}")]
    InvalidLayer { layer: String, reason: String },
    #[error("kernel {kernel}x{kernel_w} larger than padded input {height}x{width}")]
    KernelTooLarge {
        kernel: usize,
        kernel_w: usize,
        height: usize,
        width: usize,
    },
    #[error("unknown layer {0:?}")]
    UnknownLayer(String),
    #[error("layer {0:?} is not a convolution")]
    NotConvLayer(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CnnError>;

/// A per-image or per-tract descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f32>,
    pub extractor_id: String,
    pub layer_name: String,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
