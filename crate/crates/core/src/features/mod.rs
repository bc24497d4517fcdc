//! Per-tract features: tile aggregation, POI matrices, feature stores, and
//! the aligned design matrix handed to the model.

mod design;
mod extract;
mod poi;
mod store;

pub use design::{build_design_matrix, DesignMatrix, Target};
pub use extract::{extract_store, Extraction, Extractor};
pub use poi::{poi_feature_matrix, PoiMatrix, PoiMode, PoiTally};
pub use store::{
    is_store_csv, read_feature_store, read_store_binary, read_store_csv, read_table_csv, write_feature_store,
    write_store_binary, write_store_csv, write_table_csv, FeatureStore, StoreRecord, STORE_MAGIC,
};

use std::collections::BTreeMap;
use std::path::PathBuf;

use thiserror::Error;

use crate::cnn::FeatureVector;

#[derive(Debug, Error)]
pub enum FeaturesError {
    #[error("no vectors to aggregate")]
    Empty,
    #[error("vector length {found} does not match {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("bad magic: expected FVS1")]
    BadMagic,
    #[error("truncated feature store while reading {0}")]
    Truncated(String),
    #[error("{0} trailing bytes after the last record")]
    TrailingBytes(usize),
    #[error("tract id {0:?} is too long for the store format")]
    IdTooLong(String),
    #[error("duplicate tract id {0:?}")]
    DuplicateId(String),
    #[error("malformed feature CSV at line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("category vocabulary is empty")]
    EmptyVocabulary,
    #[error("tract {0:?} has no land area and degenerate geometry")]
    MissingArea(String),
    #[error("non-finite feature value for tract {0:?}")]
    NonFinite(String),
    #[error("only {0} usable rows; need at least 2")]
    TooFewRows(usize),
    #[error("{0}")]
    Tile(#[source] Box<crate::acquisition::AcquisitionError>),
    #[error("network: {0}")]
    Cnn(#[from] crate::cnn::CnnError),
    #[error("geometry: {0}")]
    Geo(#[from] crate::geo::GeoError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, FeaturesError>;

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> FeaturesError + '_ {
    move |source| FeaturesError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Feature rows keyed by tract id, with named columns. Both feature stores
/// and POI matrices reduce to this before the design matrix is built.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureTable {
    pub columns: Vec<String>,
    pub rows: BTreeMap<String, Vec<f64>>,
}

/// Elementwise mean of equal-length vectors.
///
/// Each coordinate is summed in `f64` over its values in ascending order, so
/// the result does not depend on the order of `vectors`.
pub fn aggregate_tract(vectors: &[FeatureVector]) -> Result<FeatureVector> {
    let first = vectors.first().ok_or(FeaturesError::Empty)?;
    let dim = first.len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
        return Err(FeaturesError::LengthMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    let n = vectors.len() as f64;
    let mut column = Vec::with_capacity(vectors.len());
    let values = (0..dim)
        .map(|j| {
            column.clear();
            column.extend(vectors.iter().map(|v| v.values[j]));
            column.sort_by(f32::total_cmp);
            (column.iter().map(|&x| x as f64).sum::<f64>() / n) as f32
        })
        .collect();
    Ok(FeatureVector {
        values,
        extractor_id: first.extractor_id.clone(),
        layer_name: first.layer_name.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fv(values: Vec<f32>) -> FeatureVector {
        FeatureVector {
            values,
            extractor_id: "t".into(),
            layer_name: "l".into(),
        }
    }

    #[test]
    fn mean_of_two() {
        let m = aggregate_tract(&[fv(vec![1., 2.]), fv(vec![3., 4.])]).unwrap();
        assert_eq!(m.values, vec![2., 3.]);
        assert_eq!(m.extractor_id, "t");
    }

    #[test]
    fn single_is_identity() {
        let v = fv(vec![0.1, -7.25, 3e9]);
        assert_eq!(aggregate_tract(std::slice::from_ref(&v)).unwrap(), v);
    }

    #[test]
    fn errors() {
        assert!(matches!(aggregate_tract(&[]), Err(FeaturesError::Empty)));
        assert!(matches!(
            aggregate_tract(&[fv(vec![1.]), fv(vec![1., 2.])]),
            Err(FeaturesError::LengthMismatch { expected: 1, found: 2 })
        ));
    }

    fn vectors() -> impl Strategy<Value = Vec<Vec<f32>>> {
        (1usize..6).prop_flat_map(|d| proptest::collection::vec(proptest::collection::vec(-1e6f32..1e6, d), 1..12))
    }

    proptest! {
        #[test]
        fn permutation_invariant(vs in vectors(), seed in any::<u64>()) {
            let a: Vec<_> = vs.iter().cloned().map(fv).collect();
            let perm = crate::rng::permutation(a.len(), seed);
            let b: Vec<_> = perm.iter().map(|&i| a[i].clone()).collect();
            prop_assert_eq!(aggregate_tract(&a).unwrap().values, aggregate_tract(&b).unwrap().values);
        }

        #[test]
        fn scaling_equivariant(vs in vectors(), c in -8i32..8) {
            // power-of-two scale keeps every step exact
            let s = 2f32.powi(c);
            let a: Vec<_> = vs.iter().cloned().map(fv).collect();
            let b: Vec<_> = vs.iter().map(|v| fv(v.iter().map(|x| x * s).collect())).collect();
            let ma = aggregate_tract(&a).unwrap().values;
            let mb = aggregate_tract(&b).unwrap().values;
            for (x, y) in ma.iter().zip(&mb) {
                prop_assert!((x * s - y).abs() <= 1e-6 * y.abs().max(1.0));
            }
        }
    }
}
