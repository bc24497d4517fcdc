use std::collections::BTreeMap;
use std::path::Path;

use super::{io_err, FeatureTable, FeaturesError, Result};
use crate::cnn::FeatureVector;

pub const STORE_MAGIC: &[u8; 4] = b"FVS1";

#[derive(Clone, Debug, PartialEq)]
pub struct StoreRecord {
    pub tile_count: u32,
    pub values: Vec<f32>,
}

/// Per-tract mean vectors from one extractor. Records are kept sorted by
/// tract id, which is also the on-disk order.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureStore {
    pub extractor_id: String,
    pub dim: usize,
    pub records: BTreeMap<String, StoreRecord>,
}

impl FeatureStore {
    pub fn new(extractor_id: impl Into<String>, dim: usize) -> Self {
        FeatureStore {
            extractor_id: extractor_id.into(),
            dim,
            records: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, tract_id: impl Into<String>, vector: FeatureVector, tile_count: u32) -> Result<()> {
        if vector.len() != self.dim {
            return Err(FeaturesError::LengthMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        let id = tract_id.into();
        if self.records.contains_key(&id) {
            return Err(FeaturesError::DuplicateId(id));
        }
        self.records.insert(
            id,
            StoreRecord {
                tile_count,
                values: vector.values,
            },
        );
        Ok(())
    }

    pub fn to_table(&self) -> FeatureTable {
        FeatureTable {
            columns: (0..self.dim).map(|j| format!("f{j}")).collect(),
            rows: self
                .records
                .iter()
                .map(|(id, r)| (id.clone(), r.values.iter().map(|&v| v as f64).collect()))
                .collect(),
        }
    }
}

fn encode_binary(store: &FeatureStore) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(12 + store.records.len() * (8 + 4 * store.dim));
    out.extend_from_slice(STORE_MAGIC);
    out.extend_from_slice(&(store.dim as u32).to_le_bytes());
    out.extend_from_slice(&(store.records.len() as u32).to_le_bytes());
    for (id, rec) in &store.records {
        let len = u16::try_from(id.len()).map_err(|_| FeaturesError::IdTooLong(id.clone()))?;
        if rec.values.len() != store.dim {
            return Err(FeaturesError::LengthMismatch {
                expected: store.dim,
                found: rec.values.len(),
            });
        }
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(id.as_bytes());
        out.extend_from_slice(&rec.tile_count.to_le_bytes());
        for v in &rec.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| FeaturesError::Truncated(what.to_string()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

fn decode_binary(bytes: &[u8], extractor_id: &str) -> Result<FeatureStore> {
    if bytes.len() < 4 || &bytes[..4] != STORE_MAGIC {
        return Err(FeaturesError::BadMagic);
    }
    let mut r = Reader { bytes, pos: 4 };
    let dim = r.u32("header")? as usize;
    let count = r.u32("header")? as usize;
    let mut store = FeatureStore::new(extractor_id, dim);
    for i in 0..count {
        let what = format!("record {i}");
        let len = u16::from_le_bytes(r.take(2, &what)?.try_into().unwrap()) as usize;
        let id = std::str::from_utf8(r.take(len, &what)?)
            .map_err(|_| FeaturesError::Csv {
                line: 0,
                message: format!("{what}: tract id is not UTF-8"),
            })?
            .to_string();
        let tile_count = r.u32(&what)?;
        let raw = r.take(
            dim.checked_mul(4)
                .ok_or_else(|| FeaturesError::Truncated(what.clone()))?,
            &what,
        )?;
        let values = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if store
            .records
            .insert(id.clone(), StoreRecord { tile_count, values })
            .is_some()
        {
            return Err(FeaturesError::DuplicateId(id));
        }
    }
    if r.pos != bytes.len() {
        return Err(FeaturesError::TrailingBytes(bytes.len() - r.pos));
    }
    Ok(store)
}

pub fn write_store_binary(store: &FeatureStore, path: &Path) -> Result<()> {
    std::fs::write(path, encode_binary(store)?).map_err(io_err(path))
}

pub fn read_store_binary(path: &Path, extractor_id: &str) -> Result<FeatureStore> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    decode_binary(&bytes, extractor_id)
}

/// CSV form. `f32` values are printed in shortest round-trip form (at most
/// nine significant digits), so reading back is exact.
pub fn write_store_csv(store: &FeatureStore, path: &Path) -> Result<()> {
    let csv_err = |e: csv::Error| FeaturesError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["tract_id".to_string(), "tile_count".to_string()];
    header.extend((0..store.dim).map(|j| format!("f{j}")));
    w.write_record(&header).map_err(csv_err)?;
    for (id, rec) in &store.records {
        let mut row = vec![id.clone(), rec.tile_count.to_string()];
        row.extend(rec.values.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_store_csv(path: &Path, extractor_id: &str) -> Result<FeatureStore> {
    let csv_err = |line: usize| {
        move |e: csv::Error| FeaturesError::Csv {
            line,
            message: e.to_string(),
        }
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(1))?;
    let header = reader.headers().map_err(csv_err(1))?.clone();
    if header.len() < 2 || &header[0] != "tract_id" || &header[1] != "tile_count" {
        return Err(FeaturesError::Csv {
            line: 1,
            message: "expected header tract_id,tile_count,f0,...".into(),
        });
    }
    let dim = header.len() - 2;
    let mut store = FeatureStore::new(extractor_id, dim);
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(csv_err(line))?;
        let bad = |message: String| FeaturesError::Csv { line, message };
        let tile_count = rec[1]
            .parse()
            .map_err(|_| bad(format!("bad tile_count {:?}", &rec[1])))?;
        let values = rec
            .iter()
            .skip(2)
            .map(|s| s.parse::<f32>().map_err(|_| bad(format!("bad value {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let id = rec[0].to_string();
        if store
            .records
            .insert(id.clone(), StoreRecord { tile_count, values })
            .is_some()
        {
            return Err(FeaturesError::DuplicateId(id));
        }
    }
    Ok(store)
}

/// Plain table CSV: `tract_id` followed by the named columns.
pub fn write_table_csv(table: &FeatureTable, path: &Path) -> Result<()> {
    let csv_err = |e: csv::Error| FeaturesError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["tract_id".to_string()];
    header.extend(table.columns.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for (id, vals) in &table.rows {
        let mut row = vec![id.clone()];
        row.extend(vals.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_table_csv(path: &Path) -> Result<FeatureTable> {
    let csv_err = |line: usize| {
        move |e: csv::Error| FeaturesError::Csv {
            line,
            message: e.to_string(),
        }
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(1))?;
    let header = reader.headers().map_err(csv_err(1))?.clone();
    if header.is_empty() || &header[0] != "tract_id" {
        return Err(FeaturesError::Csv {
            line: 1,
            message: "expected header starting with tract_id".into(),
        });
    }
    let mut table = FeatureTable {
        columns: header.iter().skip(1).map(str::to_string).collect(),
        rows: Default::default(),
    };
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(csv_err(line))?;
        let values = rec
            .iter()
            .skip(1)
            .map(|s| {
                s.parse::<f64>().map_err(|_| FeaturesError::Csv {
                    line,
                    message: format!("bad value {s:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let id = rec[0].to_string();
        if table.rows.insert(id.clone(), values).is_some() {
            return Err(FeaturesError::DuplicateId(id));
        }
    }
    Ok(table)
}

/// True when the CSV at `path` has the feature-store header rather than a
/// plain table header.
pub fn is_store_csv(path: &Path) -> Result<bool> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| FeaturesError::Csv {
        line: 1,
        message: e.to_string(),
    })?;
    let header = reader.headers().map_err(|e| FeaturesError::Csv {
        line: 1,
        message: e.to_string(),
    })?;
    Ok(header.len() >= 2 && &header[0] == "tract_id" && &header[1] == "tile_count")
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Writes CSV when the path ends in `.csv`, binary otherwise.
pub fn write_feature_store(store: &FeatureStore, path: &Path) -> Result<()> {
    if is_csv(path) {
        write_store_csv(store, path)
    } else {
        write_store_binary(store, path)
    }
}

/// Reads CSV when the path ends in `.csv`, binary otherwise. The store
/// formats do not carry the extractor id, so the caller supplies it.
pub fn read_feature_store(path: &Path, extractor_id: &str) -> Result<FeatureStore> {
    if is_csv(path) {
        read_store_csv(path, extractor_id)
    } else {
        read_store_binary(path, extractor_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> FeatureStore {
        let mut s = FeatureStore::new("baseline-v1", 3);
        for (id, n, v) in [
            ("06037101110", 4, [0.1f32, -2.5, 1e-30]),
            ("47157000100", 1, [f32::MAX, 0.0, -0.0]),
            ("53033000100", 16, [1.0 / 3.0, 7.0, 123456.79]),
        ] {
            s.insert(
                id,
                FeatureVector {
                    values: v.to_vec(),
                    extractor_id: "baseline-v1".into(),
                    layer_name: "x".into(),
                },
                n,
            )
            .unwrap();
        }
        s
    }

    fn bits(s: &FeatureStore) -> Vec<(String, u32, Vec<u32>)> {
        s.records
            .iter()
            .map(|(k, r)| (k.clone(), r.tile_count, r.values.iter().map(|v| v.to_bits()).collect()))
            .collect()
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.fvs");
        let s = sample();
        write_feature_store(&s, &p).unwrap();
        let back = read_feature_store(&p, "baseline-v1").unwrap();
        assert_eq!(back, s);
        assert_eq!(bits(&back), bits(&s));
    }

    #[test]
    fn csv_round_trip_and_agrees_with_binary() {
        let dir = tempfile::tempdir().unwrap();
        let s = sample();
        write_feature_store(&s, &dir.path().join("f.csv")).unwrap();
        write_feature_store(&s, &dir.path().join("f.fvs")).unwrap();
        let c = read_feature_store(&dir.path().join("f.csv"), "x").unwrap();
        let b = read_feature_store(&dir.path().join("f.fvs"), "x").unwrap();
        assert_eq!(bits(&c), bits(&b));
        let text = std::fs::read_to_string(dir.path().join("f.csv")).unwrap();
        assert!(text.starts_with("tract_id,tile_count,f0,f1,f2\n"));
    }

    #[test]
    fn layout_matches_format() {
        let mut s = FeatureStore::new("x", 2);
        s.records.insert(
            "ab".into(),
            StoreRecord {
                tile_count: 5,
                values: vec![1.0, 2.0],
            },
        );
        let bytes = encode_binary(&s).unwrap();
        let mut expect = b"FVS1".to_vec();
        expect.extend(2u32.to_le_bytes());
        expect.extend(1u32.to_le_bytes());
        expect.extend(2u16.to_le_bytes());
        expect.extend(b"ab");
        expect.extend(5u32.to_le_bytes());
        expect.extend(1f32.to_le_bytes());
        expect.extend(2f32.to_le_bytes());
        assert_eq!(bytes, expect);
    }

    #[test]
    fn table_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let mut t = FeatureTable {
            columns: vec!["cafe".into(), "park".into()],
            rows: Default::default(),
        };
        t.rows.insert("b".into(), vec![0.1, 3.0]);
        t.rows.insert("a".into(), vec![1e-300, -2.5]);
        write_table_csv(&t, &p).unwrap();
        assert_eq!(read_table_csv(&p).unwrap(), t);
        assert!(!is_store_csv(&p).unwrap());
        write_store_csv(&sample(), &p).unwrap();
        assert!(is_store_csv(&p).unwrap());
    }

    #[test]
    fn corrupt_files() {
        let bytes = encode_binary(&sample()).unwrap();
        let mut wrong = bytes.clone();
        wrong[3] = b'2';
        assert!(matches!(decode_binary(&wrong, ""), Err(FeaturesError::BadMagic)));
        assert!(matches!(decode_binary(b"FV", ""), Err(FeaturesError::BadMagic)));
        for cut in [6, 12, 20, bytes.len() - 1] {
            assert!(
                matches!(decode_binary(&bytes[..cut], ""), Err(FeaturesError::Truncated(_))),
                "cut {cut}"
            );
        }
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(
            decode_binary(&extra, ""),
            Err(FeaturesError::TrailingBytes(1))
        ));
    }

    #[test]
    fn insert_checks() {
        let mut s = sample();
        let v = FeatureVector {
            values: vec![1.0],
            extractor_id: "".into(),
            layer_name: "".into(),
        };
        assert!(matches!(
            s.insert("z", v.clone(), 1),
            Err(FeaturesError::LengthMismatch { .. })
        ));
        let v3 = FeatureVector {
            values: vec![1.0; 3],
            ..v
        };
        assert!(matches!(
            s.insert("06037101110", v3, 1),
            Err(FeaturesError::DuplicateId(_))
        ));
        let t = sample().to_table();
        assert_eq!(t.columns, ["f0", "f1", "f2"]);
        assert_eq!(t.rows["53033000100"][1], 7.0);
    }

    proptest! {
        #[test]
        fn csv_round_trip_any_finite(vals in proptest::collection::vec(proptest::num::f32::NORMAL | proptest::num::f32::SUBNORMAL | proptest::num::f32::ZERO, 1..20)) {
            let dir = tempfile::tempdir().unwrap();
            let mut s = FeatureStore::new("x", vals.len());
            s.records.insert("t".into(), StoreRecord { tile_count: 1, values: vals });
            let p = dir.path().join("s.csv");
            write_store_csv(&s, &p).unwrap();
            let back = read_store_csv(&p, "x").unwrap();
            prop_assert_eq!(bits(&back), bits(&s));
        }
    }
}
