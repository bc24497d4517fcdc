use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{FeatureTable, FeaturesError, Result};
use crate::acquisition::PoiRecord;
use crate::geo::{bounding_box, point_in_polygon, polygon_area_km2, LatLon, TractRecord};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoiMode {
    #[default]
    Counts,
    PerKm2,
}

impl fmt::Display for PoiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PoiMode::Counts => "counts",
            PoiMode::PerKm2 => "per-km2",
        })
    }
}

impl FromStr for PoiMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "counts" => Ok(PoiMode::Counts),
            "per-km2" | "per_km2" => Ok(PoiMode::PerKm2),
            _ => Err(format!("unknown POI mode {s:?} (expected counts or per-km2)")),
        }
    }
}

/// What happened to records that did not land in a matrix cell.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PoiTally {
    pub input: usize,
    pub duplicates: usize,
    pub outside: usize,
    pub unknown_categories: BTreeMap<String, usize>,
    pub counted: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoiMatrix {
    pub table: FeatureTable,
    pub mode: PoiMode,
    pub tally: PoiTally,
}

/// Per-tract category counts (or densities) over deduplicated records.
///
/// Every tract gets a row, including tracts with no places. A record that
/// falls in several overlapping tracts is assigned to the one with the
/// smallest id.
pub fn poi_feature_matrix(
    records: &[PoiRecord],
    tracts: &[TractRecord],
    categories: &[String],
    mode: PoiMode,
) -> Result<PoiMatrix> {
    if categories.is_empty() {
        return Err(FeaturesError::EmptyVocabulary);
    }
    let column: HashMap<&str, usize> = categories.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();

    let mut order: Vec<&TractRecord> = tracts.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let boxes: Vec<(LatLon, LatLon)> = order.iter().map(|t| bounding_box(&t.geometry)).collect();

    let mut rows: BTreeMap<String, Vec<f64>> = order
        .iter()
        .map(|t| (t.id.clone(), vec![0.0; categories.len()]))
        .collect();
    let mut tally = PoiTally {
        input: records.len(),
        ..PoiTally::default()
    };
    let mut seen = HashSet::new();
    for rec in records {
        if !seen.insert(rec.place_id.as_str()) {
            tally.duplicates += 1;
            continue;
        }
        let p = rec.location;
        let home = order.iter().zip(&boxes).find(|(t, (sw, ne))| {
            p.lat >= sw.lat && p.lat <= ne.lat && p.lon >= sw.lon && p.lon <= ne.lon && point_in_polygon(p, &t.geometry)
        });
        let Some((tract, _)) = home else {
            tally.outside += 1;
            continue;
        };
        match column.get(rec.category.as_str()) {
            Some(&c) => {
                rows.get_mut(&tract.id).unwrap()[c] += 1.0;
                tally.counted += 1;
            }
            None => *tally.unknown_categories.entry(rec.category.clone()).or_default() += 1,
        }
    }

    if mode == PoiMode::PerKm2 {
        for t in &order {
            let area = t
                .land_area_km2
                .filter(|a| *a > 0.0)
                .or_else(|| Some(polygon_area_km2(&t.geometry)).filter(|a| *a > 0.0))
                .ok_or_else(|| FeaturesError::MissingArea(t.id.clone()))?;
            for v in rows.get_mut(&t.id).unwrap() {
                *v /= area;
            }
        }
    }

    Ok(PoiMatrix {
        table: FeatureTable {
            columns: categories.to_vec(),
            rows,
        },
        mode,
        tally,
    })
}
