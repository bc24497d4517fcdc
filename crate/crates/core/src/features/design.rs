use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{FeatureTable, FeaturesError, Result};
use crate::geo::TractRecord;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    #[default]
    Prevalence,
    Income,
}

impl Target {
    pub fn value(self, tract: &TractRecord) -> Option<f64> {
        match self {
            Target::Prevalence => tract.prevalence,
            Target::Income => tract.income,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Prevalence => "prevalence",
            Target::Income => "income",
        })
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "prevalence" => Ok(Target::Prevalence),
            "income" => Ok(Target::Income),
            _ => Err(format!("unknown target {s:?} (expected prevalence or income)")),
        }
    }
}

/// Aligned modeling input. Rows are in ascending tract-id order.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    pub ids: Vec<String>,
    pub columns: Vec<String>,
    pub x: Array2<f64>,
    pub y: Vec<f64>,
    pub regions: Vec<String>,
    /// Tracts left out (no outcome, or no features) and their regions.
    pub excluded: Vec<String>,
    pub excluded_regions: Vec<String>,
}

impl DesignMatrix {
    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    /// The rows at `idx`, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> DesignMatrix {
        DesignMatrix {
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            columns: self.columns.clone(),
            x: self.x.select(ndarray::Axis(0), idx),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            regions: idx.iter().map(|&i| self.regions[i].clone()).collect(),
            excluded: self.excluded.clone(),
            excluded_regions: self.excluded_regions.clone(),
        }
    }

    /// Distinct region labels, sorted.
    pub fn region_names(&self) -> Vec<String> {
        let mut r: Vec<String> = self
            .regions
            .iter()
            .cloned()
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        r.sort();
        r
    }

    pub fn region_rows(&self, region: &str) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.regions[i] == region).collect()
    }

    /// The rows of one region, with exclusions narrowed to that region.
    pub fn region(&self, region: &str) -> DesignMatrix {
        let mut d = self.select_rows(&self.region_rows(region));
        let (ids, regions): (Vec<String>, Vec<String>) = self
            .excluded
            .iter()
            .zip(&self.excluded_regions)
            .filter(|(_, r)| *r == region)
            .map(|(i, r)| (i.clone(), r.clone()))
            .unzip();
        d.excluded = ids;
        d.excluded_regions = regions;
        d
    }
}

/// Joins feature rows with tract outcomes.
pub fn build_design_matrix(features: &FeatureTable, tracts: &[TractRecord], target: Target) -> Result<DesignMatrix> {
    let mut sorted: Vec<&TractRecord> = tracts.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));

    let p = features.columns.len();
    let mut ids = Vec::new();
    let mut y = Vec::new();
    let mut regions = Vec::new();
    let mut flat = Vec::new();
    let mut excluded = Vec::new();
    let mut excluded_regions = Vec::new();
    for t in sorted {
        match (features.rows.get(&t.id), target.value(t)) {
            (Some(row), Some(v)) if v.is_finite() => {
                if row.len() != p {
                    return Err(FeaturesError::LengthMismatch {
                        expected: p,
                        found: row.len(),
                    });
                }
                if row.iter().any(|x| !x.is_finite()) {
                    return Err(FeaturesError::NonFinite(t.id.clone()));
                }
                ids.push(t.id.clone());
                y.push(v);
                regions.push(t.region.clone());
                flat.extend_from_slice(row);
            }
            _ => {
                excluded.push(t.id.clone());
                excluded_regions.push(t.region.clone());
            }
        }
    }
    if ids.len() < 2 {
        return Err(FeaturesError::TooFewRows(ids.len()));
    }
    let x = Array2::from_shape_vec((ids.len(), p), flat).expect("row lengths checked");
    Ok(DesignMatrix {
        ids,
        columns: features.columns.clone(),
        x,
        y,
        regions,
        excluded,
        excluded_regions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{Geometry, LatLon};
    use std::collections::BTreeMap;

    fn tract(id: &str, prevalence: Option<f64>, income: Option<f64>) -> TractRecord {
        TractRecord {
            id: id.into(),
            region: format!("region-{}", &id[..1]),
            geometry: Geometry::polygon(vec![
                LatLon::new(0., 0.),
                LatLon::new(0., 1.),
                LatLon::new(1., 1.),
                LatLon::new(0., 0.),
            ]),
            prevalence,
            income,
            land_area_km2: None,
        }
    }

    fn table() -> FeatureTable {
        FeatureTable {
            columns: vec!["a".into(), "b".into()],
            rows: BTreeMap::from([
                ("a1".to_string(), vec![1.0, 2.0]),
                ("b2".to_string(), vec![3.0, 4.0]),
                ("c3".to_string(), vec![5.0, 6.0]),
            ]),
        }
    }

    #[test]
    fn null_target_is_excluded() {
        let tracts = [
            tract("c3", Some(30.0), Some(1.0)),
            tract("a1", Some(20.0), None),
            tract("b2", None, Some(5.0)),
        ];
        let d = build_design_matrix(&table(), &tracts, Target::Prevalence).unwrap();
        assert_eq!(d.ids, ["a1", "c3"]);
        assert_eq!(d.y, [20.0, 30.0]);
        assert_eq!(d.x.row(1).to_vec(), [5.0, 6.0]);
        assert_eq!(d.excluded, ["b2"]);
        assert_eq!(d.regions, ["region-a", "region-c"]);

        let d = build_design_matrix(&table(), &tracts, Target::Income).unwrap();
        assert_eq!(d.ids, ["b2", "c3"]);
        assert_eq!(d.y, [5.0, 1.0]);
    }

    #[test]
    fn tracts_without_features_are_excluded() {
        let tracts = [
            tract("a1", Some(1.0), None),
            tract("b2", Some(2.0), None),
            tract("z9", Some(3.0), None),
        ];
        let d = build_design_matrix(&table(), &tracts, Target::Prevalence).unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.excluded, ["z9"]);
    }

    #[test]
    fn order_is_stable() {
        let a = [
            tract("c3", Some(3.0), None),
            tract("a1", Some(1.0), None),
            tract("b2", Some(2.0), None),
        ];
        let mut b = a.clone();
        b.reverse();
        assert_eq!(
            build_design_matrix(&table(), &a, Target::Prevalence).unwrap(),
            build_design_matrix(&table(), &b, Target::Prevalence).unwrap()
        );
    }

    #[test]
    fn too_few_rows_and_nan() {
        let tracts = [tract("a1", Some(1.0), None), tract("b2", None, None)];
        assert!(matches!(
            build_design_matrix(&table(), &tracts, Target::Prevalence),
            Err(FeaturesError::TooFewRows(1))
        ));
        let mut t = table();
        t.rows.get_mut("b2").unwrap()[0] = f64::NAN;
        let tracts = [tract("a1", Some(1.0), None), tract("b2", Some(1.0), None)];
        assert!(matches!(
            build_design_matrix(&t, &tracts, Target::Prevalence),
            Err(FeaturesError::NonFinite(_))
        ));
    }

    #[test]
    fn subsets() {
        let tracts = [
            tract("a1", Some(1.0), None),
            tract("b2", Some(2.0), None),
            tract("c3", Some(3.0), None),
        ];
        let d = build_design_matrix(&table(), &tracts, Target::Prevalence).unwrap();
        let s = d.select_rows(&[2, 0]);
        assert_eq!(s.ids, ["c3", "a1"]);
        assert_eq!(s.x.row(0).to_vec(), [5.0, 6.0]);
        assert_eq!(d.region_names(), ["region-a", "region-b", "region-c"]);
        assert_eq!(d.region_rows("region-b"), [1]);
        let tracts = [
            tract("a1", Some(1.0), None),
            tract("b2", Some(2.0), None),
            tract("c3", None, None),
        ];
        let d = build_design_matrix(&table(), &tracts, Target::Prevalence).unwrap();
        assert_eq!(d.region("region-c").excluded, ["c3"]);
        assert!(d.region("region-a").excluded.is_empty());
        assert_eq!(d.region("region-a").ids, ["a1"]);
        assert_eq!("income".parse::<Target>().unwrap(), Target::Income);
    }
}
