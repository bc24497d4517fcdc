//! Library-level runs over a generated world.

use nalgebra::{DMatrix, DVector};
use tractscope_core::acquisition::TileCache;
use tractscope_core::eval::{emit_outputs, evaluate_run, EvalConfig, EvalMode};
use tractscope_core::features::{build_design_matrix, extract_store, Extractor, Target};
use tractscope_core::geo::{parse_tract_collection, PropertyMap};
use tractscope_core::model::ElasticNetConfig;
use tractscope_core::synth::{generate_world, SynthConfig};
use tractscope_core::TractRecord;

struct World {
    _dir: tempfile::TempDir,
    cfg: SynthConfig,
    tracts: Vec<TractRecord>,
    collection: serde_json::Value,
    cache: TileCache,
}

fn world(n_tracts: usize, seed: u64) -> World {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SynthConfig {
        seed,
        n_tracts,
        ..Default::default()
    };
    let w = generate_world(&cfg, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join(&w.tracts)).unwrap();
    World {
        tracts: parse_tract_collection(&text, &PropertyMap::default()).unwrap(),
        collection: serde_json::from_str(&text).unwrap(),
        cache: TileCache::new(dir.path().join(&w.tile_cache)),
        cfg,
        _dir: dir,
    }
}

fn in_sample_r2(x: &DMatrix<f64>, y: &[f64]) -> f64 {
    let n = y.len();
    let design = DMatrix::from_fn(n, x.ncols() + 1, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] });
    let yv = DVector::from_column_slice(y);
    let beta = (design.transpose() * &design)
        .lu()
        .solve(&(design.transpose() * &yv))
        .unwrap();
    let mean = yv.mean();
    1.0 - (&yv - design * beta).norm_squared() / yv.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
}

#[test]
fn baseline_descriptor_carries_the_latent_signal() {
    let w = world(200, 42);
    let store = extract_store(&w.tracts, &w.cache, w.cfg.zoom, w.cfg.image_px, &Extractor::Baseline)
        .unwrap()
        .store;
    let d = build_design_matrix(&store.to_table(), &w.tracts, Target::Prevalence).unwrap();
    assert_eq!(d.y.len(), 200);

    // Channel means recovered from the histograms, plus the gradient block.
    let centre = |b: usize| (b * 4) as f64 + 1.5;
    let x = DMatrix::from_fn(d.y.len(), 3 + 16, |i, j| {
        if j < 3 {
            (0..64).map(|b| d.x[[i, j * 64 + b]] * centre(b)).sum()
        } else {
            d.x[[i, 192 + j - 3]]
        }
    });
    let r2 = in_sample_r2(&x, &d.y);
    assert!(r2 >= 0.5, "in-sample r2 {r2}");
}

#[test]
fn cv_and_holdout_through_the_public_api() {
    let w = world(60, 7);
    let store = extract_store(&w.tracts, &w.cache, w.cfg.zoom, w.cfg.image_px, &Extractor::Baseline)
        .unwrap()
        .store;
    let d = build_design_matrix(&store.to_table(), &w.tracts, Target::Prevalence).unwrap();
    let out = tempfile::tempdir().unwrap();
    for mode in [EvalMode::Cv, EvalMode::Holdout] {
        let cfg = EvalConfig {
            model: ElasticNetConfig {
                seed: 3,
                ..Default::default()
            },
            mode,
            split: 0.6,
            target: Target::Prevalence,
            featurizer: "baseline".into(),
            per_region: false,
        };
        let run = evaluate_run(&d, &cfg).unwrap();
        assert_eq!(run.reports.len(), 1);
        let pooled = &run.reports[0];
        assert_eq!(pooled.n, if mode == EvalMode::Cv { 60 } else { 24 });
        assert_eq!(pooled.folds, 3);
        assert!(pooled.r2 > 0.3, "{mode:?} r2 {}", pooled.r2);

        let dir = out.path().join(format!("{mode:?}"));
        std::fs::create_dir_all(&dir).unwrap();
        let files = emit_outputs(&run, &w.collection, &PropertyMap::default(), &dir).unwrap();
        let scatter = std::fs::read_to_string(&files.scatter).unwrap();
        assert_eq!(scatter.lines().count(), pooled.n + 1);
        let back = parse_tract_collection(
            &std::fs::read_to_string(&files.choropleth).unwrap(),
            &PropertyMap::default(),
        )
        .unwrap();
        assert_eq!(back.len(), w.tracts.len());
    }
}
