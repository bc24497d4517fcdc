//! Helpers and independent oracles shared by the CLI integration tests and
//! the acceptance suite.
#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use rand::Rng;
use tractscope_core::cnn::{ConvLayer, FcLayer, Layer, LayerKind, LrnLayer, NetworkSpec, PoolLayer, Tensor};
use tractscope_core::geo::{Geometry, LatLon, TractRecord};
use tractscope_core::rng::Rng as SeededRng;

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_tractscope")
}

/// Runs the CLI with `--workdir dir` and quiet logs.
pub fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .arg("--workdir")
        .arg(dir)
        .args(["--log-level", "warn"])
        .args(args)
        .output()
        .expect("spawn tractscope")
}

pub fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "tractscope {args:?} failed with {:?}:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Synthetic world in `dir/synth` plus its pipeline config.
pub fn synth_world(dir: &Path, extra: &[&str]) {
    let mut args = vec!["synth", "generate", "--out", "synth"];
    args.extend_from_slice(extra);
    ok(dir, &args);
}

// ---- CNN ----

fn uniform(rng: &mut SeededRng, n: usize, scale: f32) -> Vec<f32> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// A small random network that is valid by construction: conv, relu, pool,
/// lrn in random order, optionally ending in a fully connected layer.
pub fn random_network(rng: &mut SeededRng) -> NetworkSpec {
    let h = rng.random_range(6..=16);
    let w = rng.random_range(6..=16);
    let (mut c, mut hh, mut ww) = (3usize, h, w);
    let mut layers = Vec::new();
    let n_layers = rng.random_range(2..=6);
    for i in 0..n_layers {
        let name = format!("l{i}");
        let kind = match rng.random_range(0..4) {
            0 | 1 => {
                let k = rng.random_range(1..=hh.min(ww).min(5));
                let pad = rng.random_range(0..=2usize.min(k));
                let stride = rng.random_range(1..=3);
                let out_ch = rng.random_range(1..=6);
                let conv = ConvLayer {
                    out_ch,
                    in_ch: c,
                    kh: k,
                    kw: k,
                    stride,
                    pad,
                    weights: uniform(rng, out_ch * c * k * k, 1.0),
                    bias: uniform(rng, out_ch, 0.5),
                };
                hh = (hh + 2 * pad - k) / stride + 1;
                ww = (ww + 2 * pad - k) / stride + 1;
                c = out_ch;
                LayerKind::Conv(conv)
            }
            2 if hh >= 2 && ww >= 2 => {
                let k = rng.random_range(2..=hh.min(ww).min(3));
                let pad = rng.random_range(0..k);
                let stride = rng.random_range(1..=2);
                hh = (hh + 2 * pad - k) / stride + 1;
                ww = (ww + 2 * pad - k) / stride + 1;
                LayerKind::MaxPool(PoolLayer { k, stride, pad })
            }
            3 => LayerKind::Lrn(LrnLayer {
                k: rng.random_range(1.0..3.0),
                alpha: rng.random_range(1e-4..1e-2),
                beta: rng.random_range(0.5..0.9),
                n: [1, 3, 5][rng.random_range(0..3)],
            }),
            _ => LayerKind::Relu,
        };
        layers.push(Layer { name, kind });
    }
    if rng.random_bool(0.5) {
        let inp = c * hh * ww;
        let out = rng.random_range(1..=8);
        layers.push(Layer {
            name: "fc".into(),
            kind: LayerKind::FullyConnected(FcLayer {
                out,
                inp,
                weights: uniform(rng, out * inp, 0.3),
                bias: uniform(rng, out, 0.3),
            }),
        });
    }
    NetworkSpec {
        input_dims: (3, h, w),
        channel_means: [
            rng.random_range(0.0..255.0),
            rng.random_range(0.0..255.0),
            rng.random_range(0.0..255.0),
        ],
        layers,
    }
}

/// f64 tensor in CHW order for the reference engine.
pub struct Ref {
    pub c: usize,
    pub h: usize,
    pub w: usize,
    pub data: Vec<f64>,
}

impl Ref {
    fn at(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.h + y) * self.w + x]
    }
}

/// Straightforward per-layer loops in f64, written from the layer
/// definitions alone.
pub fn naive_forward(net: &NetworkSpec, input: &Tensor) -> Vec<f64> {
    let (c, h, w) = net.input_dims;
    let mut t = Ref {
        c,
        h,
        w,
        data: input.data.iter().map(|&v| v as f64).collect(),
    };
    for layer in &net.layers {
        t = match &layer.kind {
            LayerKind::Conv(l) => {
                let ho = (t.h + 2 * l.pad - l.kh) / l.stride + 1;
                let wo = (t.w + 2 * l.pad - l.kw) / l.stride + 1;
                let mut data = Vec::with_capacity(l.out_ch * ho * wo);
                for o in 0..l.out_ch {
                    for oy in 0..ho {
                        for ox in 0..wo {
                            let mut s = l.bias[o] as f64;
                            for i in 0..l.in_ch {
                                for ky in 0..l.kh {
                                    for kx in 0..l.kw {
                                        let y = (oy * l.stride + ky) as isize - l.pad as isize;
                                        let x = (ox * l.stride + kx) as isize - l.pad as isize;
                                        if y < 0 || x < 0 || y >= t.h as isize || x >= t.w as isize {
                                            continue;
                                        }
                                        let wv = l.weights[((o * l.in_ch + i) * l.kh + ky) * l.kw + kx] as f64;
                                        s += wv * t.at(i, y as usize, x as usize);
                                    }
                                }
                            }
                            data.push(s);
                        }
                    }
                }
                Ref {
                    c: l.out_ch,
                    h: ho,
                    w: wo,
                    data,
                }
            }
            LayerKind::Relu => Ref {
                data: t.data.iter().map(|v| v.max(0.0)).collect(),
                ..t
            },
            LayerKind::MaxPool(p) => {
                let ho = (t.h + 2 * p.pad - p.k) / p.stride + 1;
                let wo = (t.w + 2 * p.pad - p.k) / p.stride + 1;
                let mut data = Vec::new();
                for ch in 0..t.c {
                    for oy in 0..ho {
                        for ox in 0..wo {
                            let mut best = f64::NEG_INFINITY;
                            for ky in 0..p.k {
                                for kx in 0..p.k {
                                    let y = (oy * p.stride + ky) as isize - p.pad as isize;
                                    let x = (ox * p.stride + kx) as isize - p.pad as isize;
                                    if y >= 0 && x >= 0 && (y as usize) < t.h && (x as usize) < t.w {
                                        best = best.max(t.at(ch, y as usize, x as usize));
                                    }
                                }
                            }
                            data.push(best);
                        }
                    }
                }
                Ref {
                    c: t.c,
                    h: ho,
                    w: wo,
                    data,
                }
            }
            LayerKind::Lrn(l) => {
                let half = l.n / 2;
                let mut data = Vec::new();
                for ch in 0..t.c {
                    for y in 0..t.h {
                        for x in 0..t.w {
                            let lo = ch.saturating_sub(half);
                            let hi = (ch + half).min(t.c - 1);
                            let sum: f64 = (lo..=hi).map(|j| t.at(j, y, x).powi(2)).sum();
                            let denom = (l.k as f64 + l.alpha as f64 / l.n as f64 * sum).powf(l.beta as f64);
                            data.push(t.at(ch, y, x) / denom);
                        }
                    }
                }
                Ref { data, ..t }
            }
            LayerKind::FullyConnected(f) => {
                let data = (0..f.out)
                    .map(|o| {
                        f.bias[o] as f64
                            + (0..f.inp)
                                .map(|i| f.weights[o * f.inp + i] as f64 * t.data[i])
                                .sum::<f64>()
                    })
                    .collect();
                Ref {
                    c: f.out,
                    h: 1,
                    w: 1,
                    data,
                }
            }
        };
    }
    t.data
}

// ---- geometry ----

pub const WORLD_TILE: f64 = 256.0;

/// Web-Mercator world pixel coordinates, straight from the projection
/// formulas.
pub fn mercator(lat: f64, lon: f64, zoom: u32) -> (f64, f64) {
    let size = WORLD_TILE * 2f64.powi(zoom as i32);
    let s = lat.to_radians().sin();
    let x = (lon + 180.0) / 360.0 * size;
    let y = (0.5 - ((1.0 + s) / (1.0 - s)).ln() / (4.0 * std::f64::consts::PI)) * size;
    (x, y)
}

pub fn inverse_mercator(x: f64, y: f64, zoom: u32) -> LatLon {
    let size = WORLD_TILE * 2f64.powi(zoom as i32);
    let lon = x / size * 360.0 - 180.0;
    let n = std::f64::consts::PI * (1.0 - 2.0 * y / size);
    let lat = n.sinh().atan().to_degrees();
    LatLon::new(lat, lon)
}

/// Even-odd crossing test on a closed ring in (lon, lat).
pub fn inside_ring(p: LatLon, ring: &[LatLon]) -> bool {
    let mut inside = false;
    for e in ring.windows(2) {
        let (a, b) = (e[0], e[1]);
        if (a.lat > p.lat) != (b.lat > p.lat) {
            let x = a.lon + (p.lat - a.lat) / (b.lat - a.lat) * (b.lon - a.lon);
            if p.lon < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Great-circle distance in meters on the mean-radius sphere.
pub fn haversine(a: LatLon, b: LatLon) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * 6_371_008.8 * h.sqrt().asin()
}

/// Star-shaped polygon around a random centre, `rmin..rmax` degrees across.
pub fn random_tract(rng: &mut SeededRng, id: &str, rmin: f64, rmax: f64) -> TractRecord {
    let lat0 = rng.random_range(-60.0..60.0);
    let lon0 = rng.random_range(-170.0..170.0);
    let k = rng.random_range(3..=12);
    let mut angles: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
    angles.sort_by(f64::total_cmp);
    let mut ring: Vec<LatLon> = angles
        .iter()
        .map(|a| {
            let r = rng.random_range(rmin..rmax);
            LatLon::new(lat0 + r * a.sin(), lon0 + r * a.cos())
        })
        .collect();
    ring.push(ring[0]);
    TractRecord {
        id: id.into(),
        region: "r".into(),
        geometry: Geometry::polygon(ring),
        prevalence: None,
        income: None,
        land_area_km2: None,
    }
}

/// Every file under `dir` except run manifests, as sorted relative paths.
pub fn artifact_files(dir: &Path) -> Vec<std::path::PathBuf> {
    fn walk(root: &Path, d: &Path, out: &mut Vec<std::path::PathBuf>) {
        for e in std::fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else if p.file_name().unwrap() != "run_manifest.json" {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}
