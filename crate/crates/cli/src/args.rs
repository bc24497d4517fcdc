use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tractscope_core::eval::EvalMode;
use tractscope_core::features::{PoiMode, Target};
use tractscope_core::geo::PropertyMap;
use tractscope_core::model::{ElasticNetConfig, Folds};

#[derive(Parser, Debug)]
#[command(
    name = "tractscope",
    version,
    about = "Census-tract outcome models from satellite tiles and POI counts"
)]
pub struct Cli {
    /// Base directory for every relative path, including --config.
    #[arg(long, global = true, default_value = ".")]
    pub workdir: PathBuf,

    /// Worker threads (default: logical CPUs). Output does not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Flat `key = value` file; keys are flag names, command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, default_value = "info")]
    pub log_level: log::LevelFilter,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tract boundary checks.
    Tracts {
        #[command(subcommand)]
        cmd: TractsCmd,
    },
    /// Tile planning and download.
    Tiles {
        #[command(subcommand)]
        cmd: TilesCmd,
    },
    /// Per-tract image features.
    Features {
        #[command(subcommand)]
        cmd: FeaturesCmd,
    },
    /// Network inspection.
    Net {
        #[command(subcommand)]
        cmd: NetCmd,
    },
    /// Points of interest.
    Poi {
        #[command(subcommand)]
        cmd: PoiCmd,
    },
    /// Elastic-net models.
    Model {
        #[command(subcommand)]
        cmd: ModelCmd,
    },
    /// Figures data from an evaluation.
    Report {
        #[command(subcommand)]
        cmd: ReportCmd,
    },
    /// Synthetic worlds.
    Synth {
        #[command(subcommand)]
        cmd: SynthCmd,
    },
    /// The whole chain in one go.
    Pipeline {
        #[command(subcommand)]
        cmd: PipelineCmd,
    },
}

impl Command {
    /// Stage label used in logs and error messages.
    pub fn stage(&self) -> &'static str {
        match self {
            Command::Tracts { .. } => "tracts",
            Command::Tiles { .. } => "tiles",
            Command::Features { .. } => "features",
            Command::Net { .. } => "net",
            Command::Poi { .. } => "poi",
            Command::Model { .. } => "model",
            Command::Report { .. } => "report",
            Command::Synth { .. } => "synth",
            Command::Pipeline { .. } => "pipeline",
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum TractsCmd {
    /// Parse the tract GeoJSON and summarize it.
    Validate(ValidateArgs),
}

#[derive(Subcommand, Debug)]
pub enum TilesCmd {
    /// Write the tile plan as CSV.
    Plan(TilePlanArgs),
    /// Download every planned tile not already cached.
    Fetch(TileFetchArgs),
}

#[derive(Subcommand, Debug)]
pub enum FeaturesCmd {
    /// Build the per-tract feature store from cached tiles.
    Extract(ExtractArgs),
}

#[derive(Subcommand, Debug)]
pub enum NetCmd {
    /// Dump one convolution layer's activation maps as PGM images.
    Activations(ActivationsArgs),
}

#[derive(Subcommand, Debug)]
pub enum PoiCmd {
    /// Query POIs over each tract's probe grid.
    Fetch(PoiFetchArgs),
    /// Count POIs per tract and category.
    Aggregate(PoiAggregateArgs),
}

#[derive(Subcommand, Debug)]
pub enum ModelCmd {
    /// Fit the cross-validated elastic net on all modeled tracts.
    Fit(ModelFitArgs),
    /// Score the model by cross-validation or holdout.
    Evaluate(EvaluateArgs),
}

#[derive(Subcommand, Debug)]
pub enum ReportCmd {
    /// Write scatter CSV, choropleth GeoJSON and report CSV.
    Emit(EmitArgs),
}

#[derive(Subcommand, Debug)]
pub enum SynthCmd {
    /// Generate a synthetic world with known ground truth.
    Generate(SynthArgs),
}

#[derive(Subcommand, Debug)]
pub enum PipelineCmd {
    /// Fetch, extract, evaluate and emit.
    Run(PipelineArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TractInput {
    /// Tract boundaries (GeoJSON FeatureCollection).
    #[arg(long)]
    pub tracts: PathBuf,
    #[arg(long, default_value = "GEOID")]
    pub id_property: String,
    #[arg(long, default_value = "region")]
    pub region_property: String,
    #[arg(long, default_value = "prevalence")]
    pub prevalence_property: String,
    #[arg(long, default_value = "income")]
    pub income_property: String,
    #[arg(long, default_value = "land_area_km2")]
    pub area_property: String,
}

impl TractInput {
    pub fn property_map(&self) -> PropertyMap {
        PropertyMap {
            id: self.id_property.clone(),
            region: self.region_property.clone(),
            prevalence: self.prevalence_property.clone(),
            income: self.income_property.clone(),
            area: self.area_property.clone(),
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TileArgs {
    #[arg(long, default_value_t = 18)]
    pub zoom: u32,
    /// Tile width and height in pixels.
    #[arg(long, default_value_t = 400)]
    pub tile_px: u32,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EndpointArgs {
    /// Base URL of the remote service.
    #[arg(long, default_value = "")]
    pub endpoint: String,
    /// Never touch the network; cache misses are errors.
    #[arg(long)]
    pub offline: bool,
    #[arg(long, default_value_t = 4)]
    pub max_concurrent: usize,
    #[arg(long, default_value_t = 3)]
    pub retries: u32,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ModelArgs {
    /// Elastic-net mixing weight (1 = lasso, 0 = ridge).
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// `auto` (3 below 200 rows, else 5) or a fixed count.
    #[arg(long, default_value = "auto")]
    pub folds: Folds,
    /// Maximum nonzero coefficients (default: row count).
    #[arg(long)]
    pub feature_cap: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub path_length: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub path_ratio: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_sweeps: usize,
}

impl ModelArgs {
    pub fn config(&self) -> ElasticNetConfig {
        ElasticNetConfig {
            alpha: self.alpha,
            path_length: self.path_length,
            path_ratio: self.path_ratio,
            tol: self.tol,
            max_sweeps: self.max_sweeps,
            folds: self.folds,
            feature_cap: self.feature_cap,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractorKind {
    Cnn,
    Baseline,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tracts: TractInput,
    #[arg(long, default_value = "validation")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TilePlanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tracts: TractInput,
    #[command(flatten)]
    #[serde(flatten)]
    pub tiles: TileArgs,
    #[arg(long, default_value = "tile_plan")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TileFetchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tracts: TractInput,
    #[command(flatten)]
    #[serde(flatten)]
    pub tiles: TileArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub endpoint: EndpointArgs,
    /// Tile cache directory.
    #[arg(long, default_value = "tiles")]
    pub cache: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ExtractArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tracts: TractInput,
    #[command(flatten)]
    #[serde(flatten)]
    pub tiles: TileArgs,
    #[arg(long, default_value = "tiles")]
    pub cache: PathBuf,
    #[arg(long, value_enum, default_value = "cnn")]
    pub extractor: ExtractorKind,
    /// CNW1 weight file; required for the cnn extractor.
    #[arg(long, required_if_eq("extractor", "cnn"))]
    pub weights: Option<PathBuf>,
    /// Layer whose output becomes the feature vector (default: the last).
    #[arg(long)]
    pub layer: Option<String>,
    #[arg(long, default_value = "features")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ActivationsArgs {
    #[arg(long)]
    pub weights: PathBuf,
    /// PNG or JPEG input image.
    #[arg(long)]
    pub image: PathBuf,
    /// Convolution layer to dump.
    #[arg(long)]
    pub layer: String,
    #[arg(long, default_value = "activations")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PoiFetchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tracts: TractInput,
    #[command(flatten)]
    #[serde(flatten)]
    pub endpoint: EndpointArgs,
    /// Answer queries from an NDJSON file instead of the network.
    #[arg(long)]
    pub poi_fixture: Option<PathBuf>,
    /// Probe radius in meters.
    #[arg(long, default_value_t = 500.0)]
    pub radius: f64,
    #[arg(long, default_value = "poi_fetch")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PoiAggregateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tracts: TractInput,
    /// NDJSON POI records.
    #[arg(long)]
    pub poi: PathBuf,
    #[arg(long, default_value = "counts")]
    pub mode: PoiMode,
    /// Comma-separated category vocabulary (default: every category seen).
    #[arg(long, value_delimiter = ',')]
    pub categories: Vec<String>,
    #[arg(long, default_value = "poi_features")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ModelFitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tracts: TractInput,
    /// Feature store (.fvs or .csv) or POI table CSV.
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, default_value = "prevalence")]
    pub target: Target,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "model")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EvalArgs {
    #[arg(long, default_value = "cv")]
    pub mode: EvalMode,
    /// Training share in holdout mode.
    #[arg(long, default_value_t = 0.6)]
    pub split: f64,
    #[arg(long, default_value = "prevalence")]
    pub target: Target,
    /// Skip the per-region reports.
    #[arg(long)]
    pub no_per_region: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EvaluateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tracts: TractInput,
    #[arg(long)]
    pub features: PathBuf,
    /// Feature source label for reports (default: inferred from the input).
    #[arg(long)]
    pub featurizer: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub eval: EvalArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "evaluation")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EmitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tracts: TractInput,
    /// evaluation.json written by `model evaluate`.
    #[arg(long)]
    pub evaluation: PathBuf,
    #[arg(long, default_value = "report")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub n_tracts: usize,
    /// Generative R² of each outcome on the latent variable.
    #[arg(long, default_value_t = 0.8)]
    pub target_r2: f64,
    /// Fixed prevalence noise sd; overrides --target-r2.
    #[arg(long)]
    pub noise_sd: Option<f64>,
    #[arg(long, default_value_t = 64)]
    pub image_px: u32,
    #[arg(long, default_value_t = 18)]
    pub zoom: u32,
    /// Share of tracts with withheld outcomes.
    #[arg(long, default_value_t = 0.0)]
    pub missing_fraction: f64,
    #[arg(long, default_value = "synth")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PipelineArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tracts: TractInput,
    #[command(flatten)]
    #[serde(flatten)]
    pub tiles: TileArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub endpoint: EndpointArgs,
    #[arg(long, default_value = "tiles")]
    pub cache: PathBuf,
    #[arg(long, value_enum, default_value = "cnn")]
    pub extractor: ExtractorKind,
    #[arg(long, required_if_eq("extractor", "cnn"))]
    pub weights: Option<PathBuf>,
    #[arg(long)]
    pub layer: Option<String>,
    #[arg(long, default_value_t = 0.6)]
    pub split: f64,
    #[arg(long, default_value = "prevalence")]
    pub target: Target,
    #[arg(long)]
    pub no_per_region: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Also run the POI branch from this NDJSON fixture.
    #[arg(long)]
    pub poi_fixture: Option<PathBuf>,
    /// Also run the POI branch against the remote endpoint.
    #[arg(long)]
    pub poi_remote: bool,
    #[arg(long, default_value_t = 500.0)]
    pub radius: f64,
    #[arg(long, default_value = "counts")]
    pub poi_mode: PoiMode,
    #[arg(long, default_value = "pipeline")]
    pub out: PathBuf,
}
