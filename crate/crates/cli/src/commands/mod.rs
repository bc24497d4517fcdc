mod features;
mod model;
mod net;
mod pipeline;
mod poi;
mod report;
mod synth;
mod tiles;
mod tracts;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use tractscope_core::acquisition::EndpointConfig;
use tractscope_core::features::{is_store_csv, read_feature_store, read_table_csv, FeatureTable};
use tractscope_core::geo::{parse_tract_value, TractRecord, MAX_TILE_PX, MAX_ZOOM, MIN_TILE_PX};

use crate::args::{
    Command, EndpointArgs, FeaturesCmd, ModelCmd, NetCmd, PipelineCmd, PoiCmd, ReportCmd, SynthCmd, TileArgs, TilesCmd,
    TractInput, TractsCmd,
};
use crate::error::{CliError, CliResult, StageExt};
use crate::manifest::{digest, InputDigest, RunManifest, MANIFEST_FILE};

/// Everything a subcommand needs besides its own flags.
pub struct Ctx {
    pub workdir: PathBuf,
    pub jobs: usize,
    pub argv: Vec<String>,
    pub command: String,
    pub config_file: Option<PathBuf>,
    pub config: BTreeMap<String, String>,
    pub started_at: String,
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl Ctx {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.workdir.join(p)
        }
    }

    /// Resolves and creates an output directory.
    pub fn out_dir(&self, stage: &str, p: &Path) -> CliResult<PathBuf> {
        let dir = self.resolve(p);
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::runtime(stage, anyhow::anyhow!("cannot create {}: {e}", dir.display())))?;
        Ok(dir)
    }

    pub fn stamp(&self, settings: &impl Serialize) -> Stamp<'_> {
        Stamp {
            ctx: self,
            settings: serde_json::to_value(settings).unwrap_or(Value::Null),
            seed: None,
            extractor: None,
            inputs: Vec::new(),
        }
    }

    fn display(&self, p: &Path) -> String {
        p.strip_prefix(&self.workdir).unwrap_or(p).display().to_string()
    }
}

/// A run manifest under construction.
pub struct Stamp<'a> {
    ctx: &'a Ctx,
    settings: Value,
    seed: Option<u64>,
    extractor: Option<String>,
    inputs: Vec<(String, PathBuf)>,
}

impl Stamp<'_> {
    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn extractor(mut self, id: impl Into<String>) -> Self {
        self.extractor = Some(id.into());
        self
    }

    pub fn input(mut self, role: &str, path: &Path) -> Self {
        self.inputs.push((role.to_string(), path.to_path_buf()));
        self
    }

    pub fn write(self, stage: &str, dir: &Path) -> CliResult<()> {
        let inputs = self
            .inputs
            .iter()
            .map(|(role, p)| {
                Ok(InputDigest {
                    role: role.clone(),
                    path: self.ctx.display(p),
                    sha256: digest(p)?,
                })
            })
            .collect::<anyhow::Result<Vec<_>>>()
            .runtime(stage)?;
        let m = RunManifest {
            tool: env!("CARGO_PKG_NAME").replace("-cli", ""),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.ctx.command.clone(),
            command_line: self.ctx.argv.clone(),
            config_file: self.ctx.config_file.as_deref().map(|p| self.ctx.display(p)),
            config: self.ctx.config.clone(),
            settings: self.settings,
            seed: self.seed,
            extractor: self.extractor,
            jobs: self.ctx.jobs,
            inputs,
            started_at: self.ctx.started_at.clone(),
            finished_at: now(),
        };
        m.write(dir).runtime(stage)?;
        Ok(())
    }
}

pub fn dispatch(ctx: &Ctx, cmd: &Command) -> CliResult<()> {
    match cmd {
        Command::Tracts {
            cmd: TractsCmd::Validate(a),
        } => tracts::validate(ctx, a),
        Command::Tiles { cmd: TilesCmd::Plan(a) } => tiles::plan(ctx, a),
        Command::Tiles {
            cmd: TilesCmd::Fetch(a),
        } => tiles::fetch(ctx, a),
        Command::Features {
            cmd: FeaturesCmd::Extract(a),
        } => features::extract(ctx, a),
        Command::Net {
            cmd: NetCmd::Activations(a),
        } => net::activations(ctx, a),
        Command::Poi { cmd: PoiCmd::Fetch(a) } => poi::fetch(ctx, a),
        Command::Poi {
            cmd: PoiCmd::Aggregate(a),
        } => poi::aggregate(ctx, a),
        Command::Model { cmd: ModelCmd::Fit(a) } => model::fit(ctx, a),
        Command::Model {
            cmd: ModelCmd::Evaluate(a),
        } => model::evaluate(ctx, a),
        Command::Report {
            cmd: ReportCmd::Emit(a),
        } => report::emit(ctx, a),
        Command::Synth {
            cmd: SynthCmd::Generate(a),
        } => synth::generate(ctx, a),
        Command::Pipeline {
            cmd: PipelineCmd::Run(a),
        } => pipeline::run(ctx, a),
    }
}

/// Reads an input file, treating its absence as an input error.
pub fn read_input(stage: &str, path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::input(stage, anyhow::anyhow!("{}: {e}", path.display())))
}

pub struct Tracts {
    pub path: PathBuf,
    pub records: Vec<TractRecord>,
    pub collection: Value,
}

pub fn load_tracts(ctx: &Ctx, stage: &str, input: &TractInput) -> CliResult<Tracts> {
    let path = ctx.resolve(&input.tracts);
    let bytes = read_input(stage, &path)?;
    let collection: Value = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::input(stage, anyhow::anyhow!("{}: invalid JSON: {e}", path.display())))?;
    let records = parse_tract_value(&collection, &input.property_map())
        .map_err(|e| CliError::input(stage, anyhow::anyhow!("{}: {e}", path.display())))?;
    log::info!(target: stage, "{} tracts from {}", records.len(), ctx.display(&path));
    Ok(Tracts {
        path,
        records,
        collection,
    })
}

pub fn check_tile_args(stage: &str, t: &TileArgs) -> CliResult<()> {
    if t.zoom > MAX_ZOOM {
        return Err(CliError::input(
            stage,
            anyhow::anyhow!("--zoom {} exceeds {MAX_ZOOM}", t.zoom),
        ));
    }
    if !(MIN_TILE_PX..=MAX_TILE_PX).contains(&t.tile_px) {
        return Err(CliError::input(
            stage,
            anyhow::anyhow!("--tile-px {} outside {MIN_TILE_PX}..={MAX_TILE_PX}", t.tile_px),
        ));
    }
    Ok(())
}

pub fn endpoint_config(e: &EndpointArgs) -> EndpointConfig {
    EndpointConfig {
        base_url: e.endpoint.clone(),
        max_concurrent: e.max_concurrent.max(1),
        retry_limit: e.retries,
        offline: e.offline,
        ..EndpointConfig::default()
    }
    .with_env_key()
}

/// Report label for an extractor id.
pub fn featurizer_label(extractor_id: &str) -> String {
    if extractor_id.starts_with("cnn") {
        "cnn".into()
    } else if extractor_id.starts_with("baseline") {
        "baseline".into()
    } else {
        extractor_id.to_string()
    }
}

/// Loads a feature store (binary or CSV) or a POI table CSV. The second
/// value is the extractor id recorded next to it, or `poi` for tables.
pub fn load_features(ctx: &Ctx, stage: &str, path: &Path) -> CliResult<(FeatureTable, String)> {
    let path = ctx.resolve(path);
    if !path.is_file() {
        return Err(CliError::input(
            stage,
            anyhow::anyhow!("{}: no such file", path.display()),
        ));
    }
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let wrap = |e: tractscope_core::features::FeaturesError| {
        CliError::input(stage, anyhow::anyhow!("{}: {e}", path.display()))
    };
    if is_csv && !is_store_csv(&path).map_err(wrap)? {
        return Ok((read_table_csv(&path).map_err(wrap)?, "poi".into()));
    }
    let id = sibling_extractor(&path).unwrap_or_else(|| "features".into());
    let store = read_feature_store(&path, &id).map_err(wrap)?;
    Ok((store.to_table(), id))
}

fn sibling_extractor(path: &Path) -> Option<String> {
    let text = std::fs::read_to_string(path.parent()?.join(MANIFEST_FILE)).ok()?;
    let v: Value = serde_json::from_str(&text).ok()?;
    v.get("extractor")?.as_str().map(str::to_string)
}

pub fn write_json(stage: &str, path: &Path, value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).runtime(stage)?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::runtime(stage, anyhow::anyhow!("{}: {e}", path.display())))
}
