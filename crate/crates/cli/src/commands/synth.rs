use std::fmt::Write;
use std::path::Path;

use tractscope_core::synth::{generate_world, SynthConfig, SynthError};

use super::Ctx;
use crate::args::SynthArgs;
use crate::error::{CliError, CliResult, StageExt};

const STAGE: &str = "synth";
pub const PIPELINE_CONF: &str = "pipeline.conf";

/// Config for `pipeline run` over the world in `out`, paths relative to the
/// workdir.
fn pipeline_conf(out: &Path, cfg: &SynthConfig, world: &tractscope_core::synth::SynthWorld) -> String {
    let p = |rel: &Path| out.join(rel).display().to_string();
    let mut s = String::new();
    let _ = writeln!(s, "# synthetic world, seed {}", cfg.seed);
    let _ = writeln!(s, "tracts = {}", p(&world.tracts));
    let _ = writeln!(s, "cache = {}", p(&world.tile_cache));
    let _ = writeln!(s, "poi-fixture = {}", p(&world.poi_fixture));
    let _ = writeln!(s, "zoom = {}", cfg.zoom);
    let _ = writeln!(s, "tile-px = {}", cfg.image_px);
    let _ = writeln!(s, "offline = true");
    let _ = writeln!(s, "extractor = baseline");
    s
}

pub fn generate(ctx: &Ctx, a: &SynthArgs) -> CliResult<()> {
    let cfg = SynthConfig {
        seed: a.seed,
        n_tracts: a.n_tracts,
        target_r2: a.target_r2,
        noise_sd: a.noise_sd,
        image_px: a.image_px,
        zoom: a.zoom,
        missing_fraction: a.missing_fraction,
        ..SynthConfig::default()
    };
    let dir = ctx.out_dir(STAGE, &a.out)?;
    let world = generate_world(&cfg, &dir).map_err(|e| match e {
        SynthError::InvalidConfig(_) => CliError::input(STAGE, e),
        _ => CliError::runtime(STAGE, e),
    })?;
    log::info!(
        target: STAGE,
        "{} tracts, {} tiles, {} POI records; achieved R2 {:.4} (prevalence)",
        world.truth.len(),
        world.n_tiles,
        world.n_poi_records,
        world.prevalence.achieved_r2
    );
    std::fs::write(dir.join(PIPELINE_CONF), pipeline_conf(&a.out, &cfg, &world)).runtime(STAGE)?;
    ctx.stamp(a).seed(a.seed).write(STAGE, &dir)
}
