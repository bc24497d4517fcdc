use tractscope_core::acquisition::decode_image;
use tractscope_core::cnn::{activation_maps, preprocess, write_pgm};

use super::features::load_network;
use super::{read_input, Ctx};
use crate::args::ActivationsArgs;
use crate::error::{CliError, CliResult, StageExt};

const STAGE: &str = "net";

pub fn activations(ctx: &Ctx, a: &ActivationsArgs) -> CliResult<()> {
    let network = load_network(ctx, STAGE, &a.weights, Some(&a.layer))?;
    let image_path = ctx.resolve(&a.image);
    let image = decode_image(&read_input(STAGE, &image_path)?)
        .map_err(|e| CliError::input(STAGE, anyhow::anyhow!("{}: {e}", image_path.display())))?;
    let input = preprocess(&image, &network.net).input(STAGE)?;
    let grids = activation_maps(&network.net, &input, &network.layer).input(STAGE)?;

    let out = ctx.out_dir(STAGE, &a.out)?;
    for g in &grids {
        let path = out.join(format!("{}_c{:03}.pgm", network.layer, g.channel));
        write_pgm(g, &path).runtime(STAGE)?;
    }
    log::info!(target: STAGE, "{} activation maps of layer {}", grids.len(), network.layer);
    ctx.stamp(a)
        .input("weights", &ctx.resolve(&a.weights))
        .input("image", &image_path)
        .write(STAGE, &out)
}
