use tractscope_core::eval::{emit_outputs, EvalRun};

use super::{load_tracts, read_input, Ctx};
use crate::args::EmitArgs;
use crate::error::{CliError, CliResult, StageExt};

const STAGE: &str = "report";

pub fn emit(ctx: &Ctx, a: &EmitArgs) -> CliResult<()> {
    let t = load_tracts(ctx, STAGE, &a.tracts)?;
    let eval_path = ctx.resolve(&a.evaluation);
    let run: EvalRun = serde_json::from_slice(&read_input(STAGE, &eval_path)?)
        .map_err(|e| CliError::input(STAGE, anyhow::anyhow!("{}: {e}", eval_path.display())))?;
    let out = ctx.out_dir(STAGE, &a.out)?;
    let files = emit_outputs(&run, &t.collection, &a.tracts.property_map(), &out).runtime(STAGE)?;
    log::info!(
        target: STAGE,
        "wrote {}, {}, {}",
        files.scatter.display(),
        files.choropleth.display(),
        files.report_csv.display()
    );
    ctx.stamp(a)
        .seed(run.fit.seed)
        .input("tracts", &t.path)
        .input("evaluation", &eval_path)
        .write(STAGE, &out)
}
