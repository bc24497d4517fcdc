mod args;
mod commands;
mod config;
mod error;
mod logging;
mod manifest;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use crate::args::Cli;
use crate::commands::{dispatch, now, Ctx};
use crate::config::{inject, load_config, prescan};

fn run(argv: Vec<OsString>) -> u8 {
    let started_at = now();
    let cmd = Cli::command();
    let pre = prescan(&cmd, &argv);

    let config_path = pre.config.as_ref().map(|p| {
        if p.is_absolute() {
            p.clone()
        } else {
            pre.workdir.join(p)
        }
    });
    let config = match config_path.as_deref().map(load_config).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: config: {e:#}");
            return 1;
        }
    };
    let argv = match inject(&cmd, &pre.path, &argv, &config) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: config: {e:#}");
            return 1;
        }
    };

    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    logging::init(cli.log_level);

    let jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let workdir = match std::path::absolute(&cli.workdir) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: --workdir {}: {e}", cli.workdir.display());
            return 1;
        }
    };
    let ctx = Ctx {
        workdir,
        jobs,
        argv: argv.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
        command: pre.path.join(" "),
        config_file: config_path.map(|p| std::path::absolute(&p).unwrap_or(p)),
        config,
        started_at,
    };
    let stage = cli.command.stage();
    log::debug!(target: stage, "running with {jobs} worker threads");
    match tractscope_core::par::with_threads(jobs, || dispatch(&ctx, &cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            if log::log_enabled!(target: &e.stage, log::Level::Error) {
                log::error!(target: &e.stage, "{:#}", e.source);
            } else {
                eprintln!("error: {e}");
            }
            e.exit_code()
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os().collect()))
}
