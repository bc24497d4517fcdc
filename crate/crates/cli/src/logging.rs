use std::io::Write;

use log::LevelFilter;

/// Stage label for a log target: CLI stages log under their own name, core
/// modules under their top-level module.
fn stage_of(target: &str) -> &str {
    match target.strip_prefix("tractscope_core::") {
        Some(rest) => rest.split("::").next().unwrap_or(rest),
        None => target.split("::").next().unwrap_or(target),
    }
}

/// `level ts stage message` lines on stderr.
pub fn init(level: LevelFilter) {
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .format(|buf, record| {
            writeln!(
                buf,
                "{} {} {} {}",
                record.level(),
                chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
                stage_of(record.target()),
                record.args()
            )
        })
        .try_init();
}

#[cfg(test)]
mod tests {
    use super::stage_of;

    #[test]
    fn stages() {
        assert_eq!(stage_of("tractscope_core::acquisition::tiles"), "acquisition");
        assert_eq!(stage_of("features"), "features");
        assert_eq!(stage_of("ureq::unversioned"), "ureq");
    }
}
