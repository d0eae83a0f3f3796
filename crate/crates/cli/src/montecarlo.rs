use fcsmm::mc::run_design;

use crate::config::RunConfig;
use crate::csvio::write_text;
use crate::error::CliError;
use crate::Ctx;

pub fn cmd_montecarlo(cfg: &RunConfig, ctx: &Ctx) -> Result<(), CliError> {
    let mut design = cfg
        .montecarlo
        .clone()
        .ok_or_else(|| CliError::Config("montecarlo needs a [montecarlo] section".into()))?;
    if let Some(seed) = ctx.seed_override {
        design.seed = seed;
    }
    design.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let summary = run_design(&design)?;
    for (r, msg) in &summary.failures {
        eprintln!("replication {r} failed: {msg}");
    }
    write_text(&ctx.out.join("mc_summary.csv"), &summary.to_csv())?;
    write_text(&ctx.out.join("mc_summary.txt"), &format!("{}{}", summary.settings_header(), summary.to_table()))?;
    write_text(&ctx.out.join("mc_replications.csv"), &summary.replications_csv())?;
    print!("{}", summary.to_table());
    eprintln!("wall time {:.1} s", summary.wall_time.as_secs_f64());
    Ok(())
}
