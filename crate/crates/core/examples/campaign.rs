//! Runs the campaign described in `examples/campaign.txt` and lists the
//! files it wrote.
//!
//! ```text
//! cargo run --release --example campaign -- [config] [out-dir]
//! ```

use std::path::PathBuf;

use feasible_paths::campaign::{run_campaign, CampaignConfig};
use feasible_paths::Result;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let config_path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/campaign.txt"));
    let mut config = CampaignConfig::from_file(&config_path)?;
    config.out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("feasible-paths-campaign"));

    let outcome = run_campaign(&config)?;
    for record in outcome.matrix.records() {
        println!(
            "{:<16} {:<16} f={:<14.6} n_f={:<6} n_p={:<6} {}",
            record.problem, record.solver, record.f_best, record.n_f, record.n_p, record.terminated
        );
    }
    for (problem, solver, message) in &outcome.failures {
        println!("failed: {problem} {solver}: {message}");
    }
    println!("wrote {} files under {}", outcome.files.len(), config.out.display());
    Ok(())
}
