//! Drives a subcommand from a config file, as the `gfkit` binary does.
//! Usage: `cargo run --example run_config -- configs/log-gate.json`.

use std::path::PathBuf;

use gfkit::cli::{run, Command};

fn main() {
    let config = std::env::args()
        .nth(1)
        .map_or_else(|| PathBuf::from("configs/log-gate.json"), PathBuf::from);
    let report = run(&Command::CheckH { config }, Some(1));
    println!(
        "exit code {}, manifest in {}",
        report.exit_code,
        report.out_dir.display()
    );
    println!("files: {:?}", report.manifest.files);
}
