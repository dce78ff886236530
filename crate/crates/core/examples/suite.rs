//! The ten-dataset comparison of supervised and unsupervised error, plus the
//! unigram control. Full size takes several minutes; pass a smaller training
//! length for a quick look.
//!
//! cargo run --release --example suite -- [train_len]

use spdg::cli::{cmd_suite, ExperimentConfig};

fn main() -> spdg::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(50_000, |s| s.parse().expect("train_len"));
    let dir = std::env::temp_dir().join("spdg-suite-example");
    let cfg = ExperimentConfig {
        sizes: [n, n / 10, n / 10],
        out_dir: dir,
        ..ExperimentConfig::default()
    };
    let report = cmd_suite(&cfg, true)?;
    println!("{report}");
    let (ok, total) = report.gaps_within(0.015);
    println!("{ok}/{total} datasets within 1.5 points of supervised");
    Ok(())
}
