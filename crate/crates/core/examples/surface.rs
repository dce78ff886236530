//! Cost and Lagrangian surfaces around a supervised solution, written as CSV
//! for plotting.
//!
//! cargo run --release --example surface -- [grid_n]

use std::fs::File;
use std::io::BufWriter;

use spdg::cli::FLAGSHIP_TRANSITION;
use spdg::datagen::{EmissionSpec, GenerationSpec, LabelModel, SplitKind};
use spdg::prior::{bigram_from_transition, Prior, TransitionMatrix};
use spdg::surface::{anchor_duals, primal_dual_surface, primal_surface, GridSpec, SurfaceGrid};
use spdg::trainer::{supervised_train, Hyperparams};

fn summarize(name: &str, g: &SurfaceGrid) {
    let finite: Vec<f64> = g.z.iter().flatten().copied().filter(|z| z.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cells = g.z.len() * g.axis2.len();
    println!(
        "{name}: {} of {cells} cells finite, range [{lo:.4}, {hi:.4}], anchor {:.5}",
        finite.len(),
        g.anchor_value().unwrap_or(f64::NAN)
    );
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map_or(41, |s| s.parse().expect("grid_n"));
    let data = GenerationSpec {
        labels: LabelModel::Transition(FLAGSHIP_TRANSITION),
        emission: EmissionSpec::default(),
        sizes: [20_000, 2_000, 2_000],
        seed: 11,
    }
    .generate()?;
    let (train, train_y) = data.subset(SplitKind::Train);
    let prior = Prior::Bigram(bigram_from_transition(&TransitionMatrix::new(FLAGSHIP_TRANSITION)?)?);
    let theta0 = supervised_train(&train, &train_y, None, &Hyperparams::default())?;
    let grid = GridSpec::square(-5.0, 5.0, n);

    let primal = primal_surface(&theta0, &train, &prior, &grid)?;
    summarize("J(w_a + l1, w_b + l2)", &primal);
    primal.write_csv(BufWriter::new(File::create("surface_primal.csv")?))?;

    let v0 = anchor_duals(&theta0, &train, &prior)?;
    let pd = primal_dual_surface(&theta0, &v0, &train, &prior, &grid, 1)?;
    summarize("L(theta0 + l1 d, V0 + l2 e)", &pd);
    pd.write_csv(BufWriter::new(File::create("surface_primal_dual.csv")?))?;
    println!("wrote surface_primal.csv and surface_primal_dual.csv");
    Ok(())
}
