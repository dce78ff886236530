//! Sample a labelled sequence from a two-state Markov chain with Gaussian
//! emissions and compare its empirical statistics with the chain.
//!
//! cargo run --release --example datagen -- [length]

use spdg::cli::FLAGSHIP_TRANSITION;
use spdg::datagen::{EmissionSpec, GenerationSpec, LabelModel, SplitKind};
use spdg::prior::{bigram_from_labels, bigram_from_transition, steady_state, TransitionMatrix};

fn main() -> spdg::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(60_000, |s| s.parse().expect("length"));
    let spec = GenerationSpec {
        labels: LabelModel::Transition(FLAGSHIP_TRANSITION),
        emission: EmissionSpec::default(),
        sizes: [n - 2 * (n / 12), n / 12, n / 12],
        seed: 1,
    };
    let data = spec.generate()?;
    println!("sizes {:?}", data.split_sizes());

    let trans = TransitionMatrix::new(FLAGSHIP_TRANSITION)?;
    println!("steady state      {:?}", steady_state(&trans)?);
    println!("joint from chain  {:?}", bigram_from_transition(&trans)?.matrix());
    println!("joint from sample {:?}", bigram_from_labels(&data.labels)?.matrix());

    let (xs, ys) = data.subset(SplitKind::Train);
    for class in 0..2u8 {
        let pts: Vec<_> = xs.iter().zip(&ys).filter(|(_, &y)| y == class).map(|(x, _)| x).collect();
        let m = pts.len() as f64;
        let mean_a = pts.iter().map(|p| p.x_a).sum::<f64>() / m;
        let mean_b = pts.iter().map(|p| p.x_b).sum::<f64>() / m;
        println!("class {class}: n={} mean=({mean_a:.3}, {mean_b:.3})", pts.len());
    }

    let mut head = Vec::new();
    data.write_csv(&mut head).expect("csv");
    let text = String::from_utf8(head).expect("utf8");
    for line in text.lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
