//! Unsupervised training against a bigram prior, compared with a supervised
//! model fitted on the same data. Writes the training trace to
//! `bigram_trace.csv` in the working directory.
//!
//! cargo run --release --example bigram_training -- [train_len]

use std::fs::File;
use std::io::BufWriter;

use spdg::cli::FLAGSHIP_TRANSITION;
use spdg::datagen::{EmissionSpec, GenerationSpec, LabelModel, SplitKind};
use spdg::objective::cost_of;
use spdg::prior::{bigram_from_transition, Prior, TransitionMatrix};
use spdg::trainer::{evaluate_error, spdg_train, supervised_train, Hyperparams, TrainingData};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map_or(50_000, |s| s.parse().expect("train_len"));
    let data = GenerationSpec {
        labels: LabelModel::Transition(FLAGSHIP_TRANSITION),
        emission: EmissionSpec::default(),
        sizes: [n, n / 10, n / 10],
        seed: 5,
    }
    .generate()?;
    let (train, train_y) = data.subset(SplitKind::Train);
    let (val, val_y) = data.subset(SplitKind::Val);
    let (test, test_y) = data.subset(SplitKind::Test);

    let prior = Prior::Bigram(bigram_from_transition(&TransitionMatrix::new(FLAGSHIP_TRANSITION)?)?);
    let hyper = Hyperparams::default();

    let sup = supervised_train(&train, &train_y, Some((&val, &val_y)), &hyper)?;
    let unsup = spdg_train(
        TrainingData { train: &train, val: &val, monitor: Some((&test, &test_y)) },
        &prior,
        &hyper,
    )?;

    let se = evaluate_error(&sup, &test, &test_y)?;
    let ue = evaluate_error(&unsup.params, &test, &test_y)?;
    println!("supervised   theta {:?} test error {:.2}%", sup.theta(), 100.0 * se.error_rate);
    println!("unsupervised theta {:?} test error {:.2}%", unsup.params.theta(), 100.0 * ue.error_rate);
    println!("validation J: supervised {:.5}, unsupervised {:.5}", cost_of(&prior, &sup, &val)?, unsup.val_cost);
    println!("restart costs {:?}, winner {}", unsup.restart_costs, unsup.restart);
    if ue.swap_flag {
        println!("labels came out swapped");
    }

    let path = "bigram_trace.csv";
    unsup.trace.write_csv(BufWriter::new(File::create(path)?))?;
    println!("trace: {path} ({} rows)", unsup.trace.rows.len());
    Ok(())
}
