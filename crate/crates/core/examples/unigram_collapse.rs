//! Training against a unigram prior on i.i.d. labels: the statistic carries
//! no sequential information, so the classifier drifts to predicting the
//! majority class everywhere.
//!
//! cargo run --release --example unigram_collapse -- [train_len]

use spdg::cli::UNIGRAM_CONTROL;
use spdg::datagen::{EmissionSpec, GenerationSpec, LabelModel, SplitKind};
use spdg::prior::{Prior, UnigramPrior};
use spdg::trainer::{evaluate_error, prediction_share, spdg_train, Hyperparams, TrainingData};

fn main() -> spdg::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(50_000, |s| s.parse().expect("train_len"));
    let data = GenerationSpec {
        labels: LabelModel::Unigram(UNIGRAM_CONTROL),
        emission: EmissionSpec::default(),
        sizes: [n, n / 10, n / 10],
        seed: 3,
    }
    .generate()?;
    let (train, _) = data.subset(SplitKind::Train);
    let (val, _) = data.subset(SplitKind::Val);
    let (test, test_y) = data.subset(SplitKind::Test);

    let prior = Prior::Unigram(UnigramPrior::new(UNIGRAM_CONTROL[0], UNIGRAM_CONTROL[1])?);
    let hyper = Hyperparams::default();
    let out = spdg_train(TrainingData { train: &train, val: &val, monitor: None }, &prior, &hyper)?;

    let err = evaluate_error(&out.params, &test, &test_y)?;
    println!("theta {:?}", out.params.theta());
    println!("validation J {:.5} after {} steps", out.val_cost, out.steps_run);
    println!("test error {:.2}%", 100.0 * err.error_rate);
    println!("share predicted as class 0: {:.2}%", 100.0 * prediction_share(&out.params, &test, 0)?);
    Ok(())
}
