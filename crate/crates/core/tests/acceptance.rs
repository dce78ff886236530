//! Acceptance criteria, one line each. Runs without the libtest harness so the
//! report is always printed; exits non-zero if any criterion fails.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spdg::cipher::{crack_shift, shift_decrypt, shift_encrypt, LetterHistogram};
use spdg::cli::{
    cmd_cipher, cmd_datagen, cmd_suite, cmd_surface, cmd_train, CipherCommand, ExperimentConfig, Mode, PriorSource,
    SurfaceMode, Which, FLAGSHIP_TRANSITION, SUITE_FILE, UNIGRAM_CONTROL,
};
use spdg::datagen::{derive_seed, EmissionSpec, GenerationSpec, LabelModel, DEFAULT_SIZES};
use spdg::model::{InputPoint, ModelParams};
use spdg::objective::{cost_j, dual_optimum, grad_dual, grad_theta, lagrangian, stats_for, DualVars, Table};
use spdg::prior::{bigram_from_transition, steady_state, BigramPrior, Prior, TransitionMatrix, UnigramPrior};
use spdg::surface::{anchor_duals, primal_dual_surface, GridSpec};
use spdg::trainer::{evaluate_error, prediction_share, spdg_train, supervised_train, Hyperparams, TrainingData};

const UNIGRAM_TARGET: f64 = 0.308;
const UNIGRAM_TOL: f64 = 0.03;
const MAJORITY_SHARE: f64 = 0.99;
const SUPERVISED_RANGE: (f64, f64) = (0.02, 0.06);
const FLAGSHIP_GAP: f64 = 0.02;
const SUITE_GAP: f64 = 0.015;
const SUITE_MIN_OK: usize = 8;
const FD_STEP: f64 = 1e-5;
const FD_TOL: f64 = 1e-5;
const FD_DRAWS: usize = 100;
const CONJUGATE_TOL: f64 = 1e-10;
const PANGRAM_PLAIN: &str = "THE QUICK BROWN FOX JUMPS OVER THE LAZY DOG";
const PANGRAM_CIPHER: &str = "QEB NRFZH YOLTK CLU GRJMP LSBO QEB IXWV ALD";
const CORPUS: &str = include_str!("../data/gettysburg.txt");

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Split<'a> {
    train: (&'a [InputPoint], &'a [u8]),
    val: (&'a [InputPoint], &'a [u8]),
    test: (&'a [InputPoint], &'a [u8]),
}

fn split(ds: &spdg::datagen::Dataset) -> Split<'_> {
    let r = ds.split_ranges().expect("generated splits are contiguous");
    let part = |rg: std::ops::Range<usize>| (&ds.inputs[rg.clone()], &ds.labels[rg]);
    Split {
        train: part(r.train),
        val: part(r.val),
        test: part(r.test),
    }
}

/// Supervised and unsupervised models on one generated dataset.
fn train_pair(labels: LabelModel, prior: &Prior, seed: u64) -> (spdg::datagen::Dataset, ModelParams, ModelParams) {
    let ds = GenerationSpec {
        labels,
        emission: EmissionSpec::default(),
        sizes: DEFAULT_SIZES,
        seed,
    }
    .generate()
    .unwrap();
    let hyper = Hyperparams::default();
    let s = split(&ds);
    let sup = supervised_train(s.train.0, s.train.1, Some(s.val), &hyper).unwrap();
    let data = TrainingData {
        train: s.train.0,
        val: s.val.0,
        monitor: None,
    };
    let unsup = spdg_train(data, prior, &hyper).unwrap().params;
    (ds, sup, unsup)
}

fn unigram_collapse() -> Outcome {
    let start = Instant::now();
    let prior = Prior::Unigram(UnigramPrior::new(UNIGRAM_CONTROL[0], UNIGRAM_CONTROL[1]).unwrap());
    let (ds, _, unsup) = train_pair(LabelModel::Unigram(UNIGRAM_CONTROL), &prior, derive_seed(0, 0));
    let s = split(&ds);
    let err = evaluate_error(&unsup, s.test.0, s.test.1).unwrap().error_rate;
    let share = prediction_share(&unsup, s.test.0, 0).unwrap();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        (err - UNIGRAM_TARGET).abs() <= UNIGRAM_TOL && share >= MAJORITY_SHARE && secs <= 600.0,
        format!(
            "test error {:.2}% (target 30.8 +/- 3), majority share {:.2}% (>= 99), {secs:.1}s (<= 600)",
            100.0 * err,
            100.0 * share
        ),
    )
}

fn flagship_bigram() -> (Outcome, Option<(spdg::datagen::Dataset, ModelParams)>) {
    let start = Instant::now();
    let prior = Prior::Bigram(bigram_from_transition(&TransitionMatrix::new(FLAGSHIP_TRANSITION).unwrap()).unwrap());
    let (ds, sup, unsup) = train_pair(LabelModel::Transition(FLAGSHIP_TRANSITION), &prior, derive_seed(0, 2));
    let s = split(&ds);
    let se = evaluate_error(&sup, s.test.0, s.test.1).unwrap().error_rate;
    let ue = evaluate_error(&unsup, s.test.0, s.test.1).unwrap().error_rate;
    let secs = start.elapsed().as_secs_f64();
    let pass = (SUPERVISED_RANGE.0..=SUPERVISED_RANGE.1).contains(&se) && (ue - se).abs() <= FLAGSHIP_GAP && secs <= 1800.0;
    (
        outcome(
            pass,
            format!(
                "supervised {:.2}% (in [2, 6]), unsupervised {:.2}%, gap {:.2} points (<= 2), {secs:.1}s (<= 1800)",
                100.0 * se,
                100.0 * ue,
                100.0 * (ue - se).abs()
            ),
        ),
        Some((ds, sup)),
    )
}

fn suite(dir: &Path) -> Outcome {
    let cfg = ExperimentConfig {
        out_dir: dir.to_path_buf(),
        ..ExperimentConfig::default()
    };
    let report = cmd_suite(&cfg, false).unwrap();
    let (ok, n) = report.gaps_within(SUITE_GAP);
    let gaps: Vec<String> = report
        .rows
        .iter()
        .filter(|r| r.dataset != "unigram")
        .map(|r| match &r.result {
            Ok(v) => format!("{:.2}", 100.0 * v.gap()),
            Err(_) => "fail".to_string(),
        })
        .collect();
    outcome(
        ok >= SUITE_MIN_OK,
        format!("{ok}/{n} gaps <= 1.5 points (need >= 8); gaps {}", gaps.join(" ")),
    )
}

fn random_prior(rng: &mut ChaCha8Rng, bigram: bool) -> Prior {
    if bigram {
        let w: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.05..1.0));
        let s: f64 = w.iter().sum();
        Prior::Bigram(BigramPrior::new([[w[0] / s, w[1] / s], [w[2] / s, w[3] / s]]).unwrap())
    } else {
        let p = rng.gen_range(0.05..0.95);
        Prior::Unigram(UnigramPrior::new(p, 1.0 - p).unwrap())
    }
}

fn random_case(rng: &mut ChaCha8Rng, bigram: bool) -> (Prior, ModelParams, Vec<InputPoint>) {
    let prior = random_prior(rng, bigram);
    let params = ModelParams::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)).with_bias(rng.gen_range(-0.5..0.5));
    let n = rng.gen_range(2..12);
    let xs = (0..n)
        .map(|_| InputPoint::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
        .collect();
    (prior, params, xs)
}

fn random_duals(rng: &mut ChaCha8Rng, bigram: bool) -> DualVars {
    let mut v = || rng.gen_range(-5.0..-0.2);
    DualVars::new(if bigram {
        Table::Bigram([[v(), v()], [v(), v()]])
    } else {
        Table::Unigram([v(), v()])
    })
    .unwrap()
}

fn nudge(d: &DualVars, k: usize, delta: f64) -> DualVars {
    let mut t = *d.table();
    match &mut t {
        Table::Unigram(u) => u[k] += delta,
        Table::Bigram(b) => b[k / 2][k % 2] += delta,
    }
    DualVars::new(t).unwrap()
}

fn rel(fd: f64, an: f64) -> f64 {
    (fd - an).abs() / an.abs().max(fd.abs()).max(1e-3)
}

fn gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = [0.0f64; 2];
    for (m, bigram) in [false, true].into_iter().enumerate() {
        for _ in 0..FD_DRAWS {
            let (prior, p, xs) = random_case(&mut rng, bigram);
            let d = random_duals(&mut rng, bigram);
            let l = |p: &ModelParams, d: &DualVars| lagrangian(p, d, &xs, &prior).unwrap();
            let gt = grad_theta(&p, &d, &xs, &prior).unwrap();
            for (k, &an) in gt.iter().enumerate() {
                let (mut tp, mut tm) = (p.theta(), p.theta());
                tp[k] += FD_STEP;
                tm[k] -= FD_STEP;
                let fd = (l(&p.with_theta(tp), &d) - l(&p.with_theta(tm), &d)) / (2.0 * FD_STEP);
                worst[m] = worst[m].max(rel(fd, an));
            }
            let gd = grad_dual(&p, &d, &xs, &prior).unwrap();
            for (k, &an) in gd.entries().iter().enumerate() {
                let fd = (l(&p, &nudge(&d, k, FD_STEP)) - l(&p, &nudge(&d, k, -FD_STEP))) / (2.0 * FD_STEP);
                worst[m] = worst[m].max(rel(fd, an));
            }
        }
    }
    outcome(
        worst.iter().all(|&w| w <= FD_TOL),
        format!(
            "max relative error unigram {:.2e}, bigram {:.2e} over {FD_DRAWS} draws each (<= 1e-5)",
            worst[0], worst[1]
        ),
    )
}

fn conjugate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut increases = 0;
    for i in 0..100 {
        let (prior, p, xs) = random_case(&mut rng, i % 2 == 1);
        let stats = stats_for(&prior, &p, &xs).unwrap();
        let v0 = dual_optimum(&stats).unwrap();
        let l0 = lagrangian(&p, &v0, &xs, &prior).unwrap();
        worst = worst.max((l0 - (cost_j(&prior, &stats).unwrap() - 1.0)).abs());
        // relative steps: L changes by p (ln(1 + c) - c), never below rounding
        for (k, &v) in v0.entries().iter().enumerate() {
            for c in [-0.5, -1e-2, 1e-2, 2.0] {
                if lagrangian(&p, &nudge(&v0, k, c * v), &xs, &prior).unwrap() >= l0 {
                    increases += 1;
                }
            }
        }
    }
    outcome(
        worst <= CONJUGATE_TOL && increases == 0,
        format!("max |L(theta, V*) - (J - 1)| = {worst:.2e} (<= 1e-10), perturbations not decreasing L: {increases}"),
    )
}

fn prior_values() -> Outcome {
    let t = TransitionMatrix::new(FLAGSHIP_TRANSITION).unwrap();
    let pi = steady_state(&t).unwrap();
    let b = bigram_from_transition(&t).unwrap().matrix();
    let expect = [[0.4154, 0.2769], [0.2769, 0.0308]];
    let pi_ok = (pi[0] - 0.692).abs() < 5e-4 && (pi[1] - 0.308).abs() < 5e-4;
    let b_ok = (0..4).all(|k| (b[k / 2][k % 2] - expect[k / 2][k % 2]).abs() < 5e-5);
    outcome(
        pi_ok && b_ok,
        format!(
            "steady state ({:.3}, {:.3}), bigram [[{:.4}, {:.4}], [{:.4}, {:.4}]]",
            pi[0], pi[1], b[0][0], b[0][1], b[1][0], b[1][1]
        ),
    )
}

fn cipher() -> Outcome {
    let reference = LetterHistogram::english();
    let recovered = (0..26u8)
        .filter(|&s| {
            let c = shift_encrypt(CORPUS, s).unwrap();
            let crack = crack_shift(&c, &reference).unwrap();
            crack.shift == s && shift_decrypt(&c, crack.shift).unwrap() == CORPUS
        })
        .count();
    let letters = CORPUS.bytes().filter(u8::is_ascii_alphabetic).count();
    let pangram = shift_encrypt(PANGRAM_PLAIN, 3).unwrap() == PANGRAM_CIPHER;
    outcome(
        recovered == 26 && pangram && letters >= 500,
        format!("{recovered}/26 shifts recovered on a {letters}-letter corpus; pangram under shift 3 matches: {pangram}"),
    )
}

fn surface(data: Option<(spdg::datagen::Dataset, ModelParams)>) -> Outcome {
    let Some((ds, theta0)) = data else {
        return outcome(false, "no flagship model".into());
    };
    let s = split(&ds);
    let prior = Prior::Bigram(bigram_from_transition(&TransitionMatrix::new(FLAGSHIP_TRANSITION).unwrap()).unwrap());
    let v0 = anchor_duals(&theta0, s.train.0, &prior).unwrap();
    let grid = GridSpec::default();
    let g = primal_dual_surface(&theta0, &v0, s.train.0, &prior, &grid, 0).unwrap();
    let j = cost_j(&prior, &stats_for(&prior, &theta0, s.train.0).unwrap()).unwrap();
    let anchor = g.anchor_value().unwrap();
    let i0 = g.axis1.iter().position(|&l| l == 0.0).unwrap();
    let j0 = g.axis2.iter().position(|&l| l == 0.0).unwrap();
    let slice = &g.z[i0];
    let argmax = (0..slice.len())
        .filter(|&k| slice[k].is_finite())
        .max_by(|&a, &b| slice[a].total_cmp(&slice[b]))
        .unwrap();
    let diff = (anchor - (j - 1.0)).abs();
    outcome(
        diff <= CONJUGATE_TOL && argmax == j0,
        format!(
            "81x81 grid: |z(0,0) - (J - 1)| = {diff:.2e} (<= 1e-10), dual slice argmax at lambda = {}",
            g.axis2[argmax]
        ),
    )
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            let bytes = fs::read(&p).unwrap();
            (p.file_name().unwrap().to_string_lossy().into_owned(), bytes)
        })
        .collect();
    files.sort();
    files
}

/// Drops `# timestamp` metadata lines before comparing.
fn strip_timestamps(bytes: &[u8]) -> Vec<u8> {
    String::from_utf8_lossy(bytes)
        .lines()
        .filter(|l| !l.starts_with("# timestamp"))
        .collect::<Vec<_>>()
        .join("\n")
        .into_bytes()
}

fn run_every_command(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut hyper = Hyperparams {
        max_steps: 20_000,
        eval_every: 2_000,
        restarts: 2,
        ..Hyperparams::default()
    };
    hyper.seed = 11;
    let cfg = ExperimentConfig {
        sizes: [3000, 500, 500],
        seed: 21,
        hyper,
        out_dir: dir.to_path_buf(),
        ..ExperimentConfig::default()
    };
    cmd_datagen(&cfg).unwrap();
    let data = dir.join("data.csv");
    cmd_train(&cfg, &data, Which::Both).unwrap();
    let model = dir.join("model_supervised.json");
    let grid = GridSpec::square(-2.0, 2.0, 21);
    cmd_surface(&cfg, Some(&model), &data, SurfaceMode::Primal, &grid, 3, None).unwrap();
    cmd_surface(&cfg, Some(&model), &data, SurfaceMode::PrimalDual, &grid, 3, None).unwrap();
    let unigram = ExperimentConfig {
        mode: Mode::Unigram,
        prior: PriorSource::Unigram(UNIGRAM_CONTROL),
        out_dir: dir.join("unigram"),
        ..cfg.clone()
    };
    cmd_datagen(&unigram).unwrap();
    cmd_train(&unigram, &dir.join("unigram/data.csv"), Which::Unsupervised).unwrap();
    cmd_suite(&ExperimentConfig { out_dir: dir.join("suite"), ..cfg.clone() }, false).unwrap();
    let cipher = cmd_cipher(
        &CipherCommand::Crack {
            reference: None,
            criterion: Default::default(),
        },
        &shift_encrypt(CORPUS, 7).unwrap(),
    )
    .unwrap();
    fs::write(dir.join("crack.txt"), cipher).unwrap();

    let mut files = read_all(dir);
    for sub in ["unigram", "suite"] {
        files.extend(read_all(&dir.join(sub)).into_iter().map(|(n, b)| (format!("{sub}/{n}"), b)));
    }
    files
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let fa = run_every_command(a.path());
    let fb = run_every_command(b.path());
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    let same = fa.len() == fb.len()
        && fa
            .iter()
            .zip(&fb)
            .all(|((na, ba), (nb, bb))| na == nb && strip_timestamps(ba) == strip_timestamps(bb));
    let has_suite = names.contains(&format!("suite/{SUITE_FILE}").as_str());
    outcome(
        same && has_suite && fa.len() >= 12,
        format!("{} files byte-identical across two runs: {same}", fa.len()),
    )
}

fn main() {
    let suite_dir = tempfile::tempdir().unwrap();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 unigram majority collapse", unigram_collapse()));
    let (flagship, model) = flagship_bigram();
    results.push(("2 bigram flagship chain", flagship));
    results.push(("3 ten-dataset suite", suite(suite_dir.path())));
    results.push(("4 gradient finite differences", gradients()));
    results.push(("5 conjugate identity", conjugate()));
    results.push(("6 steady state and bigram prior", prior_values()));
    results.push(("7 cipher round trip", cipher()));
    results.push(("8 primal-dual surface anchor", surface(model)));
    results.push(("9 determinism", determinism()));

    println!();
    for (name, o) in &results {
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed = results.iter().filter(|(_, o)| !o.pass).count();
    println!("\nacceptance: {}/{} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
