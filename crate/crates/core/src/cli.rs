//! Experiment configuration and the operations behind the `spdg` command.
//!
//! Every command writes its artifacts under the configured output directory
//! and returns a report whose `Display` form is what the binary prints.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cipher::{crack_shift_with, shift_decrypt, shift_encrypt, Criterion, LetterHistogram};
use crate::datagen::{derive_seed, Dataset, EmissionSpec, GenerationSpec, LabelModel, SplitKind, DEFAULT_SIZES};
use crate::error::{Error, Result};
use crate::model::{InputPoint, Mat2, ModelParams};
use crate::objective::cost_of;
use crate::prior::{
    bigram_from_labels, bigram_from_transition, steady_state, unigram_from_labels, Prior, TransitionMatrix,
    UnigramPrior,
};
use crate::surface::{anchor_duals, primal_dual_surface, primal_surface, GridSpec};
use crate::trainer::{
    evaluate_error, prediction_share, spdg_train, supervised_train, ErrorReport, Hyperparams, TrainingData,
};

pub const DATA_FILE: &str = "data.csv";
pub const SPEC_FILE: &str = "data.spec.json";
pub const SUPERVISED_MODEL_FILE: &str = "model_supervised.json";
pub const UNSUPERVISED_MODEL_FILE: &str = "model_unsupervised.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const SUITE_FILE: &str = "suite.csv";

pub const FLAGSHIP_TRANSITION: Mat2 = [[0.6, 0.4], [0.9, 0.1]];

/// The ten transition matrices of the bigram benchmark, dataset 1 first.
pub const SUITE_TRANSITIONS: [Mat2; 10] = [
    [[0.1, 0.9], [0.8, 0.2]],
    [[0.6, 0.4], [0.9, 0.1]],
    [[0.2, 0.8], [0.5, 0.5]],
    [[0.3, 0.7], [0.4, 0.6]],
    [[0.4, 0.6], [0.1, 0.9]],
    [[0.5, 0.5], [0.7, 0.3]],
    [[0.7, 0.3], [0.8, 0.2]],
    [[0.8, 0.2], [0.4, 0.6]],
    [[0.5, 0.5], [0.4, 0.6]],
    [[0.9, 0.1], [0.3, 0.7]],
];

/// Label prior of the unigram control run.
pub const UNIGRAM_CONTROL: [f64; 2] = [0.692, 0.308];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Unigram,
    Bigram,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unigram" => Ok(Mode::Unigram),
            "bigram" => Ok(Mode::Bigram),
            _ => Err(Error::invalid(format!("unknown mode {s:?} (unigram or bigram)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Unigram => "unigram",
            Mode::Bigram => "bigram",
        })
    }
}

/// Where the training prior comes from. A transition matrix also drives data
/// generation; in unigram mode its steady state is used as the prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorSource {
    Transition(Mat2),
    Unigram([f64; 2]),
    /// Estimated from the training labels.
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub prior: PriorSource,
    pub emission: EmissionSpec,
    /// Train, validation and test lengths.
    pub sizes: [usize; 3],
    pub hyper: Hyperparams,
    /// Data generation seed; training uses `hyper.seed`.
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Bigram,
            prior: PriorSource::Transition(FLAGSHIP_TRANSITION),
            emission: EmissionSpec::default(),
            sizes: DEFAULT_SIZES,
            hyper: Hyperparams::default(),
            seed: 0,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::invalid(format!("experiment config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&read_text(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialize")
    }

    pub fn validate(&self) -> Result<()> {
        self.emission.validate()?;
        self.hyper.validate(self.mode == Mode::Bigram)?;
        if self.sizes.iter().sum::<usize>() == 0 {
            return Err(Error::invalid("sizes sum to zero"));
        }
        if let (Mode::Bigram, PriorSource::Unigram(_)) = (self.mode, self.prior) {
            return Err(Error::invalid("bigram mode needs a transition or empirical prior"));
        }
        Ok(())
    }

    pub fn generation_spec(&self) -> Result<GenerationSpec> {
        let labels = match self.prior {
            PriorSource::Transition(m) => LabelModel::Transition(m),
            PriorSource::Unigram(p) => LabelModel::Unigram(p),
            PriorSource::Empirical => {
                return Err(Error::invalid("an empirical prior cannot generate labels"));
            }
        };
        Ok(GenerationSpec {
            labels,
            emission: self.emission,
            sizes: self.sizes,
            seed: self.seed,
        })
    }

    /// Training prior; `train_labels` is only read for an empirical source.
    pub fn prior_for(&self, train_labels: &[u8]) -> Result<Prior> {
        Ok(match (self.mode, self.prior) {
            (Mode::Bigram, PriorSource::Transition(m)) => {
                Prior::Bigram(bigram_from_transition(&TransitionMatrix::new(m)?)?)
            }
            (Mode::Unigram, PriorSource::Transition(m)) => {
                let pi = steady_state(&TransitionMatrix::new(m)?)?;
                Prior::Unigram(UnigramPrior::new(pi[0], pi[1])?)
            }
            (Mode::Unigram, PriorSource::Unigram(p)) => Prior::Unigram(UnigramPrior::new(p[0], p[1])?),
            (Mode::Bigram, PriorSource::Unigram(_)) => {
                return Err(Error::invalid("bigram mode needs a transition or empirical prior"));
            }
            (Mode::Unigram, PriorSource::Empirical) => Prior::Unigram(unigram_from_labels(train_labels)?),
            (Mode::Bigram, PriorSource::Empirical) => Prior::Bigram(bigram_from_labels(train_labels)?),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Dataset::read_csv(std::io::BufReader::new(file))
}

pub fn load_model(path: &Path) -> Result<ModelParams> {
    ModelParams::from_json(&read_text(path)?)
}

fn dataset_csv(ds: &Dataset) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    ds.write_csv(&mut buf)
        .map_err(|e| Error::invalid(format!("writing dataset: {e}")))?;
    Ok(buf)
}

fn fmt_mat(m: &Mat2) -> String {
    format!("[[{:.4}, {:.4}], [{:.4}, {:.4}]]", m[0][0], m[0][1], m[1][0], m[1][1])
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatagenSummary {
    pub data_path: PathBuf,
    pub spec_path: PathBuf,
    pub rows: usize,
    pub split_sizes: [usize; 3],
    pub label_freq: [f64; 2],
    pub pair_freq: Option<Mat2>,
}

impl fmt::Display for DatagenSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "wrote {} ({} rows)", self.data_path.display(), self.rows)?;
        writeln!(f, "wrote {}", self.spec_path.display())?;
        let [tr, va, te] = self.split_sizes;
        writeln!(f, "splits: train={tr} val={va} test={te}")?;
        write!(
            f,
            "label frequency: [{:.4}, {:.4}]",
            self.label_freq[0], self.label_freq[1]
        )?;
        if let Some(m) = &self.pair_freq {
            write!(f, "\nempirical bigram: {}", fmt_mat(m))?;
        }
        Ok(())
    }
}

/// Generates a dataset from the configured label model and writes the CSV and
/// its generation spec.
pub fn cmd_datagen(cfg: &ExperimentConfig) -> Result<DatagenSummary> {
    cfg.emission.validate()?;
    let spec = cfg.generation_spec()?;
    let ds = spec.generate()?;
    let data_path = cfg.path(DATA_FILE);
    let spec_path = cfg.path(SPEC_FILE);
    write_file(&data_path, &dataset_csv(&ds)?)?;
    write_file(&spec_path, format!("{}\n", spec.to_json()).as_bytes())?;
    let u = unigram_from_labels(&ds.labels)?.probs();
    let pair_freq = if ds.len() >= 2 {
        Some(bigram_from_labels(&ds.labels)?.matrix())
    } else {
        None
    };
    Ok(DatagenSummary {
        data_path,
        spec_path,
        rows: ds.len(),
        split_sizes: ds.split_sizes(),
        label_freq: u,
        pair_freq,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Supervised,
    Unsupervised,
    Both,
}

impl FromStr for Which {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "supervised" | "sup" => Ok(Which::Supervised),
            "unsupervised" | "unsup" => Ok(Which::Unsupervised),
            "both" => Ok(Which::Both),
            _ => Err(Error::invalid(format!("unknown training choice {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub mode: Mode,
    pub supervised: Option<ErrorReport>,
    pub unsupervised: Option<ErrorReport>,
    /// Validation cost of the returned unsupervised model.
    pub val_cost: Option<f64>,
    /// Largest share of test points given the same label by the unsupervised model.
    pub majority_share: Option<f64>,
    pub restart: Option<u32>,
}

impl TrainReport {
    pub fn gap(&self) -> Option<f64> {
        Some((self.unsupervised?.error_rate - self.supervised?.error_rate).abs())
    }
}

impl fmt::Display for TrainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "mode={}", self.mode)?;
        if let Some(s) = self.supervised {
            write!(f, " sup_err={:.4} sup_swap={}", s.error_rate, s.swap_flag)?;
        }
        if let Some(u) = self.unsupervised {
            write!(f, " unsup_err={:.4} swap={}", u.error_rate, u.swap_flag)?;
        }
        if let Some(g) = self.gap() {
            write!(f, " gap={g:.4}")?;
        }
        if let Some(j) = self.val_cost {
            write!(f, " val_J={j:.6}")?;
        }
        if let Some(r) = self.restart {
            write!(f, " restart={r}")?;
        }
        if let Some(share) = self.majority_share.filter(|&s| s >= 0.99) {
            write!(f, " note=majority-collapse(share={share:.4})")?;
        }
        Ok(())
    }
}

/// Trains on the train split, early-stops on validation and reports test
/// error. Bigram mode needs the rows in generation order.
pub fn cmd_train(cfg: &ExperimentConfig, data: &Path, which: Which) -> Result<TrainReport> {
    cfg.validate()?;
    let ds = load_dataset(data)?;
    if cfg.mode == Mode::Bigram && ds.split_ranges().is_none() {
        return Err(Error::invalid(
            "bigram training needs each split as one contiguous block in train, val, test order; \
             this dataset's rows are interleaved or shuffled, which destroys label adjacency",
        ));
    }
    let (train_x, train_y) = ds.subset(SplitKind::Train);
    let (val_x, val_y) = ds.subset(SplitKind::Val);
    let (test_x, test_y) = ds.subset(SplitKind::Test);
    if test_x.is_empty() {
        return Err(Error::invalid("dataset has no test rows"));
    }

    let mut report = TrainReport {
        mode: cfg.mode,
        supervised: None,
        unsupervised: None,
        val_cost: None,
        majority_share: None,
        restart: None,
    };
    if which != Which::Unsupervised {
        let val = (!val_x.is_empty()).then_some((val_x.as_slice(), val_y.as_slice()));
        let params = supervised_train(&train_x, &train_y, val, &cfg.hyper)?;
        write_file(&cfg.path(SUPERVISED_MODEL_FILE), format!("{}\n", params.to_json()).as_bytes())?;
        report.supervised = Some(evaluate_error(&params, &test_x, &test_y)?);
    }
    if which != Which::Supervised {
        let prior = cfg.prior_for(&train_y)?;
        let out = spdg_train(
            TrainingData {
                train: &train_x,
                val: &val_x,
                monitor: Some((&test_x, &test_y)),
            },
            &prior,
            &cfg.hyper,
        )?;
        write_file(&cfg.path(UNSUPERVISED_MODEL_FILE), format!("{}\n", out.params.to_json()).as_bytes())?;
        let mut trace = Vec::new();
        out.trace
            .write_csv(&mut trace)
            .expect("writing to a vector cannot fail");
        write_file(&cfg.path(TRACE_FILE), &trace)?;
        report.unsupervised = Some(evaluate_error(&out.params, &test_x, &test_y)?);
        let share0 = prediction_share(&out.params, &test_x, 0)?;
        report.majority_share = Some(share0.max(1.0 - share0));
        report.val_cost = Some(out.val_cost);
        report.restart = Some(out.restart);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteResult {
    pub sup_err: f64,
    pub unsup_err: f64,
    pub swap: bool,
}

impl SuiteResult {
    pub fn gap(&self) -> f64 {
        (self.unsup_err - self.sup_err).abs()
    }
}

#[derive(Debug, Clone)]
pub struct SuiteRow {
    /// `"1"`..`"10"` for the bigram datasets, `"unigram"` for the control.
    pub dataset: String,
    /// Transition matrix (row-major) or unigram prior, `;`-separated.
    pub ptrans: String,
    pub result: std::result::Result<SuiteResult, String>,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
    pub path: PathBuf,
}

impl SuiteReport {
    pub const HEADER: &'static str = "dataset,ptrans,sup_err,unsup_err,gap,swap,seconds";

    /// Report CSV. Wall times make the file irreproducible, so unless
    /// `timings` is set the `seconds` column is left empty.
    pub fn to_csv(&self, timings: bool) -> String {
        let mut s = format!("{}\n", Self::HEADER);
        for r in &self.rows {
            let secs = if timings { format!("{:.3}", r.seconds) } else { String::new() };
            match &r.result {
                Ok(v) => s.push_str(&format!(
                    "{},{},{:.6},{:.6},{:.6},{},{}\n",
                    r.dataset,
                    r.ptrans,
                    v.sup_err,
                    v.unsup_err,
                    v.gap(),
                    v.swap,
                    secs
                )),
                Err(_) => s.push_str(&format!("{},{},,,,,{}\n", r.dataset, r.ptrans, secs)),
            }
        }
        for r in &self.rows {
            if let Err(e) = &r.result {
                s.push_str(&format!("# error dataset={}: {}\n", r.dataset, e.replace('\n', " ")));
            }
        }
        s
    }

    /// Bigram rows whose gap is at most `tol`, and the number of bigram rows.
    pub fn gaps_within(&self, tol: f64) -> (usize, usize) {
        let bigram: Vec<_> = self.rows.iter().filter(|r| r.dataset != "unigram").collect();
        let ok = bigram
            .iter()
            .filter(|r| r.result.as_ref().is_ok_and(|v| v.gap() <= tol))
            .count();
        (ok, bigram.len())
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<8} {:<20} {:>8} {:>10} {:>7} {:>5} {:>8}", "dataset", "ptrans", "sup", "unsup", "gap", "swap", "seconds")?;
        for r in &self.rows {
            match &r.result {
                Ok(v) => writeln!(
                    f,
                    "{:<8} {:<20} {:>7.2}% {:>9.2}% {:>7.2} {:>5} {:>8.1}",
                    r.dataset,
                    r.ptrans,
                    100.0 * v.sup_err,
                    100.0 * v.unsup_err,
                    100.0 * v.gap(),
                    v.swap,
                    r.seconds
                )?,
                Err(e) => writeln!(f, "{:<8} {:<20} failed: {e}", r.dataset, r.ptrans)?,
            }
        }
        let (ok, n) = self.gaps_within(0.015);
        write!(f, "bigram datasets with gap <= 1.5 points: {ok}/{n}\nwrote {}", self.path.display())
    }
}

fn suite_case(labels: LabelModel, prior: Prior, cfg: &ExperimentConfig, seed: u64) -> Result<SuiteResult> {
    let spec = GenerationSpec {
        labels,
        emission: cfg.emission,
        sizes: cfg.sizes,
        seed,
    };
    let ds = spec.generate()?;
    let r = ds.split_ranges().expect("generated splits are contiguous");
    let (x, y) = (&ds.inputs, &ds.labels);
    let (train, val, test) = (&x[r.train.clone()], &x[r.val.clone()], &x[r.test.clone()]);
    let (ytrain, yval, ytest) = (&y[r.train.clone()], &y[r.val.clone()], &y[r.test.clone()]);
    let val_pair = (!val.is_empty()).then_some((val, yval));
    let sup = supervised_train(train, ytrain, val_pair, &cfg.hyper)?;
    let out = spdg_train(
        TrainingData {
            train,
            val,
            monitor: None,
        },
        &prior,
        &cfg.hyper,
    )?;
    let s = evaluate_error(&sup, test, ytest)?;
    let u = evaluate_error(&out.params, test, ytest)?;
    Ok(SuiteResult {
        sup_err: s.error_rate,
        unsup_err: u.error_rate,
        swap: u.swap_flag,
    })
}

fn join_probs(v: &[f64]) -> String {
    v.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(";")
}

/// Runs the ten bigram datasets and the unigram control, one independent
/// job each, and writes the report CSV. A failing job is recorded in its row.
pub fn cmd_suite(cfg: &ExperimentConfig, timings: bool) -> Result<SuiteReport> {
    cfg.hyper.validate(true)?;
    cfg.emission.validate()?;
    let jobs: Vec<(String, String, LabelModel, u64)> = SUITE_TRANSITIONS
        .iter()
        .enumerate()
        .map(|(i, m)| {
            (
                (i + 1).to_string(),
                join_probs(m.as_flattened()),
                LabelModel::Transition(*m),
                derive_seed(cfg.seed, i as u64 + 1),
            )
        })
        .chain(std::iter::once((
            "unigram".to_string(),
            join_probs(&UNIGRAM_CONTROL),
            LabelModel::Unigram(UNIGRAM_CONTROL),
            derive_seed(cfg.seed, 0),
        )))
        .collect();
    let rows = jobs
        .into_par_iter()
        .map(|(dataset, ptrans, labels, seed)| {
            let start = Instant::now();
            let result = (|| {
                let prior = match labels {
                    LabelModel::Transition(m) => Prior::Bigram(bigram_from_transition(&TransitionMatrix::new(m)?)?),
                    LabelModel::Unigram(p) => Prior::Unigram(UnigramPrior::new(p[0], p[1])?),
                };
                suite_case(labels, prior, cfg, seed)
            })()
            .map_err(|e| format!("{}: {e}", e.kind()));
            SuiteRow {
                dataset,
                ptrans,
                result,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect();
    let report = SuiteReport {
        rows,
        path: cfg.path(SUITE_FILE),
    };
    write_file(&report.path, report.to_csv(timings).as_bytes())?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceMode {
    Primal,
    PrimalDual,
}

impl FromStr for SurfaceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "primal" => Ok(SurfaceMode::Primal),
            "primal-dual" => Ok(SurfaceMode::PrimalDual),
            _ => Err(Error::invalid(format!("unknown surface mode {s:?} (primal or primal-dual)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceReport {
    pub path: PathBuf,
    pub cells: usize,
    /// `J` of the anchor model on the surface inputs.
    pub anchor_cost: f64,
    /// Grid value at zero offset, when the grid contains it.
    pub anchor_value: Option<f64>,
}

impl fmt::Display for SurfaceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "wrote {} ({} cells) J(anchor)={:.10}", self.path.display(), self.cells, self.anchor_cost)?;
        if let Some(z) = self.anchor_value {
            write!(f, " z(0,0)={z:.10}")?;
        }
        Ok(())
    }
}

/// Exports a cost surface around `model` on the training split. The
/// primal-dual surface is anchored at the dual maximizer for the model, so it
/// needs one; the primal surface falls back to the zero model.
pub fn cmd_surface(
    cfg: &ExperimentConfig,
    model: Option<&Path>,
    data: &Path,
    mode: SurfaceMode,
    grid: &GridSpec,
    surface_seed: u64,
    out: Option<&Path>,
) -> Result<SurfaceReport> {
    cfg.validate()?;
    grid.validate()?;
    let theta0 = match (model, mode) {
        (Some(p), _) => load_model(p)?,
        (None, SurfaceMode::Primal) => ModelParams::with_gamma(0.0, 0.0, cfg.hyper.gamma),
        (None, SurfaceMode::PrimalDual) => {
            return Err(Error::invalid(
                "the primal-dual surface is anchored at a trained model; pass --model",
            ));
        }
    };
    let ds = load_dataset(data)?;
    if cfg.mode == Mode::Bigram && ds.split_ranges().is_none() {
        return Err(Error::invalid("bigram surfaces need the rows in generation order"));
    }
    let (xs, ys): (Vec<InputPoint>, Vec<u8>) = ds.subset(SplitKind::Train);
    let prior = cfg.prior_for(&ys)?;
    let surface = match mode {
        SurfaceMode::Primal => primal_surface(&theta0, &xs, &prior, grid)?,
        SurfaceMode::PrimalDual => {
            let v0 = anchor_duals(&theta0, &xs, &prior)?;
            primal_dual_surface(&theta0, &v0, &xs, &prior, grid, surface_seed)?
        }
    };
    let path = match out {
        Some(p) => p.to_path_buf(),
        None => cfg.path(match mode {
            SurfaceMode::Primal => "surface_primal.csv",
            SurfaceMode::PrimalDual => "surface_primal_dual.csv",
        }),
    };
    let mut buf = Vec::new();
    surface.write_csv(&mut buf).expect("writing to a vector cannot fail");
    write_file(&path, &buf)?;
    Ok(SurfaceReport {
        path,
        cells: surface.axis1.len() * surface.axis2.len(),
        anchor_cost: cost_of(&prior, &theta0, &xs)?,
        anchor_value: surface.anchor_value(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum CipherCommand {
    Encrypt { shift: u8 },
    Decrypt { shift: u8 },
    Crack {
        reference: Option<PathBuf>,
        criterion: Criterion,
    },
}

/// Runs a cipher command on `text` and returns what should be printed.
pub fn cmd_cipher(cmd: &CipherCommand, text: &str) -> Result<String> {
    match cmd {
        CipherCommand::Encrypt { shift } => shift_encrypt(text, *shift),
        CipherCommand::Decrypt { shift } => shift_decrypt(text, *shift),
        CipherCommand::Crack { reference, criterion } => {
            let reference = match reference {
                Some(p) => LetterHistogram::from_file(p)?,
                None => LetterHistogram::english(),
            };
            let crack = crack_shift_with(text, &reference, *criterion)?;
            let scores = crack
                .scores
                .iter()
                .map(|s| format!("{s:.6}"))
                .collect::<Vec<_>>()
                .join(";");
            Ok(format!(
                "shift={}\nscores={}\n{}",
                crack.shift,
                scores,
                shift_decrypt(text, crack.shift)?
            ))
        }
    }
}
