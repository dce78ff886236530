//! Stochastic primal-dual training against a label prior, the supervised
//! maximum-likelihood baseline, and error evaluation.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::datagen::{derive_seed, rng_from};
use crate::error::{Error, Result};
use crate::model::{
    log_posterior_unchecked, posterior_unchecked, predict, InputPoint, ModelParams, Theta, DEFAULT_GAMMA,
};
use crate::objective::{cost_j, dual_optimum, saddle_gradients, stats_for, DualVars, Table};
use crate::prior::Prior;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    /// Primal step size. The default is ten times the commonly quoted 1e-6,
    /// which does not converge within `max_steps`.
    pub lr_theta: f64,
    /// Dual step size, likewise ten times 1e-4.
    pub lr_dual: f64,
    /// Window length N; each step uses one contiguous window.
    pub batch_len: usize,
    pub max_steps: u64,
    pub eval_every: u64,
    /// Evaluations without validation improvement before stopping.
    pub patience: u32,
    pub dual_clamp_eps: f64,
    pub seed: u64,
    /// Independent SPDG runs; the one with the lowest validation cost wins.
    pub restarts: u32,
    /// Initial weight magnitudes are drawn from `[0, init_scale]`. When unset,
    /// 0.01 for unigram priors and 0.3 for bigram priors.
    pub init_scale: Option<f64>,
    /// Train the class-0 intercept; when false it stays at 0.
    pub fit_bias: bool,
    pub gamma: f64,
    /// Step size of the supervised baseline.
    pub lr_supervised: f64,
    /// Start the duals at their maximizer for the initial weights instead of
    /// at random negative values.
    pub warm_start_duals: bool,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            lr_theta: 1e-5,
            lr_dual: 1e-3,
            batch_len: 10,
            max_steps: 2_000_000,
            eval_every: 50_000,
            patience: 20,
            dual_clamp_eps: 1e-6,
            seed: 0,
            restarts: 4,
            init_scale: None,
            fit_bias: true,
            gamma: DEFAULT_GAMMA,
            lr_supervised: 1e-3,
            warm_start_duals: true,
        }
    }
}

pub const UNIGRAM_INIT_SCALE: f64 = 0.01;
pub const BIGRAM_INIT_SCALE: f64 = 0.3;

impl Hyperparams {
    pub fn validate(&self, bigram: bool) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive, got {v}")))
            }
        };
        positive(self.lr_theta, "lr_theta")?;
        positive(self.lr_dual, "lr_dual")?;
        positive(self.dual_clamp_eps, "dual_clamp_eps")?;
        positive(self.lr_supervised, "lr_supervised")?;
        positive(self.gamma, "gamma")?;
        if let Some(r) = self.init_scale {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::invalid(format!("init_scale must be non-negative, got {r}")));
            }
        }
        if self.batch_len < if bigram { 2 } else { 1 } {
            return Err(Error::invalid(format!("batch_len {} too small", self.batch_len)));
        }
        if self.eval_every == 0 {
            return Err(Error::invalid("eval_every must be positive"));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("restarts must be at least 1"));
        }
        Ok(())
    }

    pub fn init_scale_for(&self, bigram: bool) -> f64 {
        self.init_scale
            .unwrap_or(if bigram { BIGRAM_INIT_SCALE } else { UNIGRAM_INIT_SCALE })
    }

    /// Parses a `key = value` config file (TOML syntax). Missing keys keep defaults.
    pub fn from_config_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::invalid(format!("hyperparameter config: {e}")))
    }

    pub fn from_config_file(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_config_str(&s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: u64,
    pub j_train: f64,
    pub j_val: f64,
    pub error: Option<f64>,
    pub params: ModelParams,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainTrace {
    pub rows: Vec<TraceRow>,
}

impl TrainTrace {
    pub const HEADER: &'static str = "step,J_train,J_val,error,w_a,w_b,bias";

    fn push(&mut self, row: TraceRow) {
        debug_assert!(self.rows.last().is_none_or(|r| r.step < row.step));
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::HEADER)?;
        for r in &self.rows {
            let err = r.error.map(|e| e.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.step, r.j_train, r.j_val, err, r.params.w_a, r.params.w_b, r.params.bias
            )?;
        }
        Ok(())
    }
}

/// Sequences consumed by unsupervised training. Labels in `monitor` are only
/// used to fill the trace's error column; they never influence the updates or
/// early stopping.
#[derive(Debug, Clone, Copy)]
pub struct TrainingData<'a> {
    pub train: &'a [InputPoint],
    pub val: &'a [InputPoint],
    pub monitor: Option<(&'a [InputPoint], &'a [u8])>,
}

#[derive(Debug, Clone)]
pub struct SpdgOutcome {
    /// Parameters with the lowest validation cost over all restarts.
    pub params: ModelParams,
    /// Dual variables at that checkpoint.
    pub duals: DualVars,
    /// Validation cost at that checkpoint.
    pub val_cost: f64,
    /// Trace of the winning restart.
    pub trace: TrainTrace,
    pub steps_run: u64,
    pub restart: u32,
    /// Best validation cost reached by each restart.
    pub restart_costs: Vec<f64>,
}

/// Weight signs follow the restart index through the four quadrants of
/// `(w_a, w_b)`; magnitudes and the bias are uniform in `[0, scale]` and
/// `[-scale, scale]`.
fn initial_params(hyper: &Hyperparams, scale: f64, restart: u32, rng: &mut impl Rng) -> ModelParams {
    let sign = |bit: u32| if restart & bit == 0 { 1.0 } else { -1.0 };
    let w_a = sign(1) * rng.gen_range(0.0..=scale);
    let w_b = sign(2) * rng.gen_range(0.0..=scale);
    let bias = if hyper.fit_bias { rng.gen_range(-scale..=scale) } else { 0.0 };
    ModelParams::with_gamma(w_a, w_b, hyper.gamma).with_bias(bias)
}

fn initial_duals(prior: &Prior, rng: &mut impl Rng) -> DualVars {
    let mut draw = || -1.0 - rng.gen::<f64>().abs();
    let table = if prior.is_bigram() {
        Table::Bigram([[draw(), draw()], [draw(), draw()]])
    } else {
        Table::Unigram([draw(), draw()])
    };
    DualVars::new(table).expect("initial duals are negative")
}

fn descend(params: &ModelParams, grad: &[f64; 3], lr: f64, fit_bias: bool) -> ModelParams {
    let t = params.theta();
    let bias = if fit_bias { t[2] - lr * grad[2] } else { t[2] };
    params.with_theta([t[0] - lr * grad[0], t[1] - lr * grad[1], bias])
}

fn finite_cost(prior: &Prior, params: &ModelParams, xs: &[InputPoint], what: &str) -> Result<f64> {
    let j = cost_j(prior, &stats_for(prior, params, xs)?)?;
    if j.is_finite() {
        Ok(j)
    } else {
        Err(Error::Numerical(format!("{what} cost is {j} at {params:?}")))
    }
}

/// Stochastic primal-dual gradient training: descend `L` in the weights and
/// ascend it in the duals on random contiguous windows, keeping the
/// checkpoint with the lowest label-free validation cost. With several
/// restarts the run with the lowest such cost is returned.
pub fn spdg_train(data: TrainingData<'_>, prior: &Prior, hyper: &Hyperparams) -> Result<SpdgOutcome> {
    hyper.validate(prior.is_bigram())?;
    let min = if prior.is_bigram() { 2 } else { 1 };
    if data.train.len() < hyper.batch_len.max(min) {
        return Err(Error::invalid(format!(
            "training sequence of length {} is shorter than the window {}",
            data.train.len(),
            hyper.batch_len
        )));
    }
    if data.val.len() < min {
        return Err(Error::invalid("validation sequence too short"));
    }
    if let Some(x) = data.train.iter().chain(data.val).find(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("non-finite input point {x:?}")));
    }
    if let Some((xs, ys)) = data.monitor {
        check_labeled(&ModelParams::new(0.0, 0.0), xs, ys)?;
    }

    let mut best: Option<SpdgOutcome> = None;
    let mut costs = Vec::with_capacity(hyper.restarts as usize);
    for restart in 0..hyper.restarts {
        let run = spdg_run(data, prior, hyper, restart)?;
        costs.push(run.val_cost);
        if best.as_ref().is_none_or(|b| run.val_cost < b.val_cost) {
            best = Some(run);
        }
    }
    let mut out = best.expect("at least one restart");
    out.restart_costs = costs;
    Ok(out)
}

fn spdg_run(data: TrainingData<'_>, prior: &Prior, hyper: &Hyperparams, restart: u32) -> Result<SpdgOutcome> {
    let mut rng = rng_from(derive_seed(hyper.seed, u64::from(restart)));
    let scale = hyper.init_scale_for(prior.is_bigram());
    let mut params = initial_params(hyper, scale, restart, &mut rng);
    let mut duals = initial_duals(prior, &mut rng);
    if hyper.warm_start_duals {
        duals = dual_optimum(&stats_for(prior, &params, data.train)?)?;
    }
    let prior_table = Table::from(prior);
    let last_start = data.train.len() - hyper.batch_len;

    let mut trace = TrainTrace::default();
    let evaluate = |step: u64, params: &ModelParams, trace: &mut TrainTrace| -> Result<f64> {
        let j_val = finite_cost(prior, params, data.val, "validation")?;
        let j_train = finite_cost(prior, params, data.train, "training")?;
        let error = match data.monitor {
            Some((xs, ys)) => Some(evaluate_error(params, xs, ys)?.error_rate),
            None => None,
        };
        trace.push(TraceRow {
            step,
            j_train,
            j_val,
            error,
            params: *params,
        });
        Ok(j_val)
    };

    let mut best = (evaluate(0, &params, &mut trace)?, params, duals);
    let mut stale = 0u32;
    let mut step = 0u64;
    while step < hyper.max_steps {
        let s = rng.gen_range(0..=last_start);
        let window = &data.train[s..s + hyper.batch_len];
        let (g_theta, g_dual) = saddle_gradients(&params, &duals, window, &prior_table);
        params = descend(&params, &g_theta, hyper.lr_theta, hyper.fit_bias);
        duals.ascend_clamped(&g_dual, hyper.lr_dual, hyper.dual_clamp_eps);
        step += 1;

        if step.is_multiple_of(hyper.eval_every) || step == hyper.max_steps {
            let j_val = evaluate(step, &params, &mut trace)?;
            if j_val < best.0 {
                best = (j_val, params, duals);
                stale = 0;
            } else {
                stale += 1;
                if stale > hyper.patience {
                    break;
                }
            }
        }
    }
    Ok(SpdgOutcome {
        params: best.1,
        duals: best.2,
        val_cost: best.0,
        trace,
        steps_run: step,
        restart,
        restart_costs: Vec::new(),
    })
}

/// Mean negative log posterior of the true labels.
pub fn supervised_loss(params: &ModelParams, inputs: &[InputPoint], labels: &[u8]) -> Result<f64> {
    check_labeled(params, inputs, labels)?;
    let total: f64 = inputs
        .iter()
        .zip(labels)
        .map(|(x, &y)| -log_posterior_unchecked(params, x)[y as usize])
        .sum();
    Ok(total / inputs.len() as f64)
}

/// Gradient of [`supervised_loss`] with respect to `(w_a, w_b, bias)`.
pub fn supervised_grad(params: &ModelParams, inputs: &[InputPoint], labels: &[u8]) -> Result<Theta> {
    check_labeled(params, inputs, labels)?;
    Ok(supervised_grad_unchecked(params, inputs, labels))
}

fn supervised_grad_unchecked(params: &ModelParams, inputs: &[InputPoint], labels: &[u8]) -> Theta {
    // d ln p0 / dtheta = gamma p1 (x_a, -x_b, 1), d ln p1 / dtheta = -gamma p0 (x_a, -x_b, 1)
    let mut g = [0.0; 3];
    for (x, &y) in inputs.iter().zip(labels) {
        let p = posterior_unchecked(params, x);
        let c = params.gamma * if y == 0 { p.p1 } else { -p.p0 };
        g[0] -= c * x.x_a;
        g[1] += c * x.x_b;
        g[2] -= c;
    }
    let n = inputs.len() as f64;
    g.map(|v| v / n)
}

fn check_labeled(params: &ModelParams, inputs: &[InputPoint], labels: &[u8]) -> Result<()> {
    params.validate()?;
    if inputs.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} inputs but {} labels",
            inputs.len(),
            labels.len()
        )));
    }
    if inputs.is_empty() {
        return Err(Error::invalid("no labelled inputs"));
    }
    if let Some(bad) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::invalid(format!("label {bad} is not binary")));
    }
    if let Some(x) = inputs.iter().find(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("non-finite input point {x:?}")));
    }
    Ok(())
}

/// Maximum-likelihood baseline by mini-batch SGD on `-mean ln p(y|x)`.
/// Early stopping monitors the validation loss when `val` is given, the
/// training loss otherwise.
pub fn supervised_train(
    inputs: &[InputPoint],
    labels: &[u8],
    val: Option<(&[InputPoint], &[u8])>,
    hyper: &Hyperparams,
) -> Result<ModelParams> {
    hyper.validate(false)?;
    let mut rng = rng_from(hyper.seed);
    let mut params = initial_params(hyper, UNIGRAM_INIT_SCALE, 0, &mut rng);
    check_labeled(&params, inputs, labels)?;
    let (vx, vy) = val.unwrap_or((inputs, labels));
    check_labeled(&params, vx, vy)?;

    let n = hyper.batch_len.min(inputs.len());
    let last_start = inputs.len() - n;
    let mut best = (supervised_loss(&params, vx, vy)?, params);
    let mut stale = 0u32;
    for step in 1..=hyper.max_steps {
        let s = rng.gen_range(0..=last_start);
        let g = supervised_grad_unchecked(&params, &inputs[s..s + n], &labels[s..s + n]);
        params = descend(&params, &g, hyper.lr_supervised, hyper.fit_bias);
        if step % hyper.eval_every == 0 || step == hyper.max_steps {
            let loss = supervised_loss(&params, vx, vy)?;
            if !loss.is_finite() {
                return Err(Error::Numerical(format!("supervised loss is {loss}")));
            }
            if loss < best.0 {
                best = (loss, params);
                stale = 0;
            } else {
                stale += 1;
                if stale > hyper.patience {
                    break;
                }
            }
        }
    }
    Ok(best.1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub error_rate: f64,
    /// True when swapping the two predicted labels would lower the error.
    /// Reported only; `error_rate` is never swapped.
    pub swap_flag: bool,
}

pub fn evaluate_error(params: &ModelParams, inputs: &[InputPoint], labels: &[u8]) -> Result<ErrorReport> {
    check_labeled(params, inputs, labels)?;
    let mut wrong = 0usize;
    for (x, &y) in inputs.iter().zip(labels) {
        if predict(params, x)? != y {
            wrong += 1;
        }
    }
    let error_rate = wrong as f64 / inputs.len() as f64;
    Ok(ErrorReport {
        error_rate,
        swap_flag: 1.0 - error_rate < error_rate,
    })
}

/// Fraction of inputs assigned to `class`.
pub fn prediction_share(params: &ModelParams, inputs: &[InputPoint], class: u8) -> Result<f64> {
    if inputs.is_empty() {
        return Err(Error::invalid("no inputs"));
    }
    let mut hits = 0usize;
    for x in inputs {
        if predict(params, x)? == class {
            hits += 1;
        }
    }
    Ok(hits as f64 / inputs.len() as f64)
}
