//! Output statistics, the matching cost and its saddle-point form.
//!
//! For a prior `P` and classifier statistics `S(theta)` the cost is
//! `J = -<P, ln S>`. Writing `-ln u = max_{v<0} (u v + ln(-v)) + 1` moves the
//! sample average out of the logarithm:
//!
//! ```text
//! L(theta, V) = <P ⊙ V, S(theta)> + <P, ln(-V)>,    max_V L = J - 1
//! ```
//!
//! Unigram tables are 2-vectors, bigram tables are 2x2 matrices; in both cases
//! the formulas above are entrywise, so most code works on flattened entries.

use crate::error::{Error, Result};
use crate::model::{jacobian_from, posterior_unchecked, InputPoint, Jacobian, Mat2, ModelParams, PosteriorPair, Theta};
use crate::prior::Prior;

/// Stats entries are clamped to at least this before taking logs.
pub const STATS_FLOOR: f64 = 1e-300;

/// A unigram vector or a bigram matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Table {
    Unigram([f64; 2]),
    Bigram(Mat2),
}

impl Table {
    pub fn entries(&self) -> &[f64] {
        match self {
            Table::Unigram(v) => v,
            Table::Bigram(m) => m.as_flattened(),
        }
    }

    fn entries_mut(&mut self) -> &mut [f64] {
        match self {
            Table::Unigram(v) => v,
            Table::Bigram(m) => m.as_flattened_mut(),
        }
    }

    pub fn is_bigram(&self) -> bool {
        matches!(self, Table::Bigram(_))
    }

    /// Applies `f` entrywise.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Table {
        let mut out = *self;
        out.entries_mut().iter_mut().for_each(|e| *e = f(*e));
        out
    }

    /// Combines two same-shaped tables entrywise.
    pub fn zip_with(&self, other: &Table, f: impl Fn(f64, f64) -> f64) -> Table {
        let mut out = *self;
        for (o, b) in out.entries_mut().iter_mut().zip(other.entries()) {
            *o = f(*o, *b);
        }
        out
    }

    pub fn sum(&self) -> f64 {
        self.entries().iter().sum()
    }
}

impl From<&Prior> for Table {
    fn from(p: &Prior) -> Self {
        match p {
            Prior::Unigram(u) => Table::Unigram(u.probs()),
            Prior::Bigram(b) => Table::Bigram(b.matrix()),
        }
    }
}

/// Classifier output statistics: averaged posteriors (unigram) or averaged
/// outer products of consecutive posteriors (bigram).
pub type OutputStats = Table;

/// Dual variables; every entry is strictly negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualVars(Table);

impl DualVars {
    pub fn new(t: Table) -> Result<Self> {
        if let Some(bad) = t.entries().iter().find(|v| !(v.is_finite() && **v < 0.0)) {
            return Err(Error::Domain(format!("dual variables must be negative, got {bad}")));
        }
        Ok(DualVars(t))
    }

    pub fn table(&self) -> &Table {
        &self.0
    }

    pub fn entries(&self) -> &[f64] {
        self.0.entries()
    }

    /// Projects every entry onto `(-inf, -eps]`.
    pub(crate) fn ascend_clamped(&mut self, step: &Table, lr: f64, eps: f64) {
        for (v, g) in self.0.entries_mut().iter_mut().zip(step.entries()) {
            *v = (*v + lr * g).min(-eps);
        }
    }
}

fn check_inputs(params: &ModelParams, inputs: &[InputPoint], min_len: usize) -> Result<()> {
    params.validate()?;
    if inputs.len() < min_len {
        return Err(Error::invalid(format!(
            "need at least {min_len} input points, got {}",
            inputs.len()
        )));
    }
    if let Some(x) = inputs.iter().find(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("non-finite input point {x:?}")));
    }
    Ok(())
}

fn min_len(prior: &Prior) -> usize {
    if prior.is_bigram() {
        2
    } else {
        1
    }
}

fn check_shape(prior: &Prior, t: &Table, what: &str) -> Result<()> {
    if prior.is_bigram() != t.is_bigram() {
        return Err(Error::invalid(format!("{what} shape does not match the prior order")));
    }
    Ok(())
}

fn unigram_stats_unchecked(params: &ModelParams, inputs: &[InputPoint]) -> [f64; 2] {
    let mut acc = [0.0; 2];
    for x in inputs {
        let p = posterior_unchecked(params, x);
        acc[0] += p.p0;
        acc[1] += p.p1;
    }
    let t = inputs.len() as f64;
    [acc[0] / t, acc[1] / t]
}

fn bigram_stats_unchecked(params: &ModelParams, inputs: &[InputPoint]) -> Mat2 {
    let mut acc = [[0.0; 2]; 2];
    let mut prev = posterior_unchecked(params, &inputs[0]).as_array();
    for x in &inputs[1..] {
        let cur = posterior_unchecked(params, x).as_array();
        for i in 0..2 {
            for j in 0..2 {
                acc[i][j] += prev[i] * cur[j];
            }
        }
        prev = cur;
    }
    let n = (inputs.len() - 1) as f64;
    acc.map(|r| r.map(|e| e / n))
}

pub fn unigram_stats(params: &ModelParams, inputs: &[InputPoint]) -> Result<OutputStats> {
    check_inputs(params, inputs, 1)?;
    Ok(Table::Unigram(unigram_stats_unchecked(params, inputs)))
}

/// Averages `p_{t-1} p_t^T` over `t = 2..T`.
pub fn bigram_stats(params: &ModelParams, inputs: &[InputPoint]) -> Result<OutputStats> {
    check_inputs(params, inputs, 2)?;
    Ok(Table::Bigram(bigram_stats_unchecked(params, inputs)))
}

/// Statistics of the order matching `prior`.
pub fn stats_for(prior: &Prior, params: &ModelParams, inputs: &[InputPoint]) -> Result<OutputStats> {
    if prior.is_bigram() {
        bigram_stats(params, inputs)
    } else {
        unigram_stats(params, inputs)
    }
}

/// `-<P, ln S>`, with `0 ln 0 = 0`. Returns `+inf` when a zero statistic meets
/// a positive prior entry.
pub fn cost_j(prior: &Prior, stats: &OutputStats) -> Result<f64> {
    check_shape(prior, stats, "statistics")?;
    let p = Table::from(prior);
    let mut cost = 0.0;
    for (&pk, &sk) in p.entries().iter().zip(stats.entries()) {
        if pk == 0.0 {
            continue;
        }
        if sk == 0.0 {
            return Ok(f64::INFINITY);
        }
        cost -= pk * sk.max(STATS_FLOOR).ln();
    }
    Ok(cost)
}

/// Convenience: `cost_j` of the statistics of `params` on `inputs`.
pub fn cost_of(prior: &Prior, params: &ModelParams, inputs: &[InputPoint]) -> Result<f64> {
    cost_j(prior, &stats_for(prior, params, inputs)?)
}

pub(crate) fn lagrangian_from_stats(prior: &Table, duals: &DualVars, stats: &Table) -> f64 {
    prior
        .entries()
        .iter()
        .zip(duals.entries())
        .zip(stats.entries())
        .map(|((&p, &v), &s)| if p == 0.0 { 0.0 } else { p * v * s + p * (-v).ln() })
        .sum()
}

/// `<P ⊙ V, S(theta)> + <P, ln(-V)>` over `inputs`.
pub fn lagrangian(
    params: &ModelParams,
    duals: &DualVars,
    inputs: &[InputPoint],
    prior: &Prior,
) -> Result<f64> {
    check_shape(prior, duals.table(), "dual variables")?;
    DualVars::new(*duals.table())?;
    let stats = stats_for(prior, params, inputs)?;
    Ok(lagrangian_from_stats(&Table::from(prior), duals, &stats))
}

/// Maximizer of the lagrangian in `V` for fixed statistics: `V = -1 / S`.
pub fn dual_optimum(stats: &OutputStats) -> Result<DualVars> {
    if let Some(bad) = stats.entries().iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(Error::Domain(format!("statistics entry {bad} has no finite dual optimum")));
    }
    DualVars::new(stats.map(|s| -1.0 / s))
}

/// Both saddle gradients over one window; inputs are assumed validated.
pub(crate) fn saddle_gradients(
    params: &ModelParams,
    duals: &DualVars,
    batch: &[InputPoint],
    prior: &Table,
) -> (Theta, Table) {
    let mut g_theta = [0.0; 3];
    let stats = match (prior, duals.table()) {
        (Table::Unigram(p), Table::Unigram(v)) => {
            let m = [p[0] * v[0], p[1] * v[1]];
            let mut acc = [0.0; 2];
            for x in batch {
                let post = posterior_unchecked(params, x);
                let j = jacobian_from(params, x, &post);
                for k in 0..3 {
                    g_theta[k] += m[0] * j[0][k] + m[1] * j[1][k];
                }
                acc[0] += post.p0;
                acc[1] += post.p1;
            }
            let t = batch.len() as f64;
            g_theta = g_theta.map(|g| g / t);
            Table::Unigram(acc.map(|a| a / t))
        }
        (Table::Bigram(p), Table::Bigram(v)) => {
            let m = [
                [p[0][0] * v[0][0], p[0][1] * v[0][1]],
                [p[1][0] * v[1][0], p[1][1] * v[1][1]],
            ];
            let mut acc = [[0.0; 2]; 2];
            let step = |x: &InputPoint| -> (PosteriorPair, Jacobian) {
                let post = posterior_unchecked(params, x);
                let j = jacobian_from(params, x, &post);
                (post, j)
            };
            let (mut prev_p, mut prev_j) = step(&batch[0]);
            for x in &batch[1..] {
                let (cur_p, cur_j) = step(x);
                let a = prev_p.as_array();
                let b = cur_p.as_array();
                for i in 0..2 {
                    for j in 0..2 {
                        acc[i][j] += a[i] * b[j];
                        for k in 0..3 {
                            g_theta[k] += m[i][j] * (prev_j[i][k] * b[j] + a[i] * cur_j[j][k]);
                        }
                    }
                }
                prev_p = cur_p;
                prev_j = cur_j;
            }
            let n = (batch.len() - 1) as f64;
            g_theta = g_theta.map(|g| g / n);
            Table::Bigram(acc.map(|r| r.map(|e| e / n)))
        }
        _ => unreachable!("shape checked by caller"),
    };
    let g_dual = prior
        .zip_with(&stats, |p, s| p * s)
        .zip_with(&prior.zip_with(duals.table(), |p, v| p / v), |a, b| a + b);
    (g_theta, g_dual)
}

fn check_gradient_args(
    params: &ModelParams,
    duals: &DualVars,
    batch: &[InputPoint],
    prior: &Prior,
) -> Result<()> {
    check_shape(prior, duals.table(), "dual variables")?;
    DualVars::new(*duals.table())?;
    check_inputs(params, batch, min_len(prior))
}

/// `dL/d(w_a, w_b, bias)` over a contiguous window.
pub fn grad_theta(
    params: &ModelParams,
    duals: &DualVars,
    batch: &[InputPoint],
    prior: &Prior,
) -> Result<Theta> {
    check_gradient_args(params, duals, batch, prior)?;
    Ok(saddle_gradients(params, duals, batch, &Table::from(prior)).0)
}

/// `dL/dV = P ⊙ S + P ⊘ V` over a contiguous window.
pub fn grad_dual(
    params: &ModelParams,
    duals: &DualVars,
    batch: &[InputPoint],
    prior: &Prior,
) -> Result<Table> {
    check_gradient_args(params, duals, batch, prior)?;
    Ok(saddle_gradients(params, duals, batch, &Table::from(prior)).1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::{BigramPrior, UnigramPrior};

    fn uni(p0: f64, p1: f64) -> Prior {
        Prior::Unigram(UnigramPrior::new(p0, p1).unwrap())
    }

    fn pts(v: &[(f64, f64)]) -> Vec<InputPoint> {
        v.iter().map(|&(a, b)| InputPoint::new(a, b)).collect()
    }

    /// Input with p0 = q for `ModelParams::new(1, 0)` (logit difference 10 x_a).
    fn point_with_p0(q: f64) -> InputPoint {
        InputPoint::new((q / (1.0 - q)).ln() / 10.0, 0.0)
    }

    #[test]
    fn uniform_stats_at_zero_weights() {
        let zero = ModelParams::new(0.0, 0.0);
        let xs = pts(&[(1.0, 2.0), (-3.0, 0.5), (0.2, -0.7)]);
        assert_eq!(unigram_stats(&zero, &xs).unwrap(), Table::Unigram([0.5, 0.5]));
        assert_eq!(bigram_stats(&zero, &xs).unwrap(), Table::Bigram([[0.25; 2]; 2]));
        assert_eq!(bigram_stats(&zero, &xs[..2]).unwrap(), Table::Bigram([[0.25; 2]; 2]));
    }

    #[test]
    fn unigram_stats_are_means() {
        let params = ModelParams::new(1.0, 0.0);
        let s = unigram_stats(&params, &[point_with_p0(0.9)]).unwrap();
        assert!((s.entries()[0] - 0.9).abs() < 1e-12);
        let s = unigram_stats(&params, &[point_with_p0(0.8), point_with_p0(0.4)]).unwrap();
        assert!((s.entries()[0] - 0.6).abs() < 1e-12);
        assert!((s.entries()[1] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn bigram_stats_limit_case() {
        let params = ModelParams::new(1.0, 1.0);
        let s = bigram_stats(&params, &pts(&[(100.0, 0.0), (0.0, 100.0)])).unwrap();
        assert_eq!(s, Table::Bigram([[0.0, 1.0], [0.0, 0.0]]));
    }

    #[test]
    fn stats_length_errors() {
        let p = ModelParams::new(0.0, 0.0);
        assert!(unigram_stats(&p, &[]).is_err());
        assert!(bigram_stats(&p, &pts(&[(1.0, 1.0)])).is_err());
    }

    #[test]
    fn cost_examples() {
        let ln2 = std::f64::consts::LN_2;
        assert!((cost_j(&uni(0.5, 0.5), &Table::Unigram([0.5, 0.5])).unwrap() - ln2).abs() < 1e-15);
        let eps = 1e-6;
        let c = cost_j(&uni(1.0, 0.0), &Table::Unigram([1.0 - eps, eps])).unwrap();
        assert!((c - eps).abs() < 1e-11);
        let c = cost_j(&uni(0.692, 0.308), &Table::Unigram([0.5, 0.5])).unwrap();
        assert!((c - ln2).abs() < 1e-15);
        assert_eq!(cost_j(&uni(0.5, 0.5), &Table::Unigram([1.0, 0.0])).unwrap(), f64::INFINITY);
        assert_eq!(cost_j(&uni(1.0, 0.0), &Table::Unigram([1.0, 0.0])).unwrap(), 0.0);
        assert!(cost_j(&uni(0.5, 0.5), &Table::Bigram([[0.25; 2]; 2])).is_err());
    }

    #[test]
    fn lagrangian_examples() {
        let zero = ModelParams::new(0.0, 0.0);
        let xs = pts(&[(1.0, 2.0), (-3.0, 0.5), (0.2, -0.7), (0.0, 1.0)]);
        let v = DualVars::new(Table::Unigram([-2.0, -2.0])).unwrap();
        let l = lagrangian(&zero, &v, &xs, &uni(0.5, 0.5)).unwrap();
        assert!((l - (-1.0 + std::f64::consts::LN_2)).abs() < 1e-14);

        let bigram = Prior::Bigram(BigramPrior::new([[0.25; 2]; 2]).unwrap());
        let v = DualVars::new(Table::Bigram([[-4.0; 2]; 2])).unwrap();
        let l = lagrangian(&zero, &v, &xs, &bigram).unwrap();
        assert!((l - (-1.0 + 4f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn non_negative_duals_rejected() {
        assert!(matches!(DualVars::new(Table::Unigram([-1.0, 0.0])), Err(Error::Domain(_))));
        assert!(DualVars::new(Table::Unigram([-1.0, 0.5])).is_err());
    }

    #[test]
    fn dual_optimum_examples() {
        assert_eq!(dual_optimum(&Table::Unigram([0.5, 0.5])).unwrap().entries(), &[-2.0, -2.0]);
        let v = dual_optimum(&Table::Unigram([0.25, 0.75])).unwrap();
        assert_eq!(v.entries()[0], -4.0);
        assert!((v.entries()[1] + 4.0 / 3.0).abs() < 1e-15);
        let v = dual_optimum(&Table::Bigram([[0.25; 2]; 2])).unwrap();
        assert_eq!(v.entries(), &[-4.0; 4]);
        assert!(dual_optimum(&Table::Unigram([1.0, 0.0])).is_err());
    }

    #[test]
    fn gradient_examples() {
        let prior = uni(0.5, 0.5);
        let v = DualVars::new(Table::Unigram([-2.0, -2.0])).unwrap();
        let origin = pts(&[(0.0, 0.0); 5]);
        let g = grad_theta(&ModelParams::new(0.3, -1.2), &v, &origin, &prior).unwrap();
        assert_eq!([g[0], g[1]], [0.0, 0.0]);
        let xs = pts(&[(1.0, 2.0), (-3.0, 0.5), (0.2, -0.7)]);
        let g = grad_theta(&ModelParams::new(0.0, 0.0), &v, &xs, &prior).unwrap();
        assert!(g.iter().all(|e| e.abs() < 1e-15), "{g:?}");

        let v = DualVars::new(Table::Unigram([-1.0, -1.0])).unwrap();
        let g = grad_dual(&ModelParams::new(0.0, 0.0), &v, &xs, &prior).unwrap();
        assert_eq!(g, Table::Unigram([-0.25, -0.25]));
    }

    #[test]
    fn dual_gradient_vanishes_at_optimum() {
        let prior = Prior::Bigram(BigramPrior::new([[0.4, 0.3], [0.2, 0.1]]).unwrap());
        let params = ModelParams::new(0.4, -0.2);
        let xs = pts(&[(1.0, 2.0), (-3.0, 0.5), (0.2, -0.7), (0.9, 0.1)]);
        let v = dual_optimum(&bigram_stats(&params, &xs).unwrap()).unwrap();
        let g = grad_dual(&params, &v, &xs, &prior).unwrap();
        assert!(g.entries().iter().all(|e| e.abs() < 1e-15), "{g:?}");
    }

    #[test]
    fn shape_mismatch_rejected() {
        let v = DualVars::new(Table::Bigram([[-1.0; 2]; 2])).unwrap();
        let xs = pts(&[(1.0, 2.0), (0.0, 1.0)]);
        assert!(grad_theta(&ModelParams::new(0.0, 0.0), &v, &xs, &uni(0.5, 0.5)).is_err());
        assert!(lagrangian(&ModelParams::new(0.0, 0.0), &v, &xs, &uni(0.5, 0.5)).is_err());
    }
}
