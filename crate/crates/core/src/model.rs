//! Two-logit log-linear classifier.
//!
//! Class 0 has logit `gamma * (w_a * x_a + bias)`, class 1 has logit
//! `gamma * w_b * x_b`. With `bias = 0` this is the plain one-weight-per-coordinate
//! log-linear model. `gamma` is a fixed scale that no optimizer touches.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2x2 matrix, row-major.
pub type Mat2 = [[f64; 2]; 2];

/// Trainable parameters `(w_a, w_b, bias)`.
pub type Theta = [f64; 3];

/// `d p_k / d theta_j`: rows are classes, columns are `(w_a, w_b, bias)`.
pub type Jacobian = [[f64; 3]; 2];

pub const DEFAULT_GAMMA: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub w_a: f64,
    pub w_b: f64,
    #[serde(default)]
    pub bias: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_gamma() -> f64 {
    DEFAULT_GAMMA
}

impl ModelParams {
    pub fn new(w_a: f64, w_b: f64) -> Self {
        Self::with_gamma(w_a, w_b, DEFAULT_GAMMA)
    }

    pub fn with_gamma(w_a: f64, w_b: f64, gamma: f64) -> Self {
        ModelParams {
            w_a,
            w_b,
            bias: 0.0,
            gamma,
        }
    }

    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias = bias;
        self
    }

    pub fn theta(&self) -> Theta {
        [self.w_a, self.w_b, self.bias]
    }

    /// Same gamma, new trainable parameters.
    pub fn with_theta(&self, t: Theta) -> Self {
        ModelParams {
            w_a: t[0],
            w_b: t[1],
            bias: t[2],
            gamma: self.gamma,
        }
    }

    /// Same gamma and bias, new weights.
    pub fn with_weights(&self, w: [f64; 2]) -> Self {
        self.with_theta([w[0], w[1], self.bias])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w_a.is_finite() && self.w_b.is_finite() && self.bias.is_finite()) {
            return Err(Error::invalid("model weights must be finite"));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::invalid(format!(
                "gamma must be finite and positive, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model params serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: ModelParams = serde_json::from_str(s)
            .map_err(|e| Error::invalid(format!("model json: {e}")))?;
        p.validate()?;
        Ok(p)
    }
}

/// One 2-D observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputPoint {
    pub x_a: f64,
    pub x_b: f64,
}

impl InputPoint {
    pub fn new(x_a: f64, x_b: f64) -> Self {
        InputPoint { x_a, x_b }
    }

    pub fn is_finite(&self) -> bool {
        self.x_a.is_finite() && self.x_b.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorPair {
    pub p0: f64,
    pub p1: f64,
}

impl PosteriorPair {
    pub fn as_array(&self) -> [f64; 2] {
        [self.p0, self.p1]
    }
}

fn check(params: &ModelParams, x: &InputPoint) -> Result<()> {
    params.validate()?;
    if !x.is_finite() {
        return Err(Error::invalid(format!(
            "non-finite input point ({}, {})",
            x.x_a, x.x_b
        )));
    }
    Ok(())
}

/// Softmax over the two logits, without validation.
#[inline]
pub(crate) fn posterior_unchecked(params: &ModelParams, x: &InputPoint) -> PosteriorPair {
    let l0 = params.gamma * (params.w_a * x.x_a + params.bias);
    let l1 = params.gamma * params.w_b * x.x_b;
    // exp of the smaller logit minus the larger one never overflows
    let (d, zero_wins) = if l0 >= l1 { (l1 - l0, true) } else { (l0 - l1, false) };
    let e = d.exp();
    let big = 1.0 / (1.0 + e);
    let small = e / (1.0 + e);
    if zero_wins {
        PosteriorPair { p0: big, p1: small }
    } else {
        PosteriorPair { p0: small, p1: big }
    }
}

pub fn posterior(params: &ModelParams, x: &InputPoint) -> Result<PosteriorPair> {
    check(params, x)?;
    Ok(posterior_unchecked(params, x))
}

/// Hard decision: 0 iff `p0 >= 0.5`.
pub fn predict(params: &ModelParams, x: &InputPoint) -> Result<u8> {
    let p = posterior(params, x)?;
    Ok(if p.p0 >= 0.5 { 0 } else { 1 })
}

#[inline]
pub(crate) fn jacobian_from(params: &ModelParams, x: &InputPoint, p: &PosteriorPair) -> Jacobian {
    let s = params.gamma * p.p0 * p.p1;
    [[s * x.x_a, -s * x.x_b, s], [-s * x.x_a, s * x.x_b, -s]]
}

/// `(ln p0, ln p1)` computed with log-sum-exp.
pub(crate) fn log_posterior_unchecked(params: &ModelParams, x: &InputPoint) -> [f64; 2] {
    let l0 = params.gamma * (params.w_a * x.x_a + params.bias);
    let l1 = params.gamma * params.w_b * x.x_b;
    let m = l0.max(l1);
    let lse = m + ((l0 - m).exp() + (l1 - m).exp()).ln();
    [l0 - lse, l1 - lse]
}

/// `gamma p0 p1 X` with `X = [[x_a, -x_b, 1], [-x_a, x_b, -1]]`.
pub fn posterior_jacobian(params: &ModelParams, x: &InputPoint) -> Result<Jacobian> {
    let p = posterior(params, x)?;
    Ok(jacobian_from(params, x, &p))
}
