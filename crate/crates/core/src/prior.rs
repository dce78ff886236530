//! Label priors: unigram frequencies, Markov transition matrices and the
//! bigram joint distributions derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Mat2;

/// Entries within this distance of a valid distribution are renormalized.
pub const RENORMALIZE_TOL: f64 = 1e-9;

fn check_entries(entries: &[f64], what: &str) -> Result<()> {
    for &e in entries {
        if !e.is_finite() || e < 0.0 {
            return Err(Error::invalid(format!("{what}: entry {e} is not a non-negative number")));
        }
    }
    Ok(())
}

fn normalized<const N: usize>(mut v: [f64; N], what: &str) -> Result<[f64; N]> {
    check_entries(&v, what)?;
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > RENORMALIZE_TOL {
        return Err(Error::invalid(format!("{what}: entries sum to {s}, expected 1")));
    }
    v.iter_mut().for_each(|e| *e /= s);
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnigramPrior {
    p: [f64; 2],
}

impl UnigramPrior {
    pub fn new(p0: f64, p1: f64) -> Result<Self> {
        Ok(UnigramPrior {
            p: normalized([p0, p1], "unigram prior")?,
        })
    }

    pub fn probs(&self) -> [f64; 2] {
        self.p
    }
}

/// `P[i][j] = p(y_t = j | y_{t-1} = i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix {
    p: Mat2,
}

impl TransitionMatrix {
    pub fn new(p: Mat2) -> Result<Self> {
        let r0 = normalized(p[0], "transition row 0")?;
        let r1 = normalized(p[1], "transition row 1")?;
        Ok(TransitionMatrix { p: [r0, r1] })
    }

    pub fn matrix(&self) -> Mat2 {
        self.p
    }
}

/// Joint distribution of adjacent labels, `P[i][j] = p(y_{t-1} = i, y_t = j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BigramPrior {
    p: Mat2,
}

impl BigramPrior {
    pub fn new(p: Mat2) -> Result<Self> {
        let flat = normalized([p[0][0], p[0][1], p[1][0], p[1][1]], "bigram prior")?;
        Ok(BigramPrior {
            p: [[flat[0], flat[1]], [flat[2], flat[3]]],
        })
    }

    pub fn matrix(&self) -> Mat2 {
        self.p
    }
}

/// Either prior order; selects unigram or bigram training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prior {
    Unigram(UnigramPrior),
    Bigram(BigramPrior),
}

impl Prior {
    pub fn is_bigram(&self) -> bool {
        matches!(self, Prior::Bigram(_))
    }

    /// Prior entries in row-major order (2 for unigram, 4 for bigram).
    pub fn entries(&self) -> Vec<f64> {
        match self {
            Prior::Unigram(u) => u.p.to_vec(),
            Prior::Bigram(b) => b.p.as_flattened().to_vec(),
        }
    }

    /// `-sum p ln p`, the lower bound of the matching cost.
    pub fn entropy(&self) -> f64 {
        -self
            .entries()
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|p| p * p.ln())
            .sum::<f64>()
    }
}

pub fn unigram_from_labels(labels: &[u8]) -> Result<UnigramPrior> {
    if labels.is_empty() {
        return Err(Error::invalid("cannot estimate a unigram prior from no labels"));
    }
    let ones = count_ones(labels)?;
    let t = labels.len() as f64;
    let p1 = ones as f64 / t;
    UnigramPrior::new(1.0 - p1, p1)
}

fn count_ones(labels: &[u8]) -> Result<usize> {
    labels.iter().try_fold(0usize, |acc, &l| match l {
        0 => Ok(acc),
        1 => Ok(acc + 1),
        other => Err(Error::invalid(format!("label {other} is not binary"))),
    })
}

/// Stationary distribution of an ergodic two-state chain.
pub fn steady_state(trans: &TransitionMatrix) -> Result<[f64; 2]> {
    let p = trans.p;
    let leave0 = p[0][1];
    let leave1 = p[1][0];
    if leave0 <= 0.0 || leave1 <= 0.0 {
        return Err(Error::NoUniqueSteadyState(format!(
            "transition matrix {p:?} is reducible"
        )));
    }
    if p[0][0] <= 0.0 && p[1][1] <= 0.0 {
        return Err(Error::NoUniqueSteadyState(format!(
            "transition matrix {p:?} is periodic"
        )));
    }
    let z = leave0 + leave1;
    Ok([leave1 / z, leave0 / z])
}

pub fn bigram_from_transition(trans: &TransitionMatrix) -> Result<BigramPrior> {
    let pi = steady_state(trans)?;
    let p = trans.p;
    BigramPrior::new([
        [pi[0] * p[0][0], pi[0] * p[0][1]],
        [pi[1] * p[1][0], pi[1] * p[1][1]],
    ])
}

/// Empirical adjacent-pair frequencies.
pub fn bigram_from_labels(labels: &[u8]) -> Result<BigramPrior> {
    if labels.len() < 2 {
        return Err(Error::invalid("a bigram prior needs at least two labels"));
    }
    count_ones(labels)?;
    let mut counts = [[0usize; 2]; 2];
    for w in labels.windows(2) {
        counts[w[0] as usize][w[1] as usize] += 1;
    }
    let n = (labels.len() - 1) as f64;
    BigramPrior::new([
        [counts[0][0] as f64 / n, counts[0][1] as f64 / n],
        [counts[1][0] as f64 / n, counts[1][1] as f64 / n],
    ])
}

/// JSON form accepted for priors: `{"unigram": [p0, p1]}`, `{"transition": [[..],[..]]}`
/// or `{"bigram": [[..],[..]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorSpec {
    Unigram([f64; 2]),
    Transition(Mat2),
    Bigram(Mat2),
}

impl PriorSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::invalid(format!("prior json: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("prior spec serialize")
    }

    pub fn build(&self) -> Result<Prior> {
        Ok(match *self {
            PriorSpec::Unigram(p) => Prior::Unigram(UnigramPrior::new(p[0], p[1])?),
            PriorSpec::Transition(m) => {
                Prior::Bigram(bigram_from_transition(&TransitionMatrix::new(m)?)?)
            }
            PriorSpec::Bigram(m) => Prior::Bigram(BigramPrior::new(m)?),
        })
    }
}
