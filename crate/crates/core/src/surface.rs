//! Cost surfaces on a 2-D grid of offsets around an anchor point.
//!
//! The primal surface moves `(w_a, w_b)` directly. The primal-dual surface
//! moves `theta` along one random unit direction and `V` along another; cells
//! whose duals leave `V < 0` hold `+inf`.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{box_muller, rng_from};
use crate::error::{Error, Result};
use crate::model::{InputPoint, ModelParams, Theta};
use crate::objective::{cost_j, dual_optimum, lagrangian_from_stats, stats_for, DualVars, Table};
use crate::prior::Prior;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub min1: f64,
    pub max1: f64,
    pub n1: usize,
    pub min2: f64,
    pub max2: f64,
    pub n2: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::square(-5.0, 5.0, 81)
    }
}

impl GridSpec {
    pub fn square(min: f64, max: f64, n: usize) -> Self {
        GridSpec {
            min1: min,
            max1: max,
            n1: n,
            min2: min,
            max2: max,
            n2: n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (lo, hi, n) in [(self.min1, self.max1, self.n1), (self.min2, self.max2, self.n2)] {
            if n == 0 {
                return Err(Error::invalid("grid axis has no points"));
            }
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::invalid(format!("bad grid range [{lo}, {hi}]")));
            }
            if n == 1 && lo != hi {
                return Err(Error::invalid("a single-point axis needs min == max"));
            }
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![lo];
        }
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn axis1(&self) -> Vec<f64> {
        Self::axis(self.min1, self.max1, self.n1)
    }

    pub fn axis2(&self) -> Vec<f64> {
        Self::axis(self.min2, self.max2, self.n2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceKind {
    Primal,
    PrimalDual {
        v0: Vec<f64>,
        d_theta: Theta,
        d_v: Vec<f64>,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    /// `z[i][j]` is the value at `(axis1[i], axis2[j])`.
    pub z: Vec<Vec<f64>>,
    pub theta0: ModelParams,
    pub kind: SurfaceKind,
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

impl SurfaceGrid {
    /// Value at the cell whose offsets are both exactly zero, if the grid has one.
    pub fn anchor_value(&self) -> Option<f64> {
        let i = self.axis1.iter().position(|&l| l == 0.0)?;
        let j = self.axis2.iter().position(|&l| l == 0.0)?;
        Some(self.z[i][j])
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let t = self.theta0.theta();
        match &self.kind {
            SurfaceKind::Primal => {
                writeln!(w, "# anchor=theta:{}", join(&t))?;
                writeln!(w, "# surface=primal axes=w_a,w_b gamma={}", self.theta0.gamma)?;
            }
            SurfaceKind::PrimalDual { v0, d_theta, d_v, seed } => {
                writeln!(w, "# anchor=theta:{} v:{}", join(&t), join(v0))?;
                writeln!(
                    w,
                    "# surface=primal-dual d_theta:{} d_v:{} seed={} gamma={}",
                    join(d_theta),
                    join(d_v),
                    seed,
                    self.theta0.gamma
                )?;
            }
        }
        writeln!(w, "lambda1,lambda2,z")?;
        for (l1, row) in self.axis1.iter().zip(&self.z) {
            for (l2, z) in self.axis2.iter().zip(row) {
                writeln!(w, "{l1},{l2},{z}")?;
            }
        }
        Ok(())
    }
}

fn check(theta0: &ModelParams, inputs: &[InputPoint], prior: &Prior, grid: &GridSpec) -> Result<()> {
    grid.validate()?;
    theta0.validate()?;
    let min = if prior.is_bigram() { 2 } else { 1 };
    if inputs.len() < min {
        return Err(Error::invalid("too few inputs for the surface"));
    }
    Ok(())
}

/// `J(w_a + l1, w_b + l2)` over the grid, bias held at its anchor value.
pub fn primal_surface(
    theta0: &ModelParams,
    inputs: &[InputPoint],
    prior: &Prior,
    grid: &GridSpec,
) -> Result<SurfaceGrid> {
    check(theta0, inputs, prior, grid)?;
    let (axis1, axis2) = (grid.axis1(), grid.axis2());
    let z = axis1
        .par_iter()
        .map(|&l1| {
            axis2
                .iter()
                .map(|&l2| {
                    let p = ModelParams {
                        w_a: theta0.w_a + l1,
                        w_b: theta0.w_b + l2,
                        ..*theta0
                    };
                    cost_j(prior, &stats_for(prior, &p, inputs)?)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SurfaceGrid {
        axis1,
        axis2,
        z,
        theta0: *theta0,
        kind: SurfaceKind::Primal,
    })
}

fn unit_gaussian(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let mut v = Vec::with_capacity(n + 1);
        while v.len() < n {
            let (a, b) = box_muller(rng);
            v.extend([a, b]);
        }
        v.truncate(n);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Unit directions in `(w_a, w_b, bias)` and in dual space drawn from `seed`.
pub fn random_directions(bigram: bool, seed: u64) -> (Theta, Vec<f64>) {
    let mut rng = rng_from(seed);
    let t = unit_gaussian(&mut rng, 3);
    let v = unit_gaussian(&mut rng, if bigram { 4 } else { 2 });
    ([t[0], t[1], t[2]], v)
}

/// Duals that maximize `L` at `theta0`, i.e. the anchor at which
/// `L(theta0, V0) = J(theta0) - 1`.
pub fn anchor_duals(theta0: &ModelParams, inputs: &[InputPoint], prior: &Prior) -> Result<DualVars> {
    dual_optimum(&stats_for(prior, theta0, inputs)?)
}

/// `L(theta0 + l1 d_theta, V0 + l2 d_V)` over the grid with random unit
/// directions drawn from `seed`.
pub fn primal_dual_surface(
    theta0: &ModelParams,
    v0: &DualVars,
    inputs: &[InputPoint],
    prior: &Prior,
    grid: &GridSpec,
    seed: u64,
) -> Result<SurfaceGrid> {
    check(theta0, inputs, prior, grid)?;
    let prior_table = Table::from(prior);
    if v0.table().is_bigram() != prior_table.is_bigram() {
        return Err(Error::invalid("dual variables do not match the prior shape"));
    }
    let (d_theta, d_v) = random_directions(prior.is_bigram(), seed);
    let dv_table = match prior_table {
        Table::Unigram(_) => Table::Unigram([d_v[0], d_v[1]]),
        Table::Bigram(_) => Table::Bigram([[d_v[0], d_v[1]], [d_v[2], d_v[3]]]),
    };
    let (axis1, axis2) = (grid.axis1(), grid.axis2());
    let t0 = theta0.theta();
    let z = axis1
        .par_iter()
        .map(|&l1| {
            let p = theta0.with_theta([0, 1, 2].map(|k| t0[k] + l1 * d_theta[k]));
            let stats = stats_for(prior, &p, inputs)?;
            Ok(axis2
                .iter()
                .map(|&l2| {
                    let v = v0.table().zip_with(&dv_table, |e, d| e + l2 * d);
                    match DualVars::new(v) {
                        Ok(duals) => lagrangian_from_stats(&prior_table, &duals, &stats),
                        Err(_) => f64::INFINITY,
                    }
                })
                .collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(SurfaceGrid {
        axis1,
        axis2,
        z,
        theta0: *theta0,
        kind: SurfaceKind::PrimalDual {
            v0: v0.entries().to_vec(),
            d_theta,
            d_v,
            seed,
        },
    })
}
