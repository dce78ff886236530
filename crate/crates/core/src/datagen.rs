//! Synthetic labelled sequences: i.i.d. or first-order Markov labels with
//! isotropic Gaussian emissions, and contiguous train/validation/test splits.

use std::fmt;
use std::io::{Read, Write};
use std::ops::Range;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{InputPoint, Mat2};
use crate::prior::{steady_state, TransitionMatrix, UnigramPrior};

pub const DEFAULT_MU0: [f64; 2] = [-0.504, -0.264];
pub const DEFAULT_MU1: [f64; 2] = [1.646, 0.181];
pub const DEFAULT_SIGMA2: f64 = 0.4;
pub const DEFAULT_SIZES: [usize; 3] = [50_000, 5_000, 5_000];

pub(crate) fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream seed from a base seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionSpec {
    pub mu0: [f64; 2],
    pub mu1: [f64; 2],
    pub sigma2: f64,
}

impl EmissionSpec {
    pub fn new(mu0: [f64; 2], mu1: [f64; 2], sigma2: f64) -> Result<Self> {
        let spec = EmissionSpec { mu0, mu1, sigma2 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return Err(Error::invalid(format!("sigma2 must be positive, got {}", self.sigma2)));
        }
        if !self.mu0.iter().chain(&self.mu1).all(|m| m.is_finite()) {
            return Err(Error::invalid("class means must be finite"));
        }
        Ok(())
    }
}

impl Default for EmissionSpec {
    fn default() -> Self {
        EmissionSpec {
            mu0: DEFAULT_MU0,
            mu1: DEFAULT_MU1,
            sigma2: DEFAULT_SIGMA2,
        }
    }
}

fn check_len(t: usize, min: usize) -> Result<()> {
    if t < min {
        return Err(Error::invalid(format!("sequence length must be at least {min}, got {t}")));
    }
    Ok(())
}

pub fn sample_labels_iid(p: &UnigramPrior, t: usize, seed: u64) -> Result<Vec<u8>> {
    check_len(t, 1)?;
    let p1 = p.probs()[1];
    let mut rng = rng_from(seed);
    Ok((0..t).map(|_| u8::from(rng.gen::<f64>() < p1)).collect())
}

/// Markov chain started from its steady state.
pub fn sample_labels_markov(trans: &TransitionMatrix, t: usize, seed: u64) -> Result<Vec<u8>> {
    check_len(t, 2)?;
    let pi = steady_state(trans)?;
    let mut rng = rng_from(seed);
    let first = u8::from(rng.gen::<f64>() < pi[1]);
    Ok(run_chain(trans.matrix(), first, t, &mut rng))
}

/// Markov chain with a fixed initial state; works for any stochastic matrix.
pub fn sample_labels_markov_from(
    trans: &TransitionMatrix,
    start: u8,
    t: usize,
    seed: u64,
) -> Result<Vec<u8>> {
    check_len(t, 1)?;
    if start > 1 {
        return Err(Error::invalid(format!("start state {start} is not binary")));
    }
    let mut rng = rng_from(seed);
    Ok(run_chain(trans.matrix(), start, t, &mut rng))
}

fn run_chain(p: Mat2, first: u8, t: usize, rng: &mut impl Rng) -> Vec<u8> {
    let mut labels = Vec::with_capacity(t);
    let mut cur = first;
    labels.push(cur);
    for _ in 1..t {
        let u: f64 = rng.gen();
        cur = u8::from(u < p[cur as usize][1]);
        labels.push(cur);
    }
    labels
}

/// Standard normal pair by the Box-Muller transform.
pub(crate) fn box_muller(rng: &mut impl Rng) -> (f64, f64) {
    // 1 - u lies in (0, 1], keeping ln finite
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let a = std::f64::consts::TAU * u2;
    (r * a.cos(), r * a.sin())
}

pub fn sample_emissions(labels: &[u8], spec: &EmissionSpec, seed: u64) -> Result<Vec<InputPoint>> {
    check_len(labels.len(), 1)?;
    spec.validate()?;
    let sd = spec.sigma2.sqrt();
    let mut rng = rng_from(seed);
    labels
        .iter()
        .map(|&y| {
            let mu = match y {
                0 => spec.mu0,
                1 => spec.mu1,
                other => return Err(Error::invalid(format!("label {other} is not binary"))),
            };
            let (z0, z1) = box_muller(&mut rng);
            Ok(InputPoint::new(mu[0] + sd * z0, mu[1] + sd * z1))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Train,
    Val,
    Test,
}

impl SplitKind {
    pub const ALL: [SplitKind; 3] = [SplitKind::Train, SplitKind::Val, SplitKind::Test];

    pub fn as_str(&self) -> &'static str {
        match self {
            SplitKind::Train => "train",
            SplitKind::Val => "val",
            SplitKind::Test => "test",
        }
    }
}

impl fmt::Display for SplitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitKind::Train),
            "val" => Ok(SplitKind::Val),
            "test" => Ok(SplitKind::Test),
            other => Err(Error::invalid(format!("unknown split {other:?}"))),
        }
    }
}

/// Contiguous split ranges, in order train | val | test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitRanges {
    pub train: Range<usize>,
    pub val: Range<usize>,
    pub test: Range<usize>,
}

impl SplitRanges {
    pub fn get(&self, kind: SplitKind) -> Range<usize> {
        match kind {
            SplitKind::Train => self.train.clone(),
            SplitKind::Val => self.val.clone(),
            SplitKind::Test => self.test.clone(),
        }
    }
}

/// Inputs with ground-truth labels and a split tag per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<InputPoint>,
    pub labels: Vec<u8>,
    pub splits: Vec<SplitKind>,
}

pub fn split_dataset(inputs: Vec<InputPoint>, labels: Vec<u8>, sizes: [usize; 3]) -> Result<Dataset> {
    if inputs.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} inputs but {} labels",
            inputs.len(),
            labels.len()
        )));
    }
    let total: usize = sizes.iter().sum();
    if total != inputs.len() {
        return Err(Error::invalid(format!(
            "split sizes {sizes:?} sum to {total}, sequence length is {}",
            inputs.len()
        )));
    }
    let splits = SplitKind::ALL
        .iter()
        .zip(sizes)
        .flat_map(|(&k, n)| std::iter::repeat_n(k, n))
        .collect();
    Ok(Dataset {
        inputs,
        labels,
        splits,
    })
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// `Some` iff every split occupies one contiguous block and the blocks
    /// appear in the order train, val, test. Empty splits are allowed.
    pub fn split_ranges(&self) -> Option<SplitRanges> {
        let mut bounds = [0usize; 4];
        let mut pos = 0;
        for (i, kind) in SplitKind::ALL.iter().enumerate() {
            bounds[i] = pos;
            while pos < self.splits.len() && self.splits[pos] == *kind {
                pos += 1;
            }
        }
        bounds[3] = pos;
        (pos == self.splits.len()).then(|| SplitRanges {
            train: bounds[0]..bounds[1],
            val: bounds[1]..bounds[2],
            test: bounds[2]..bounds[3],
        })
    }

    /// Rows tagged `kind`, in sequence order.
    pub fn subset(&self, kind: SplitKind) -> (Vec<InputPoint>, Vec<u8>) {
        self.splits
            .iter()
            .zip(self.inputs.iter().zip(&self.labels))
            .filter(|(k, _)| **k == kind)
            .map(|(_, (x, y))| (*x, *y))
            .unzip()
    }

    pub fn split_sizes(&self) -> [usize; 3] {
        SplitKind::ALL.map(|k| self.splits.iter().filter(|s| **s == k).count())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> std::result::Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x_a", "x_b", "label", "split"])?;
        for ((x, y), s) in self.inputs.iter().zip(&self.labels).zip(&self.splits) {
            out.write_record([
                x.x_a.to_string(),
                x.x_b.to_string(),
                y.to_string(),
                s.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr
            .headers()
            .map_err(|e| Error::invalid(format!("dataset csv: {e}")))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["x_a", "x_b", "label", "split"] {
            return Err(Error::invalid(format!("unexpected dataset header {headers:?}")));
        }
        let mut ds = Dataset {
            inputs: Vec::new(),
            labels: Vec::new(),
            splits: Vec::new(),
        };
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::invalid(format!("dataset csv: {e}")))?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let bad = |what: &str| Error::invalid(format!("dataset row {}: bad {what}", line + 1));
            let x_a: f64 = field(0).parse().map_err(|_| bad("x_a"))?;
            let x_b: f64 = field(1).parse().map_err(|_| bad("x_b"))?;
            let label = match field(2) {
                "0" => 0,
                "1" => 1,
                _ => return Err(bad("label")),
            };
            ds.inputs.push(InputPoint::new(x_a, x_b));
            ds.labels.push(label);
            ds.splits.push(field(3).parse()?);
        }
        if ds.is_empty() {
            return Err(Error::invalid("dataset has no rows"));
        }
        Ok(ds)
    }
}

/// How labels are generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelModel {
    Unigram([f64; 2]),
    Transition(Mat2),
}

/// Everything needed to regenerate a dataset; persisted next to its CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSpec {
    pub labels: LabelModel,
    pub emission: EmissionSpec,
    pub sizes: [usize; 3],
    pub seed: u64,
}

impl GenerationSpec {
    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn generate(&self) -> Result<Dataset> {
        let t = self.total();
        let label_seed = derive_seed(self.seed, 1);
        let labels = match self.labels {
            LabelModel::Unigram(p) => sample_labels_iid(&UnigramPrior::new(p[0], p[1])?, t, label_seed)?,
            LabelModel::Transition(m) => {
                sample_labels_markov(&TransitionMatrix::new(m)?, t, label_seed)?
            }
        };
        let inputs = sample_emissions(&labels, &self.emission, derive_seed(self.seed, 2))?;
        split_dataset(inputs, labels, self.sizes)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("generation spec serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::invalid(format!("generation spec json: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::{bigram_from_labels, bigram_from_transition};

    const FLAGSHIP: Mat2 = [[0.6, 0.4], [0.9, 0.1]];

    #[test]
    fn degenerate_iid() {
        let p = UnigramPrior::new(1.0, 0.0).unwrap();
        assert!(sample_labels_iid(&p, 1000, 3).unwrap().iter().all(|&y| y == 0));
        assert!(sample_labels_iid(&p, 0, 3).is_err());
    }

    #[test]
    fn iid_frequency_and_determinism() {
        let p = UnigramPrior::new(0.692, 0.308).unwrap();
        let a = sample_labels_iid(&p, 60_000, 11).unwrap();
        let freq = a.iter().filter(|&&y| y == 1).count() as f64 / 60_000.0;
        assert!((freq - 0.308).abs() < 0.01, "{freq}");
        assert_eq!(a, sample_labels_iid(&p, 60_000, 11).unwrap());
        assert_ne!(a, sample_labels_iid(&p, 60_000, 12).unwrap());
    }

    #[test]
    fn markov_pair_frequencies() {
        let t = TransitionMatrix::new(FLAGSHIP).unwrap();
        let labels = sample_labels_markov(&t, 60_000, 5).unwrap();
        let emp = bigram_from_labels(&labels).unwrap().matrix();
        let expected = [[0.4154, 0.2769], [0.2769, 0.0308]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((emp[i][j] - expected[i][j]).abs() < 0.01, "{emp:?}");
            }
        }
    }

    #[test]
    fn markov_empirical_bigram_converges() {
        let t = TransitionMatrix::new([[0.3, 0.7], [0.4, 0.6]]).unwrap();
        let labels = sample_labels_markov(&t, 10_000, 9).unwrap();
        let emp = bigram_from_labels(&labels).unwrap().matrix();
        let exact = bigram_from_transition(&t).unwrap().matrix();
        for i in 0..2 {
            for j in 0..2 {
                assert!((emp[i][j] - exact[i][j]).abs() < 0.02);
            }
        }
    }

    #[test]
    fn markov_transition_counts_pass_chi_square() {
        // chi-square with 1 dof per row; 0.01 critical value is 6.635
        let t = TransitionMatrix::new(FLAGSHIP).unwrap();
        let labels = sample_labels_markov(&t, 60_000, 21).unwrap();
        let mut counts = [[0f64; 2]; 2];
        for w in labels.windows(2) {
            counts[w[0] as usize][w[1] as usize] += 1.0;
        }
        for i in 0..2 {
            let n = counts[i][0] + counts[i][1];
            let stat: f64 = (0..2)
                .map(|j| {
                    let e = n * FLAGSHIP[i][j];
                    (counts[i][j] - e).powi(2) / e
                })
                .sum();
            assert!(stat < 6.635, "row {i}: chi2 = {stat}");
        }
    }

    #[test]
    fn markov_errors_and_forced_start() {
        let id = TransitionMatrix::new([[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(sample_labels_markov(&id, 100, 1).is_err());
        let flip = TransitionMatrix::new([[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(sample_labels_markov(&flip, 100, 1).is_err());
        let alt = sample_labels_markov_from(&flip, 0, 6, 1).unwrap();
        assert_eq!(alt, vec![0, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn zero_variance_limit_hits_means() {
        let spec = EmissionSpec::new(DEFAULT_MU0, DEFAULT_MU1, 1e-300).unwrap();
        let xs = sample_emissions(&[0, 1, 1, 0], &spec, 4).unwrap();
        assert!((xs[0].x_a - DEFAULT_MU0[0]).abs() < 1e-100);
        assert!((xs[1].x_b - DEFAULT_MU1[1]).abs() < 1e-100);
        assert!(EmissionSpec::new(DEFAULT_MU0, DEFAULT_MU1, 0.0).is_err());
    }

    #[test]
    fn emission_moments() {
        let p = UnigramPrior::new(0.5, 0.5).unwrap();
        let labels = sample_labels_iid(&p, 60_000, 2).unwrap();
        let xs = sample_emissions(&labels, &EmissionSpec::default(), 3).unwrap();
        for (class, mu) in [(0u8, DEFAULT_MU0), (1, DEFAULT_MU1)] {
            let pts: Vec<_> = xs.iter().zip(&labels).filter(|(_, y)| **y == class).map(|(x, _)| *x).collect();
            let n = pts.len() as f64;
            let ma = pts.iter().map(|x| x.x_a).sum::<f64>() / n;
            let mb = pts.iter().map(|x| x.x_b).sum::<f64>() / n;
            assert!((ma - mu[0]).abs() < 0.05 && (mb - mu[1]).abs() < 0.05);
            let caa = pts.iter().map(|x| (x.x_a - ma).powi(2)).sum::<f64>() / n;
            let cbb = pts.iter().map(|x| (x.x_b - mb).powi(2)).sum::<f64>() / n;
            let cab = pts.iter().map(|x| (x.x_a - ma) * (x.x_b - mb)).sum::<f64>() / n;
            assert!((caa - 0.4).abs() < 0.02 && (cbb - 0.4).abs() < 0.02 && cab.abs() < 0.02);
        }
    }

    #[test]
    fn splits() {
        let xs = vec![InputPoint::new(0.0, 0.0); 10];
        let ds = split_dataset(xs.clone(), vec![0; 10], [8, 1, 1]).unwrap();
        let r = ds.split_ranges().unwrap();
        assert_eq!((r.train, r.val, r.test), (0..8, 8..9, 9..10));
        assert!(split_dataset(xs, vec![0; 10], [8, 1, 2]).is_err());
    }

    #[test]
    fn shuffled_splits_are_not_contiguous() {
        let mut ds = split_dataset(vec![InputPoint::new(0.0, 0.0); 4], vec![0; 4], [2, 1, 1]).unwrap();
        ds.splits.swap(1, 2);
        assert!(ds.split_ranges().is_none());
    }

    #[test]
    fn csv_round_trip() {
        let spec = GenerationSpec {
            labels: LabelModel::Transition(FLAGSHIP),
            emission: EmissionSpec::default(),
            sizes: [6, 2, 2],
            seed: 7,
        };
        let ds = spec.generate().unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"x_a,x_b,label,split\n"));
        assert_eq!(Dataset::read_csv(&buf[..]).unwrap(), ds);
        assert_eq!(GenerationSpec::from_json(&spec.to_json()).unwrap(), spec);
    }

    #[test]
    fn default_sizes() {
        let spec = GenerationSpec {
            labels: LabelModel::Transition(FLAGSHIP),
            emission: EmissionSpec::default(),
            sizes: DEFAULT_SIZES,
            seed: 1,
        };
        let ds = spec.generate().unwrap();
        assert_eq!(ds.len(), 60_000);
        assert_eq!(ds.split_sizes(), [50_000, 5_000, 5_000]);
    }
}
