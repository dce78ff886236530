//! Caesar cipher and frequency-matching decryption.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Standard English letter frequencies, one `LETTER,frequency` line per letter.
pub const ENGLISH_FREQUENCIES: &str = include_str!("../data/english_letters.csv");

/// Relative frequencies of A-Z; all zeros when the text has no letters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LetterHistogram {
    pub freq: [f64; 26],
}

impl LetterHistogram {
    pub fn english() -> Self {
        Self::parse(ENGLISH_FREQUENCIES).expect("bundled frequency table is valid")
    }

    /// Parses `LETTER,frequency` lines. Values are normalized to sum 1, so raw
    /// counts are accepted too. Blank lines and `#` comments are skipped.
    pub fn parse(s: &str) -> Result<Self> {
        let mut freq = [0.0; 26];
        let mut seen = [false; 26];
        for (n, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::invalid(format!("reference line {}: {line:?}", n + 1));
            let (letter, value) = line.split_once(',').ok_or_else(bad)?;
            let letter = letter.trim();
            let c = match letter.as_bytes() {
                [c] if c.is_ascii_alphabetic() => c.to_ascii_uppercase(),
                _ => return Err(bad()),
            };
            let v: f64 = value.trim().parse().map_err(|_| bad())?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(bad());
            }
            let k = (c - b'A') as usize;
            if seen[k] {
                return Err(Error::invalid(format!("letter {letter} listed twice")));
            }
            seen[k] = true;
            freq[k] = v;
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::invalid(format!("reference lacks letter {}", (b'A' + k as u8) as char)));
        }
        let total: f64 = freq.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("reference frequencies sum to zero"));
        }
        Ok(LetterHistogram { freq: freq.map(|f| f / total) })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&s)
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (k, f) in self.freq.iter().enumerate() {
            writeln!(w, "{},{}", (b'A' + k as u8) as char, f)?;
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.freq.iter().all(|&f| f == 0.0)
    }

    /// Histogram of the text decrypted with shift `s`, i.e. letter `k` takes
    /// the frequency of letter `k - s`.
    fn unshifted(&self, s: usize) -> [f64; 26] {
        std::array::from_fn(|k| self.freq[(k + 26 - s) % 26])
    }
}

fn rotate(b: u8, base: u8, by: u8) -> u8 {
    base + (b - base + by) % 26
}

/// Replaces each letter by the one `shift` places earlier, preserving case.
pub fn shift_encrypt(text: &str, shift: u8) -> Result<String> {
    if shift > 25 {
        return Err(Error::invalid(format!("shift {shift} is outside 0..=25")));
    }
    let back = 26 - shift;
    Ok(text
        .chars()
        .map(|c| match c {
            'A'..='Z' => rotate(c as u8, b'A', back) as char,
            'a'..='z' => rotate(c as u8, b'a', back) as char,
            _ => c,
        })
        .collect())
}

/// Inverse of [`shift_encrypt`].
pub fn shift_decrypt(text: &str, shift: u8) -> Result<String> {
    if shift > 25 {
        return Err(Error::invalid(format!("shift {shift} is outside 0..=25")));
    }
    shift_encrypt(text, (26 - shift) % 26)
}

pub fn letter_histogram(text: &str) -> LetterHistogram {
    let mut counts = [0usize; 26];
    for b in text.bytes().filter(u8::is_ascii_alphabetic) {
        counts[(b.to_ascii_uppercase() - b'A') as usize] += 1;
    }
    let total: usize = counts.iter().sum();
    let freq = if total == 0 {
        [0.0; 26]
    } else {
        counts.map(|c| c as f64 / total as f64)
    };
    LetterHistogram { freq }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Criterion {
    /// `sum (h - r)^2 / r`
    #[default]
    ChiSquared,
    /// `sum h ln(h / r)`
    Kl,
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chi2" | "chi-squared" => Ok(Criterion::ChiSquared),
            "kl" => Ok(Criterion::Kl),
            _ => Err(Error::invalid(format!("unknown criterion {s:?} (chi2 or kl)"))),
        }
    }
}

fn score(h: &[f64; 26], r: &[f64; 26], criterion: Criterion) -> f64 {
    h.iter()
        .zip(r)
        .map(|(&h, &r)| match (criterion, h, r) {
            (_, 0.0, 0.0) => 0.0,
            (_, _, 0.0) => f64::INFINITY,
            (Criterion::ChiSquared, h, r) => (h - r) * (h - r) / r,
            (Criterion::Kl, 0.0, _) => 0.0,
            (Criterion::Kl, h, r) => h * (h / r).ln(),
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crack {
    pub shift: u8,
    /// `scores[s]` compares the text decrypted with shift `s` to the reference.
    pub scores: [f64; 26],
}

/// Tries all 26 shifts and returns the one whose decryption best matches
/// `reference` under the chi-squared distance.
pub fn crack_shift(ciphertext: &str, reference: &LetterHistogram) -> Result<Crack> {
    crack_shift_with(ciphertext, reference, Criterion::ChiSquared)
}

pub fn crack_shift_with(ciphertext: &str, reference: &LetterHistogram, criterion: Criterion) -> Result<Crack> {
    let hist = letter_histogram(ciphertext);
    if hist.is_empty() {
        return Err(Error::invalid("ciphertext contains no letters"));
    }
    let total: f64 = reference.freq.iter().sum();
    if (total - 1.0).abs() > 1e-9 || reference.freq.iter().any(|f| !(*f >= 0.0)) {
        return Err(Error::invalid("reference histogram must be a distribution"));
    }
    let scores: [f64; 26] = std::array::from_fn(|s| score(&hist.unshifted(s), &reference.freq, criterion));
    let mut shift = 0;
    for s in 1..26 {
        if scores[s] < scores[shift] {
            shift = s;
        }
    }
    Ok(Crack {
        shift: shift as u8,
        scores,
    })
}
