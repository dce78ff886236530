//! Encrypt a text with a shift cipher and recover the shift from letter
//! frequencies alone.
//!
//! cargo run --example cipher -- [shift]

use spdg::cipher::{crack_shift_with, letter_histogram, shift_encrypt, Criterion, LetterHistogram};

const TEXT: &str = include_str!("../data/gettysburg.txt");

fn main() -> spdg::Result<()> {
    let shift: u8 = std::env::args().nth(1).map_or(Ok(7), |s| s.parse()).expect("shift in 0..=25");
    let secret = shift_encrypt(TEXT, shift)?;
    println!("{}...", &secret[..60]);

    let english = LetterHistogram::english();
    for criterion in [Criterion::ChiSquared, Criterion::Kl] {
        let crack = crack_shift_with(&secret, &english, criterion)?;
        let mut ranked: Vec<(usize, f64)> = crack.scores.iter().copied().enumerate().collect();
        ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
        println!(
            "{criterion:?}: shift={} runner-up={} (score {:.4} vs {:.4})",
            crack.shift, ranked[1].0, ranked[0].1, ranked[1].1
        );
    }

    let h = letter_histogram(TEXT);
    let top: Vec<char> = {
        let mut idx: Vec<usize> = (0..26).collect();
        idx.sort_by(|&a, &b| h.freq[b].total_cmp(&h.freq[a]));
        idx[..6].iter().map(|&i| (b'A' + i as u8) as char).collect()
    };
    println!("most common plaintext letters: {}", top.iter().collect::<String>());
    Ok(())
}
