//! Draws random Latin squares from the ±1-move chain and summarizes their
//! intercalate counts. With a fixed seed the output is identical from run
//! to run; change the seed to get a fresh batch.
//!
//! ```text
//! cargo run --release --example sample_squares
//! ```

use latinlab::intercalates;
use latinlab::sampler::{sample, SampleConfig};

fn main() {
    let n = 20;
    let count = 50;
    let config = SampleConfig::new(n, 7, count);
    println!(
        "sampling {count} squares of order {n} (burn-in {}, thinning {})",
        config.effective_burn_in(),
        config.effective_thinning()
    );

    let squares = sample(&config);
    let counts: Vec<u64> = squares.iter().map(|l| intercalates::census(l).total).collect();
    let mean = counts.iter().sum::<u64>() as f64 / counts.len() as f64;

    println!("first square:");
    print!("{}", latinlab::model::to_text(&squares[0]));
    println!();
    println!("intercalates per square: {counts:?}");
    println!("mean N: {mean:.2} (for uniform squares E[N] → n²/4 = {})", n * n / 4);
    println!(
        "min/max: {}/{}",
        counts.iter().min().unwrap(),
        counts.iter().max().unwrap()
    );
}
