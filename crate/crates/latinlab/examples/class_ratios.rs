//! Splits all squares of one order into classes by the number s of
//! intercalates on the first two rows, then checks the switching bounds on
//! consecutive class sizes: going from s to s+1 costs at least a factor
//! (s+1)(n−2s−2)/(n−2s), and skipping from s to s+2 at least s²/n.
//!
//! ```text
//! cargo run --release --example class_ratios -- 5
//! ```

use latinlab::oracle::{enumerate_squares, EnumerationOptions};

fn main() {
    let n: usize = std::env::args()
        .nth(1)
        .map(|a| a.parse().expect("order must be a small integer"))
        .unwrap_or(5);
    assert!((2..=5).contains(&n), "exhaustive class sizes need 2 ≤ n ≤ 5");

    let opts = EnumerationOptions { histograms: true, ..Default::default() };
    let result = enumerate_squares(n, &opts).expect("tiny orders fit the budget");
    let size = |s: u64| result.class_sizes.get(&s).copied().unwrap_or(0);
    let max_s = result.class_sizes.keys().max().copied().unwrap_or(0);

    println!("order {n}: {} squares, classes by first-row-pair intercalates", result.total);
    println!("{:>3} {:>10} {:>12} {:>12}", "s", "size", "ratio", "bound");
    for s in 0..=max_s {
        let this = size(s);
        let next = size(s + 1);
        let denom = (s + 1) as i64 * (n as i64 - 2 * s as i64 - 2);
        if this == 0 || denom <= 0 {
            println!("{:>3} {:>10} {:>12} {:>12}", s, this, "-", "-");
            continue;
        }
        let ratio = next as f64 / this as f64;
        let bound = (n as f64 - 2.0 * s as f64) / denom as f64;
        println!("{:>3} {:>10} {:>12.6} {:>12.6}", s, this, ratio, bound);
        // the inequality is exact in integers: next·(s+1)(n−2s−2) ≤ this·(n−2s)
        assert!(next as u128 * denom as u128 <= this as u128 * (n as u128 - 2 * s as u128));
    }

    for s in 1..=max_s {
        let this = size(s);
        if this == 0 {
            continue;
        }
        let skip = size(s + 2);
        assert!(skip as u128 * (s * s) as u128 <= this as u128 * n as u128);
        println!(
            "two-step check at s = {s}: {skip}/{this} ≤ n/s² = {:.4}",
            n as f64 / (s * s) as f64
        );
    }
    println!("all ratio bounds hold");
}
