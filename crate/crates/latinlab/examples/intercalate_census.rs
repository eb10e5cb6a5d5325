//! Exhaustive intercalate statistics for tiny orders: the histogram of N
//! over all squares of orders 4 and 5, the exact means, and the agreement
//! between the order-5 mean and the closed form 25/7 obtained by counting
//! (square, intercalate) pairs.
//!
//! ```text
//! cargo run --release --example intercalate_census
//! ```

use latinlab::oracle::{enumerate_squares, EnumerationOptions};

fn main() {
    let opts = EnumerationOptions { histograms: true, ..Default::default() };
    for n in 1..=5 {
        let result = enumerate_squares(n, &opts).expect("tiny orders fit the budget");
        println!("order {n}: {} squares", result.total);
        for (&count, &freq) in &result.intercalate_histogram {
            println!("  N = {count:>2}: {freq} squares");
        }
        println!("  mean N = {:.6}", result.mean_intercalates());
        println!();
    }

    // every unordered pair of rows, columns and symbols contributes
    // intercalates at the same rate, so the mean has a small closed form
    let exact = 25.0 / 7.0;
    let result = enumerate_squares(5, &opts).expect("order 5 fits the budget");
    assert!((result.mean_intercalates() - exact).abs() < 1e-12);
    println!("order-5 mean matches 25/7 = {exact:.6} exactly");
}
