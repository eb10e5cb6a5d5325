//! Searches for intercalate-free squares by biased descent: propose chain
//! moves, always accept when the intercalate count does not grow, and
//! accept uphill moves with probability e^(−ΔN). Order 4 has no such
//! square (the minimum is 4 intercalates); orders 5 upward do.
//!
//! ```text
//! cargo run --release --example intercalate_free_search
//! ```

use latinlab::intercalates;
use latinlab::sampler::find_intercalate_free;

fn main() {
    // order 4 is a guaranteed failure: report the floor instead
    let report = find_intercalate_free(4, 3, 20_000);
    println!(
        "order 4: best N = {} after {} proposals (no intercalate-free square exists)",
        report.best, report.proposals
    );
    assert!(report.square.is_none());

    // the descent is stochastic: a minority of seeds stall in a local
    // basin (N = 4 is sticky at order 6), so pick seeds known to land
    for (n, seed) in [(5, 3), (6, 2), (7, 3)] {
        let report = find_intercalate_free(n, seed, 10_000_000);
        match &report.square {
            Some(l) => {
                assert_eq!(intercalates::census(l).total, 0);
                println!(
                    "order {n}: intercalate-free square after {} proposals ({} accepted):",
                    report.proposals, report.moves
                );
                print!("{}", latinlab::model::to_text(l));
            }
            None => println!(
                "order {n}: none found within the proposal budget (best N = {})",
                report.best
            ),
        }
        println!();
    }
}
