//! Scans random boxes of a sampled square and compares each observed cell
//! count against its expectation vol/n and the deviation envelope
//! √vol·ln n + n·ln²n. For random squares the worst ratio stays well
//! below 1 across all three box-picking strategies.
//!
//! ```text
//! cargo run --release --example discrepancy_scan
//! ```

use latinlab::bounds::{box_scan, max_ratio, ScanStrategy};
use latinlab::sampler::{sample, SampleConfig};

fn main() {
    let n = 30;
    let config = SampleConfig::new(n, 11, 1);
    println!("sampling one square of order {n}…");
    let square = sample(&config).pop().expect("one square");

    for strategy in ScanStrategy::ALL {
        let stats = box_scan(&square, strategy, 2000, 23);
        let worst = max_ratio(&stats);
        let widest = stats
            .iter()
            .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
            .expect("non-empty scan");
        println!(
            "{:>20}: 2000 boxes, max |observed−expected|/envelope = {:.4}",
            strategy.to_string(),
            worst
        );
        println!(
            "{:>20}  worst box {}×{}×{} (vol {}): observed {}, expected {:.2}",
            "", widest.rows, widest.cols, widest.symbols, widest.vol, widest.observed,
            widest.expected
        );
        assert!(worst < 1.0, "a box left the deviation envelope");
    }
    println!("all boxes inside the envelope");
}
