//! Builds a random family of k-subsets of an n-element ground set and
//! measures how evenly the family covers element pairs. In the regime
//! M ≫ (n ln n / k)² every pair is covered close to the mean M(k/n)²,
//! which is what makes such families usable as concentration gadgets.
//!
//! ```text
//! cargo run --release --example cover_family
//! ```

use latinlab::bounds::build_cover;

fn main() {
    let (n, k, m) = (100, 20, 10_000);
    let family = build_cover(n, k, m, 42);

    let expected = m as f64 * (k as f64 / n as f64).powi(2);
    let (lo, hi) = family.coverage_band();
    println!("{m} random {k}-subsets of {{1..{n}}}");
    println!("pair coverage: expected {expected:.1}, band [{lo:.1}, {hi:.1}]");
    println!(
        "observed min/max over all {} pairs: {}/{}",
        n * (n - 1) / 2,
        family.min_coverage(),
        family.max_coverage()
    );
    println!(
        "regime ratio M / (n ln n / k)² = {:.2} (≫ 1 is the concentration regime)",
        family.regime_ratio()
    );
    assert!(family.all_within_band(), "a pair escaped the coverage band");
    println!("every pair is inside the band");

    // the total is a hard identity, not a concentration statement: each
    // subset covers exactly C(k,2) pairs
    let per_set = (k * (k - 1) / 2) as u64;
    assert_eq!(family.total_coverage(), m as u64 * per_set);
    println!("total coverage = M·C(k,2) = {}", family.total_coverage());
}
