//! Box statistics, regular bipartite projections, covering families, and
//! permanent-derived bound calculators.
//!
//! A box `I × X × Q` of the incidence cube of a square holds `vol/n` ones
//! on average; [`box_scan`] samples boxes under several strategies and
//! reports each deviation against the reference envelope
//! `√vol·ln n + n·ln²n` as a ratio, leaving thresholds to the caller. The
//! symbol-set projection [`q_graph`] turns a square and a symbol set `Q`
//! into a `|Q|`-regular bipartite graph whose edge counts match box counts
//! with full symbol freedom on `Q`.
//!
//! The bound calculators work in natural-log space via the log-gamma
//! function: matching-count bounds per regular graph, their telescoped
//! one-factorization versions, an entropy-style lower bound on the number
//! of d-regular bipartite graphs, and exact cross-checks against the
//! brute-force oracle for tiny orders.

use crate::model::{incidence_count, IncidenceBox, LatinSquare};
use crate::oracle;
use crate::ResourceError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use statrs::function::gamma::ln_gamma;
use std::fmt;

// ---------------------------------------------------------------------------
// box scans
// ---------------------------------------------------------------------------

/// Observed-versus-expected record for one box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxStat {
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    pub symbols: usize,
    pub vol: u64,
    pub observed: u64,
    /// `vol / n`.
    pub expected: f64,
    /// `|observed − expected|`.
    pub deviation: f64,
    /// `√vol·ln n + n·ln²n` (natural log).
    pub bound: f64,
    /// `deviation / bound`; 0 when the bound degenerates to 0.
    pub ratio: f64,
}

/// The deviation envelope `√vol·ln n + n·ln²n` in natural logarithms.
pub fn deviation_envelope(vol: u64, n: usize) -> f64 {
    let ln_n = (n as f64).ln();
    (vol as f64).sqrt() * ln_n + n as f64 * ln_n * ln_n
}

/// Counts the box on the square and fills in the derived columns.
pub fn box_stat(l: &LatinSquare, t: &IncidenceBox) -> BoxStat {
    let n = l.n();
    let vol = t.volume();
    let observed = incidence_count(l, t) as u64;
    let expected = vol as f64 / n as f64;
    let deviation = (observed as f64 - expected).abs();
    let bound = deviation_envelope(vol, n);
    let ratio = if bound > 0.0 { deviation / bound } else { 0.0 };
    BoxStat {
        n,
        rows: t.rows.len(),
        cols: t.cols.len(),
        symbols: t.symbols.len(),
        vol,
        observed,
        expected,
        deviation,
        bound,
        ratio,
    }
}

/// How [`box_scan`] draws its boxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanStrategy {
    /// Every index joins each of I, X, Q independently with probability ½.
    UniformElement,
    /// Set sizes walk a geometric grid; sets are uniform of that size.
    SizeGrid,
    /// Each of I, X, Q is a uniformly random non-empty interval.
    StructuredIntervals,
}

impl ScanStrategy {
    pub const ALL: [ScanStrategy; 3] = [
        ScanStrategy::UniformElement,
        ScanStrategy::SizeGrid,
        ScanStrategy::StructuredIntervals,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScanStrategy::UniformElement => "uniform-element",
            ScanStrategy::SizeGrid => "size-grid",
            ScanStrategy::StructuredIntervals => "structured-intervals",
        }
    }
}

impl fmt::Display for ScanStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ScanStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScanStrategy::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown scan strategy {s:?} (expected uniform-element, size-grid or structured-intervals)"))
    }
}

/// Uniform subset of `0..n` with each element present with probability ½.
fn coin_subset(n: usize, rng: &mut ChaCha12Rng) -> Vec<usize> {
    (0..n).filter(|_| rng.random::<bool>()).collect()
}

/// Uniform `size`-subset of `0..n` by partial shuffle, returned sorted.
fn uniform_subset(n: usize, size: usize, rng: &mut ChaCha12Rng) -> Vec<usize> {
    debug_assert!(size <= n);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..size {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    let mut set: Vec<usize> = pool[..size].to_vec();
    set.sort_unstable();
    set
}

/// Uniformly random non-empty interval of `0..n`.
fn interval_subset(n: usize, rng: &mut ChaCha12Rng) -> Vec<usize> {
    let start = rng.random_range(0..n);
    let len = rng.random_range(1..=n - start);
    (start..start + len).collect()
}

/// Draws `count` boxes under the strategy and reports their statistics,
/// deterministically in `seed`.
pub fn box_scan(
    l: &LatinSquare,
    strategy: ScanStrategy,
    count: usize,
    seed: u64,
) -> Vec<BoxStat> {
    let n = l.n();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    // geometric size grid 1, 2, 4, …, topped with n itself
    let mut grid: Vec<usize> = std::iter::successors(Some(1usize), |s| Some(s * 2))
        .take_while(|&s| s < n)
        .collect();
    grid.push(n);
    let g = grid.len();
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let (rows, cols, symbols) = match strategy {
            ScanStrategy::UniformElement => {
                (coin_subset(n, &mut rng), coin_subset(n, &mut rng), coin_subset(n, &mut rng))
            }
            ScanStrategy::SizeGrid => {
                let si = grid[index % g];
                let sx = grid[(index / g) % g];
                let sq = grid[(index / (g * g)) % g];
                (
                    uniform_subset(n, si, &mut rng),
                    uniform_subset(n, sx, &mut rng),
                    uniform_subset(n, sq, &mut rng),
                )
            }
            ScanStrategy::StructuredIntervals => (
                interval_subset(n, &mut rng),
                interval_subset(n, &mut rng),
                interval_subset(n, &mut rng),
            ),
        };
        let t = IncidenceBox::new(l, rows, cols, symbols).expect("generated sets are in range");
        out.push(box_stat(l, &t));
    }
    out
}

/// Largest deviation/envelope ratio in a scan.
pub fn max_ratio(stats: &[BoxStat]) -> f64 {
    stats.iter().map(|s| s.ratio).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// symbol-set projection
// ---------------------------------------------------------------------------

/// The bipartite graph of a square and a symbol set `Q`: rows on one side,
/// columns on the other, an edge where the cell's symbol lies in `Q`.
/// Always `|Q|`-regular.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QGraph {
    n: usize,
    d: usize,
    adj: Vec<bool>,
}

impl QGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    /// The degree `|Q|`.
    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn has_edge(&self, row: usize, col: usize) -> bool {
        assert!(row < self.n && col < self.n, "edge ({row},{col}) out of range");
        self.adj[row * self.n + col]
    }

    /// Edges between a row set and a column set.
    pub fn edge_count(&self, rows: &[usize], cols: &[usize]) -> u64 {
        let mut count = 0;
        for &r in rows {
            for &c in cols {
                if self.has_edge(r, c) {
                    count += 1;
                }
            }
        }
        count
    }

    /// 0/1 biadjacency table, e.g. for [`oracle::exact_permanent`].
    pub fn to_table(&self) -> Vec<Vec<u64>> {
        (0..self.n)
            .map(|r| (0..self.n).map(|c| u64::from(self.adj[r * self.n + c])).collect())
            .collect()
    }
}

/// Projects a square onto the symbol set `Q` (deduplicated).
///
/// # Panics
/// Panics when a symbol is out of range.
pub fn q_graph(l: &LatinSquare, symbols: &[usize]) -> QGraph {
    let n = l.n();
    let mut in_q = vec![false; n];
    for &q in symbols {
        assert!(q < n, "symbol {q} out of range for order {n}");
        in_q[q] = true;
    }
    let d = in_q.iter().filter(|&&b| b).count();
    let adj = (0..n * n).map(|i| in_q[l.get(i / n, i % n)]).collect();
    QGraph { n, d, adj }
}

// ---------------------------------------------------------------------------
// covering families
// ---------------------------------------------------------------------------

/// `M` random `k`-subsets of `0..n` with their exact pair-coverage counts.
#[derive(Debug, Clone)]
pub struct CoverFamily {
    pub n: usize,
    pub k: usize,
    pub sets: Vec<Vec<usize>>,
    /// `coverage[a][b]` (a < b): number of sets containing both.
    coverage: Vec<u64>,
}

impl CoverFamily {
    pub fn family_size(&self) -> usize {
        self.sets.len()
    }

    /// Number of sets containing both elements.
    pub fn pair_coverage(&self, a: usize, b: usize) -> u64 {
        assert!(a < self.n && b < self.n && a != b, "bad pair ({a},{b})");
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.coverage[a * self.n + b]
    }

    pub fn min_coverage(&self) -> u64 {
        self.pairs().map(|(a, b)| self.pair_coverage(a, b)).min().unwrap_or(0)
    }

    pub fn max_coverage(&self) -> u64 {
        self.pairs().map(|(a, b)| self.pair_coverage(a, b)).max().unwrap_or(0)
    }

    /// Σ over pairs of coverage; always `M·k(k−1)/2`.
    pub fn total_coverage(&self) -> u64 {
        self.pairs().map(|(a, b)| self.pair_coverage(a, b)).sum()
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |a| (a + 1..n).map(move |b| (a, b)))
    }

    /// The reference band `M(k/n)²·(1 ± 5·(ln n/(√M·k/n) + k/n))`, clamped
    /// below at 0.
    pub fn coverage_band(&self) -> (f64, f64) {
        let n = self.n as f64;
        let k = self.k as f64;
        let m = self.family_size() as f64;
        let center = m * (k / n) * (k / n);
        let slack = 5.0 * (n.ln() / (m.sqrt() * k / n) + k / n);
        ((center * (1.0 - slack)).max(0.0), center * (1.0 + slack))
    }

    /// Whether every pair's coverage lies inside [`Self::coverage_band`].
    pub fn all_within_band(&self) -> bool {
        let (lo, hi) = self.coverage_band();
        self.pairs().all(|(a, b)| {
            let c = self.pair_coverage(a, b) as f64;
            lo <= c && c <= hi
        })
    }

    /// `M / (n·ln n/k)²`: how far into the band's intended regime the
    /// family size is (≫ 1 means comfortably inside).
    pub fn regime_ratio(&self) -> f64 {
        let n = self.n as f64;
        let k = self.k as f64;
        let m = self.family_size() as f64;
        let threshold = (n * n.ln() / k).powi(2);
        if threshold > 0.0 {
            m / threshold
        } else {
            f64::INFINITY
        }
    }
}

/// Draws `m` independent uniform `k`-subsets of `0..n` and tallies exact
/// pair coverage.
///
/// # Panics
/// Panics unless `1 ≤ k ≤ n` and `m ≥ 1`.
pub fn build_cover(n: usize, k: usize, m: usize, seed: u64) -> CoverFamily {
    assert!(k >= 1 && k <= n, "need 1 ≤ k ≤ n");
    assert!(m >= 1, "need at least one set");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut coverage = vec![0u64; n * n];
    let mut sets = Vec::with_capacity(m);
    for _ in 0..m {
        let set = uniform_subset(n, k, &mut rng);
        for i in 0..set.len() {
            for j in i + 1..set.len() {
                coverage[set[i] * n + set[j]] += 1;
            }
        }
        sets.push(set);
    }
    CoverFamily { n, k, sets, coverage }
}

// ---------------------------------------------------------------------------
// permanent-derived bounds (natural-log space)
// ---------------------------------------------------------------------------

/// Upper bound `(d!)^{n/d}` on the matchings of a d-regular bipartite
/// graph, as a natural log; 0 for `d = 0` (empty-product convention).
pub fn bregman_upper(d: usize, n: usize) -> f64 {
    assert!(d <= n, "degree above order");
    if d == 0 {
        return 0.0;
    }
    (n as f64 / d as f64) * ln_gamma(d as f64 + 1.0)
}

/// Lower bound `n!·(d/n)ⁿ` on the matchings of a d-regular bipartite
/// graph, as a natural log; 0 for `d = 0` by the same convention (the
/// true bound degenerates — see the sandwich helpers for the exact d = 0
/// treatment).
pub fn vdw_lower(d: usize, n: usize) -> f64 {
    assert!(d <= n, "degree above order");
    if d == 0 {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) + n as f64 * (d as f64 / n as f64).ln()
}

/// Telescoped one-factorization bounds
/// `Π_{j=1}^{d} n!(j/n)ⁿ ≤ Φ ≤ Π_{j=1}^{d} (j!)^{n/j}` as natural logs.
pub fn factorization_bounds(d: usize, n: usize) -> (f64, f64) {
    assert!(d <= n, "degree above order");
    let mut lower = 0.0;
    let mut upper = 0.0;
    for j in 1..=d {
        lower += vdw_lower(j, n);
        upper += bregman_upper(j, n);
    }
    (lower, upper)
}

/// Entropy-style lower bound `C(n,d)^{2n}·(p^p(1−p)^{1−p})^{n²}` with
/// `p = d/n` on the number of d-regular bipartite graphs, as a natural
/// log.
pub fn or_lower_bound(d: usize, n: usize) -> f64 {
    assert!(d <= n && n >= 1, "need 0 ≤ d ≤ n, n ≥ 1");
    let nf = n as f64;
    let p = d as f64 / nf;
    let ln_binom =
        ln_gamma(nf + 1.0) - ln_gamma(d as f64 + 1.0) - ln_gamma((n - d) as f64 + 1.0);
    let entropy = if d == 0 || d == n {
        0.0
    } else {
        p * p.ln() + (1.0 - p) * (1.0 - p).ln()
    };
    2.0 * nf * ln_binom + nf * nf * entropy
}

/// Exact regular-graph census against the entropy bound, with the exact
/// probability that the independent-edge model of density `d/n` comes out
/// d-regular.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularCountReport {
    pub n: usize,
    pub d: usize,
    pub count: u64,
    pub log_count: f64,
    pub log_bound: f64,
    pub bound_satisfied: bool,
    pub regular_probability: f64,
}

/// Builds the report by exhaustive enumeration (supported for n ≤ 4).
pub fn regular_probability_report(n: usize, d: usize) -> Result<RegularCountReport, ResourceError> {
    let graphs = oracle::regular_bipartite_graphs(n, d)?;
    let count = graphs.len() as u64;
    let log_count = (count as f64).ln();
    let log_bound = or_lower_bound(d, n);
    let p = d as f64 / n as f64;
    let edges = (d * n) as f64;
    let non_edges = ((n - d) * n) as f64;
    // p^edges·(1−p)^non_edges per graph, with 0⁰ = 1 at the extremes
    let ln_graph_prob = |prob: f64, count: f64| if count == 0.0 { 0.0 } else { count * prob.ln() };
    let regular_probability =
        count as f64 * (ln_graph_prob(p, edges) + ln_graph_prob(1.0 - p, non_edges)).exp();
    Ok(RegularCountReport {
        n,
        d,
        count,
        log_count,
        log_bound,
        bound_satisfied: log_count >= log_bound - 1e-9,
        regular_probability,
    })
}

/// Matching-count sandwich over a family of d-regular graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub n: usize,
    pub d: usize,
    /// Graphs checked (whole census, or sample size).
    pub graphs: usize,
    pub min_log_phi: f64,
    pub max_log_phi: f64,
    pub vdw_lower: f64,
    pub bregman_upper: f64,
    /// Lower ≤ every log φ ≤ upper, within 1e-9. For `d = 0` the matching
    /// count is exactly 0 and the check degenerates to that identity.
    pub ok: bool,
}

const LOG_TOLERANCE: f64 = 1e-9;

/// Checks `vdw ≤ ln φ ≤ bregman` for every d-regular graph on `n + n`
/// vertices: exhaustively via the oracle census for `n ≤ 4` (pass
/// `sample = None`), or on `count` sampled graphs for larger `n`.
pub fn permanent_sandwich(
    n: usize,
    d: usize,
    sample: Option<(usize, u64)>,
) -> Result<SandwichReport, ResourceError> {
    let graphs: Vec<oracle::BitMatrix> = match sample {
        None => oracle::regular_bipartite_graphs(n, d)?,
        Some((count, seed)) => {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            (0..count).map(|_| oracle::random_regular_bipartite(n, d, &mut rng)).collect()
        }
    };
    let lower = vdw_lower(d, n);
    let upper = bregman_upper(d, n);
    let mut min_log = f64::INFINITY;
    let mut max_log = f64::NEG_INFINITY;
    let mut ok = true;
    for g in &graphs {
        let phi = oracle::exact_permanent(&g.to_table())?;
        let phi: u64 = u64::try_from(phi).expect("matching counts at tiny orders fit u64");
        if d == 0 {
            ok &= phi == 0;
            min_log = f64::NEG_INFINITY;
            max_log = f64::NEG_INFINITY;
            continue;
        }
        let log_phi = (phi as f64).ln();
        min_log = min_log.min(log_phi);
        max_log = max_log.max(log_phi);
        ok &= lower - LOG_TOLERANCE <= log_phi && log_phi <= upper + LOG_TOLERANCE;
    }
    Ok(SandwichReport {
        n,
        d,
        graphs: graphs.len(),
        min_log_phi: min_log,
        max_log_phi: max_log,
        vdw_lower: lower,
        bregman_upper: upper,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LatinSquare;

    #[test]
    fn full_cube_has_zero_deviation() {
        let l = LatinSquare::cyclic(6);
        let all: Vec<usize> = (0..6).collect();
        let t = IncidenceBox::new(&l, all.clone(), all.clone(), all).unwrap();
        let stat = box_stat(&l, &t);
        assert_eq!(stat.observed, 36);
        assert_eq!(stat.deviation, 0.0);
        assert_eq!(stat.ratio, 0.0);
    }

    #[test]
    fn full_symbol_set_means_exact_expectation() {
        // with Q = all symbols every (r, c) in I×X counts exactly once
        let l = LatinSquare::cyclic(7);
        let t = IncidenceBox::new(&l, vec![0, 2, 4], vec![1, 2, 3, 5], (0..7).collect()).unwrap();
        let stat = box_stat(&l, &t);
        assert_eq!(stat.observed, 12);
        assert_eq!(stat.expected, 12.0);
        assert_eq!(stat.deviation, 0.0);
    }

    #[test]
    fn single_cell_box() {
        let l = LatinSquare::cyclic(5);
        let hit = IncidenceBox::new(&l, vec![1], vec![2], vec![l.get(1, 2)]).unwrap();
        assert_eq!(box_stat(&l, &hit).observed, 1);
        let miss =
            IncidenceBox::new(&l, vec![1], vec![2], vec![(l.get(1, 2) + 1) % 5]).unwrap();
        let stat = box_stat(&l, &miss);
        assert_eq!(stat.observed, 0);
        assert!((stat.expected - 0.2).abs() < 1e-12);
    }

    #[test]
    fn scans_are_deterministic_and_sized() {
        let l = LatinSquare::cyclic(9);
        for strategy in ScanStrategy::ALL {
            let a = box_scan(&l, strategy, 40, 7);
            let b = box_scan(&l, strategy, 40, 7);
            assert_eq!(a, b, "{strategy}");
            assert_eq!(a.len(), 40);
            let c = box_scan(&l, strategy, 40, 8);
            assert_ne!(a, c, "{strategy} ignored the seed");
        }
    }

    #[test]
    fn strategy_names_round_trip() {
        for strategy in ScanStrategy::ALL {
            let parsed: ScanStrategy = strategy.name().parse().unwrap();
            assert_eq!(parsed, strategy);
        }
        assert!("boxes".parse::<ScanStrategy>().is_err());
    }

    #[test]
    fn q_graph_extremes() {
        let l = LatinSquare::cyclic(4);
        let full = q_graph(&l, &(0..4).collect::<Vec<_>>());
        assert_eq!(full.degree(), 4);
        assert_eq!(full.edge_count(&[0, 1, 2, 3], &[0, 1, 2, 3]), 16);
        let empty = q_graph(&l, &[]);
        assert_eq!(empty.degree(), 0);
        assert_eq!(empty.edge_count(&[0, 1, 2, 3], &[0, 1, 2, 3]), 0);
        // one symbol: the permutation matrix of that symbol's cells
        let single = q_graph(&l, &[2]);
        assert_eq!(single.degree(), 1);
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(single.has_edge(r, c), l.get(r, c) == 2);
            }
        }
    }

    #[test]
    fn q_graph_edges_match_box_counts() {
        let l = LatinSquare::cyclic(5);
        let q = vec![0, 3];
        let g = q_graph(&l, &q);
        for rows in [vec![0u8], vec![1, 2], vec![0, 2, 4]] {
            let rows: Vec<usize> = rows.iter().map(|&r| r as usize).collect();
            for cols in [vec![1usize], vec![0, 3], vec![0, 1, 2, 3, 4]] {
                let t = IncidenceBox::new(&l, rows.clone(), cols.clone(), q.clone()).unwrap();
                assert_eq!(
                    g.edge_count(&rows, &cols),
                    incidence_count(&l, &t) as u64
                );
            }
        }
    }

    #[test]
    fn cover_identities() {
        let family = build_cover(10, 4, 50, 3);
        assert_eq!(family.family_size(), 50);
        for set in &family.sets {
            assert_eq!(set.len(), 4);
            assert!(set.windows(2).all(|w| w[0] < w[1]));
        }
        // Σ coverage = M·C(k,2)
        assert_eq!(family.total_coverage(), 50 * 6);
    }

    #[test]
    fn cover_with_full_sets_is_constant() {
        let family = build_cover(5, 5, 7, 1);
        for a in 0..5 {
            for b in a + 1..5 {
                assert_eq!(family.pair_coverage(a, b), 7);
            }
        }
        assert!(family.all_within_band());
    }

    #[test]
    fn cover_single_pair() {
        let family = build_cover(2, 2, 9, 0);
        assert_eq!(family.pair_coverage(0, 1), 9);
        assert_eq!(family.min_coverage(), 9);
        assert_eq!(family.max_coverage(), 9);
    }

    #[test]
    fn bound_values_at_the_extremes() {
        // d = n: both matching bounds collapse to ln n!
        for n in [2usize, 5, 9] {
            let ln_fact = ln_gamma(n as f64 + 1.0);
            assert!((bregman_upper(n, n) - ln_fact).abs() < 1e-9);
            assert!((vdw_lower(n, n) - ln_fact).abs() < 1e-9);
        }
        // d = 1: upper is 0 = ln 1, lower is ln(n!/nⁿ) ≤ 0
        assert_eq!(bregman_upper(1, 6), 0.0);
        let vdw = vdw_lower(1, 6);
        let expect = ln_gamma(7.0) - 6.0 * 6f64.ln();
        assert!((vdw - expect).abs() < 1e-9 && vdw < 0.0);
        // d = 0 conventions
        assert_eq!(bregman_upper(0, 4), 0.0);
        assert_eq!(vdw_lower(0, 4), 0.0);
        assert_eq!(factorization_bounds(0, 4), (0.0, 0.0));
    }

    #[test]
    fn known_bound_instance() {
        // d=2, n=4: lower = ln(4!/2⁴) = ln 1.5, upper = ln 4
        assert!((vdw_lower(2, 4) - 1.5f64.ln()).abs() < 1e-9);
        assert!((bregman_upper(2, 4) - 4f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn factorization_bounds_telescope() {
        let (lo, hi) = factorization_bounds(3, 5);
        let manual_lo = vdw_lower(1, 5) + vdw_lower(2, 5) + vdw_lower(3, 5);
        let manual_hi = bregman_upper(1, 5) + bregman_upper(2, 5) + bregman_upper(3, 5);
        assert!((lo - manual_lo).abs() < 1e-12);
        assert!((hi - manual_hi).abs() < 1e-12);
        assert!(lo <= hi);
    }

    #[test]
    fn factorization_bounds_hold_for_tiny_censuses() {
        // exact ordered one-factorization counts against the telescoped
        // bounds, over every graph in the census
        for (n, d) in [(3usize, 2usize), (4, 2), (3, 3)] {
            let (lo, hi) = factorization_bounds(d, n);
            for g in oracle::regular_bipartite_graphs(n, d).unwrap() {
                let phi = oracle::count_one_factorizations(&g);
                assert!(phi > 0, "regular graphs factorize");
                let log_phi = (phi as f64).ln();
                assert!(
                    lo - 1e-9 <= log_phi && log_phi <= hi + 1e-9,
                    "n={n} d={d} phi={phi} outside [{lo}, {hi}]"
                );
            }
        }
    }

    #[test]
    fn entropy_bound_against_exact_counts() {
        for n in 1..=4usize {
            for d in 0..=n {
                let report = regular_probability_report(n, d).unwrap();
                assert!(report.bound_satisfied, "n={n} d={d}: {report:?}");
                assert!(report.regular_probability > 0.0);
                assert!(report.regular_probability <= 1.0 + 1e-12);
            }
        }
        // degenerate degrees: the model is deterministic
        let empty = regular_probability_report(3, 0).unwrap();
        assert!((empty.regular_probability - 1.0).abs() < 1e-12);
        let complete = regular_probability_report(3, 3).unwrap();
        assert!((complete.regular_probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sandwich_holds_exhaustively_for_tiny_orders() {
        for n in 1..=4usize {
            for d in 0..=n {
                let report = permanent_sandwich(n, d, None).unwrap();
                assert!(report.ok, "n={n} d={d}: {report:?}");
                assert!(report.graphs > 0);
            }
        }
    }

    #[test]
    fn sandwich_holds_on_sampled_graphs() {
        for n in [5usize, 6] {
            for d in 1..=n {
                let report = permanent_sandwich(n, d, Some((25, 9))).unwrap();
                assert!(report.ok, "n={n} d={d}: {report:?}");
                assert_eq!(report.graphs, 25);
            }
        }
    }

    #[test]
    fn envelope_formula() {
        let n = 30usize;
        let vol = 1000u64;
        let ln30 = 30f64.ln();
        let expect = 1000f64.sqrt() * ln30 + 30.0 * ln30 * ln30;
        assert!((deviation_envelope(vol, n) - expect).abs() < 1e-9);
    }
}
