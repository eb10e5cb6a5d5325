//! Brute-force ground truth for small orders.
//!
//! Everything here trades speed for trustworthiness: exhaustive enumeration
//! of Latin squares and rectangles in deterministic lexicographic order,
//! exact permanents by two independent algorithms, exhaustive scans of
//! regular bipartite graphs, and one-factorization counts by recursive
//! matching removal. These routines anchor the statistical and structural
//! claims tested elsewhere in the crate; they are deliberately simple and
//! bounded by explicit node budgets.

use crate::intercalates;
use crate::model::{LatinRectangle, LatinSquare};
use crate::ResourceError;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

// ---------------------------------------------------------------------------
// exhaustive enumeration
// ---------------------------------------------------------------------------

/// Options for [`enumerate_squares`] / [`enumerate_rectangles`].
#[derive(Debug, Clone, Default)]
pub struct EnumerationOptions {
    /// Node budget override; `None` resolves via [`crate::resolve_budget`].
    pub budget: Option<u64>,
    /// Keep every enumerated item (memory: count × k × n cells).
    pub collect: bool,
    /// Build the intercalate histogram and first-two-rows class sizes.
    pub histograms: bool,
}

/// Outcome of an exhaustive enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationResult {
    pub k: usize,
    pub n: usize,
    /// Number of Latin rectangles of this shape.
    pub total: u64,
    /// intercalate count `N` → number of rectangles with that count.
    pub intercalate_histogram: BTreeMap<u64, u64>,
    /// first-two-rows intercalate count `s` → number of rectangles
    /// (empty for `k < 2` or when histograms were not requested).
    pub class_sizes: BTreeMap<u64, u64>,
    /// The rectangles themselves when collection was requested.
    pub collected: Vec<LatinRectangle>,
}

impl EnumerationResult {
    /// Mean of the intercalate histogram.
    pub fn mean_intercalates(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let sum: f64 = self
            .intercalate_histogram
            .iter()
            .map(|(&count, &freq)| count as f64 * freq as f64)
            .sum();
        sum / self.total as f64
    }
}

/// Visits every `k × n` Latin rectangle extending `prefix` (which supplies
/// the first rows), in lexicographic cell order. The visitor returns `false`
/// to stop early; the return value is the number of rectangles visited.
///
/// Each attempted symbol placement costs one node against the budget.
pub fn for_each_extension(
    prefix: &LatinRectangle,
    k: usize,
    budget: Option<u64>,
    f: impl FnMut(&LatinRectangle) -> bool,
) -> Result<u64, ResourceError> {
    extension_with_nodes(prefix, k, crate::resolve_budget(budget), f).map(|(v, _)| v)
}

/// As [`for_each_extension`], additionally reporting nodes spent.
fn extension_with_nodes(
    prefix: &LatinRectangle,
    k: usize,
    budget: u64,
    mut f: impl FnMut(&LatinRectangle) -> bool,
) -> Result<(u64, u64), ResourceError> {
    let n = prefix.n();
    assert!(
        prefix.row_count() <= k && k <= n,
        "extension target {k} outside {}..={n}",
        prefix.row_count()
    );
    assert!(n <= 64, "enumeration is limited to n ≤ 64");
    let mut cells: Vec<u32> = prefix.flat_cells().to_vec();
    cells.resize(k * n, 0);
    let mut col_used: Vec<u64> = vec![0; n];
    for r in 0..prefix.row_count() {
        for c in 0..n {
            col_used[c] |= 1 << cells[r * n + c];
        }
    }
    let mut search = Search {
        k,
        n,
        cells,
        col_used,
        full: if n == 64 { u64::MAX } else { (1u64 << n) - 1 },
        nodes: 0,
        budget,
        visited: 0,
        stopped: false,
    };
    search.fill(prefix.row_count(), 0, 0, &mut f)?;
    Ok((search.visited, search.nodes))
}

struct Search {
    k: usize,
    n: usize,
    cells: Vec<u32>,
    col_used: Vec<u64>,
    full: u64,
    nodes: u64,
    budget: u64,
    visited: u64,
    stopped: bool,
}

impl Search {
    fn fill(
        &mut self,
        r: usize,
        c: usize,
        row_used: u64,
        f: &mut impl FnMut(&LatinRectangle) -> bool,
    ) -> Result<(), ResourceError> {
        if r == self.k {
            self.visited += 1;
            let rect =
                LatinRectangle::from_flat_unchecked(self.k, self.n, self.cells.clone());
            if !f(&rect) {
                self.stopped = true;
            }
            return Ok(());
        }
        if c == self.n {
            return self.fill(r + 1, 0, 0, f);
        }
        let mut free = self.full & !row_used & !self.col_used[c];
        while free != 0 {
            let s = free.trailing_zeros();
            let bit = 1u64 << s;
            free &= !bit;
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(ResourceError { task: "enumeration nodes", budget: self.budget });
            }
            self.cells[r * self.n + c] = s;
            self.col_used[c] |= bit;
            self.fill(r, c + 1, row_used | bit, f)?;
            self.col_used[c] &= !bit;
            if self.stopped {
                return Ok(());
            }
        }
        Ok(())
    }
}

/// Visits every `k × n` Latin rectangle in lexicographic order.
pub fn for_each_rectangle(
    k: usize,
    n: usize,
    budget: Option<u64>,
    mut f: impl FnMut(&LatinRectangle) -> bool,
) -> Result<u64, ResourceError> {
    assert!(k >= 1 && k <= n, "shape {k}×{n} is not a Latin rectangle shape");
    assert!(n <= 64, "enumeration is limited to n ≤ 64");
    let mut search = Search {
        k,
        n,
        cells: vec![0; k * n],
        col_used: vec![0; n],
        full: if n == 64 { u64::MAX } else { (1u64 << n) - 1 },
        nodes: 0,
        budget: crate::resolve_budget(budget),
        visited: 0,
        stopped: false,
    };
    search.fill(0, 0, 0, &mut f)?;
    Ok(search.visited)
}

/// Visits every Latin square of order `n` in lexicographic order.
pub fn for_each_square(
    n: usize,
    budget: Option<u64>,
    mut f: impl FnMut(&LatinSquare) -> bool,
) -> Result<u64, ResourceError> {
    for_each_rectangle(n, n, budget, |rect| {
        let sq = LatinSquare::from_rectangle(rect.clone()).expect("k = n");
        f(&sq)
    })
}

/// Exhaustively enumerates all `k × n` Latin rectangles.
pub fn enumerate_rectangles(
    k: usize,
    n: usize,
    opts: &EnumerationOptions,
) -> Result<EnumerationResult, ResourceError> {
    let mut result = EnumerationResult {
        k,
        n,
        total: 0,
        intercalate_histogram: BTreeMap::new(),
        class_sizes: BTreeMap::new(),
        collected: Vec::new(),
    };
    for_each_rectangle(k, n, opts.budget, |rect| {
        result.total += 1;
        if opts.histograms {
            let census = intercalates::census(rect);
            *result.intercalate_histogram.entry(census.total).or_insert(0) += 1;
            if k >= 2 {
                let s = census.per_pair.get(&(0, 1)).copied().unwrap_or(0);
                *result.class_sizes.entry(s).or_insert(0) += 1;
            }
        }
        if opts.collect {
            result.collected.push(rect.clone());
        }
        true
    })?;
    Ok(result)
}

/// Exhaustively enumerates all Latin squares of order `n`.
pub fn enumerate_squares(
    n: usize,
    opts: &EnumerationOptions,
) -> Result<EnumerationResult, ResourceError> {
    enumerate_rectangles(n, n, opts)
}

/// Counts squares whose first row is the identity permutation. The full
/// count is exactly `n!` times this (symbol relabeling is a bijection that
/// moves any first row to the identity).
pub fn count_reduced_squares(n: usize, budget: Option<u64>) -> Result<u64, ResourceError> {
    let identity: Vec<u32> = (0..n as u32).collect();
    let prefix = LatinRectangle::from_flat_unchecked(1, n, identity);
    for_each_extension(&prefix, n, budget, |_| true)
}

// ---------------------------------------------------------------------------
// checkpointed full-space enumeration
// ---------------------------------------------------------------------------

/// A checkpointed enumeration failed.
#[derive(Debug)]
pub enum CheckpointError {
    Io(std::io::Error),
    /// The checkpoint file exists but cannot be interpreted.
    Corrupt { reason: String },
    /// The checkpoint describes a different enumeration.
    Mismatch { expected: (usize, usize), found: (usize, usize) },
    /// The per-call budget ran out; progress up to the last completed
    /// first-row block is saved.
    Budget(ResourceError),
}

impl fmt::Display for CheckpointError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckpointError::Io(e) => write!(f, "checkpoint I/O: {e}"),
            CheckpointError::Corrupt { reason } => write!(f, "corrupt checkpoint: {reason}"),
            CheckpointError::Mismatch { expected, found } => write!(
                f,
                "checkpoint is for a {}×{} enumeration, expected {}×{}",
                found.0, found.1, expected.0, expected.1
            ),
            CheckpointError::Budget(e) => write!(f, "{e} (progress saved)"),
        }
    }
}

impl std::error::Error for CheckpointError {}

impl From<std::io::Error> for CheckpointError {
    fn from(e: std::io::Error) -> Self {
        CheckpointError::Io(e)
    }
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format_version: u32,
    k: usize,
    n: usize,
    /// Lexicographic rank of the next first row to process.
    next_first_row: u64,
    total: u64,
    intercalate_histogram: BTreeMap<u64, u64>,
    class_sizes: BTreeMap<u64, u64>,
}

const CHECKPOINT_VERSION: u32 = 1;

/// Factorials up to 20!; enough for any feasible first-row count.
fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// The permutation of `0..n` with the given lexicographic rank.
fn unrank_permutation(n: usize, mut rank: u64) -> Vec<u32> {
    let mut pool: Vec<u32> = (0..n as u32).collect();
    let mut out = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let f = factorial(i);
        let idx = (rank / f) as usize;
        rank %= f;
        out.push(pool.remove(idx));
    }
    out
}

/// Exhaustive histogram enumeration with resumable progress.
///
/// Work is split into `n!` blocks, one per first row. After each completed
/// block the checkpoint file is atomically rewritten, so an interrupted or
/// budget-limited call can resume where it stopped. When the per-call
/// `budget` runs out mid-block, the call returns
/// [`CheckpointError::Budget`] and the last completed block remains saved.
pub fn enumerate_squares_checkpointed(
    n: usize,
    path: &Path,
    budget: Option<u64>,
) -> Result<EnumerationResult, CheckpointError> {
    let blocks = factorial(n);
    let mut ckpt = if path.exists() {
        let text = std::fs::read_to_string(path)?;
        let ckpt: Checkpoint = serde_json::from_str(&text)
            .map_err(|e| CheckpointError::Corrupt { reason: e.to_string() })?;
        if ckpt.format_version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Corrupt {
                reason: format!("unknown format version {}", ckpt.format_version),
            });
        }
        if (ckpt.k, ckpt.n) != (n, n) {
            return Err(CheckpointError::Mismatch {
                expected: (n, n),
                found: (ckpt.k, ckpt.n),
            });
        }
        ckpt
    } else {
        Checkpoint {
            format_version: CHECKPOINT_VERSION,
            k: n,
            n,
            next_first_row: 0,
            total: 0,
            intercalate_histogram: BTreeMap::new(),
            class_sizes: BTreeMap::new(),
        }
    };
    let call_budget = crate::resolve_budget(budget);
    let mut remaining = call_budget;
    while ckpt.next_first_row < blocks {
        let row = unrank_permutation(n, ckpt.next_first_row);
        let prefix = LatinRectangle::from_flat_unchecked(1, n, row);
        let mut histogram = BTreeMap::new();
        let mut classes = BTreeMap::new();
        let mut block_total = 0u64;
        let outcome = extension_with_nodes(&prefix, n, remaining, |rect| {
            block_total += 1;
            let census = intercalates::census(rect);
            *histogram.entry(census.total).or_insert(0u64) += 1;
            let s = census.per_pair.get(&(0, 1)).copied().unwrap_or(0);
            *classes.entry(s).or_insert(0u64) += 1;
            true
        });
        let nodes_spent = match outcome {
            Ok((_, nodes)) => nodes,
            Err(_) => {
                // the interrupted block is discarded; completed blocks stand
                write_checkpoint(path, &ckpt)?;
                return Err(CheckpointError::Budget(ResourceError {
                    task: "enumeration nodes",
                    budget: call_budget,
                }));
            }
        };
        // merge the completed block and persist
        ckpt.total += block_total;
        for (count, freq) in histogram {
            *ckpt.intercalate_histogram.entry(count).or_insert(0) += freq;
        }
        for (s, freq) in classes {
            *ckpt.class_sizes.entry(s).or_insert(0) += freq;
        }
        ckpt.next_first_row += 1;
        write_checkpoint(path, &ckpt)?;
        remaining = remaining.saturating_sub(nodes_spent.max(1));
        if remaining == 0 && ckpt.next_first_row < blocks {
            return Err(CheckpointError::Budget(ResourceError {
                task: "enumeration nodes",
                budget: call_budget,
            }));
        }
    }
    Ok(EnumerationResult {
        k: n,
        n,
        total: ckpt.total,
        intercalate_histogram: ckpt.intercalate_histogram,
        class_sizes: ckpt.class_sizes,
        collected: Vec::new(),
    })
}

fn write_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<(), CheckpointError> {
    let text = serde_json::to_string(ckpt)
        .map_err(|e| CheckpointError::Corrupt { reason: e.to_string() })?;
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// exact permanents
// ---------------------------------------------------------------------------

/// Exact permanent by inclusion–exclusion over column subsets with Gray-code
/// row-sum updates: O(2ⁿ·n) additions. Dimensions up to 24 are accepted.
///
/// Accumulates per-subset products in `i128` chunks when the magnitudes
/// provably fit, flushing into a [`BigInt`] total; otherwise falls back to
/// full big-integer arithmetic.
///
/// # Panics
/// Panics if the matrix is not square.
pub fn exact_permanent(matrix: &[Vec<u64>]) -> Result<BigInt, ResourceError> {
    let n = matrix.len();
    for row in matrix {
        assert_eq!(row.len(), n, "permanent requires a square matrix");
    }
    if n > 24 {
        return Err(ResourceError { task: "permanent dimension (≤ 24)", budget: 24 });
    }
    if n == 0 {
        return Ok(BigInt::from(1));
    }
    // bound the largest possible subset product to pick the accumulator
    let mut log2_product = 0.0f64;
    for row in matrix {
        let sum = row.iter().map(|&v| v as u128).sum::<u128>();
        log2_product += ((sum.max(1)) as f64).log2();
    }
    if log2_product <= 113.0 {
        Ok(permanent_gray_i128(matrix))
    } else {
        Ok(permanent_gray_big(matrix))
    }
}

fn permanent_gray_i128(matrix: &[Vec<u64>]) -> BigInt {
    let n = matrix.len();
    let mut row_sums = vec![0i128; n];
    let mut total = BigInt::from(0);
    let mut chunk = 0i128;
    let mut chunk_len = 0u32;
    let mut popcount = 0u32;
    for k in 1u64..1 << n {
        let j = k.trailing_zeros() as usize;
        if (k ^ (k >> 1)) & (1 << j) != 0 {
            popcount += 1;
            for (i, row) in matrix.iter().enumerate() {
                row_sums[i] += row[j] as i128;
            }
        } else {
            popcount -= 1;
            for (i, row) in matrix.iter().enumerate() {
                row_sums[i] -= row[j] as i128;
            }
        }
        let mut product = 1i128;
        for &s in &row_sums {
            if s == 0 {
                product = 0;
                break;
            }
            product *= s;
        }
        // sign (−1)^(n−|S|)
        if (n as u32 - popcount) % 2 == 0 {
            chunk += product;
        } else {
            chunk -= product;
        }
        chunk_len += 1;
        if chunk_len == 4096 {
            total += BigInt::from(chunk);
            chunk = 0;
            chunk_len = 0;
        }
    }
    total += BigInt::from(chunk);
    total
}

fn permanent_gray_big(matrix: &[Vec<u64>]) -> BigInt {
    let n = matrix.len();
    let mut row_sums = vec![BigInt::from(0); n];
    let mut total = BigInt::from(0);
    let mut popcount = 0u32;
    for k in 1u64..1 << n {
        let j = k.trailing_zeros() as usize;
        if (k ^ (k >> 1)) & (1 << j) != 0 {
            popcount += 1;
            for (i, row) in matrix.iter().enumerate() {
                row_sums[i] += row[j];
            }
        } else {
            popcount -= 1;
            for (i, row) in matrix.iter().enumerate() {
                row_sums[i] -= row[j];
            }
        }
        let mut product = BigInt::from(1);
        let mut zero = false;
        for s in &row_sums {
            if *s == BigInt::from(0) {
                zero = true;
                break;
            }
            product *= s;
        }
        if zero {
            continue;
        }
        if (n as u32 - popcount) % 2 == 0 {
            total += product;
        } else {
            total -= product;
        }
    }
    total
}

/// Permanent by direct permutation scan; the independent cross-check for
/// [`exact_permanent`].
///
/// # Panics
/// Panics if the matrix is not square or larger than 10×10.
pub fn permanent_naive(matrix: &[Vec<u64>]) -> BigInt {
    let n = matrix.len();
    for row in matrix {
        assert_eq!(row.len(), n, "permanent requires a square matrix");
    }
    assert!(n <= 10, "naive permanent limited to 10×10");
    let mut used = vec![false; n];
    fn rec(matrix: &[Vec<u64>], r: usize, used: &mut [bool]) -> BigInt {
        let n = matrix.len();
        if r == n {
            return BigInt::from(1);
        }
        let mut sum = BigInt::from(0);
        for c in 0..n {
            if !used[c] && matrix[r][c] != 0 {
                used[c] = true;
                sum += BigInt::from(matrix[r][c]) * rec(matrix, r + 1, used);
                used[c] = false;
            }
        }
        sum
    }
    rec(matrix, 0, &mut used)
}

// ---------------------------------------------------------------------------
// regular bipartite graphs and one-factorizations
// ---------------------------------------------------------------------------

/// A bipartite graph on parts of size `n`, stored as row adjacency bitmasks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    pub n: usize,
    /// `rows[r]` bit `c` set iff edge `(r, c)` is present.
    pub rows: Vec<u32>,
}

impl BitMatrix {
    pub fn entry(&self, r: usize, c: usize) -> bool {
        self.rows[r] >> c & 1 == 1
    }

    /// Degree of left vertex `r`.
    pub fn row_degree(&self, r: usize) -> usize {
        self.rows[r].count_ones() as usize
    }

    /// Degree of right vertex `c`.
    pub fn col_degree(&self, c: usize) -> usize {
        self.rows.iter().filter(|&&m| m >> c & 1 == 1).count()
    }

    /// True when every vertex has degree `d`.
    pub fn is_regular(&self, d: usize) -> bool {
        (0..self.n).all(|r| self.row_degree(r) == d)
            && (0..self.n).all(|c| self.col_degree(c) == d)
    }

    /// The biadjacency matrix as a 0/1 integer table.
    pub fn to_table(&self) -> Vec<Vec<u64>> {
        (0..self.n)
            .map(|r| (0..self.n).map(|c| self.entry(r, c) as u64).collect())
            .collect()
    }

    /// Number of perfect matchings (the permanent of the biadjacency).
    pub fn matching_count(&self) -> u64 {
        let mut count = 0u64;
        for_each_matching_from(self, 0, 0, &mut vec![0; self.n], &mut |_| count += 1);
        count
    }
}

/// All `d`-regular bipartite graphs on `n + n` vertices, by exhaustive scan
/// of every 0/1 matrix. Exact but exponential: `n ≤ 4` only.
pub fn regular_bipartite_graphs(n: usize, d: usize) -> Result<Vec<BitMatrix>, ResourceError> {
    assert!(d <= n, "degree {d} exceeds part size {n}");
    if n > 4 {
        return Err(ResourceError { task: "regular bipartite scan (n ≤ 4)", budget: 4 });
    }
    let mut out = Vec::new();
    let cells = n * n;
    for code in 0u64..1 << cells {
        let rows: Vec<u32> =
            (0..n).map(|r| (code >> (r * n) & ((1 << n) - 1)) as u32).collect();
        let g = BitMatrix { n, rows };
        if g.is_regular(d) {
            out.push(g);
        }
    }
    Ok(out)
}

/// A random `d`-regular bipartite graph, built row by row.
///
/// Columns whose remaining demand equals the number of unfilled rows are
/// forced; the rest of each row is a uniform choice among the columns that
/// still need edges. There are never more forced columns than row slots, so
/// construction always succeeds. The resulting distribution is *not*
/// uniform over regular graphs; it is intended for spot checks.
pub fn random_regular_bipartite(
    n: usize,
    d: usize,
    rng: &mut impl rand::Rng,
) -> BitMatrix {
    assert!(d <= n, "degree {d} exceeds part size {n}");
    let mut demand = vec![d; n];
    let mut rows = Vec::with_capacity(n);
    for r in 0..n {
        let rows_left = n - r;
        let mut mask = 0u32;
        let mut chosen = 0usize;
        let mut optional: Vec<usize> = Vec::new();
        for c in 0..n {
            if demand[c] == rows_left {
                mask |= 1 << c;
                chosen += 1;
            } else if demand[c] > 0 {
                optional.push(c);
            }
        }
        debug_assert!(chosen <= d, "more forced columns than slots");
        // partial Fisher–Yates draw of the remaining slots
        let need = d - chosen;
        for i in 0..need {
            let j = rng.random_range(i..optional.len());
            optional.swap(i, j);
            mask |= 1 << optional[i];
        }
        for c in 0..n {
            if mask >> c & 1 == 1 {
                demand[c] -= 1;
            }
        }
        rows.push(mask);
    }
    let g = BitMatrix { n, rows };
    debug_assert!(g.is_regular(d));
    g
}

fn for_each_matching_from(
    g: &BitMatrix,
    r: usize,
    used_cols: u32,
    assignment: &mut Vec<u32>,
    f: &mut impl FnMut(&[u32]),
) {
    if r == g.n {
        f(assignment);
        return;
    }
    let mut free = g.rows[r] & !used_cols;
    while free != 0 {
        let c = free.trailing_zeros();
        free &= free - 1;
        assignment[r] = c;
        for_each_matching_from(g, r + 1, used_cols | 1 << c, assignment, f);
    }
}

/// All valid twists from `l`, found by trying every row and every ordered
/// 6-tuple of distinct columns against the full twist validation. This is
/// the slow ground truth for the structured candidate generation in
/// [`crate::switchings::forward_twist_choices`]; each tuple costs one
/// budget node.
pub fn brute_force_twist_choices(
    l: &LatinRectangle,
    cap: u64,
    budget: Option<u64>,
) -> Result<Vec<crate::switchings::TwistChoice>, ResourceError> {
    use crate::switchings::TwistChoice;
    let budget = crate::resolve_budget(budget);
    let mut nodes = 0u64;
    let n = l.n();
    let census = intercalates::census(l);
    let mut found = std::collections::BTreeSet::new();
    let distinct = |cols: &[usize]| {
        cols.iter().enumerate().all(|(i, a)| cols[..i].iter().all(|b| b != a))
    };
    for row in 0..l.row_count() {
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if !distinct(&[x, y, z]) {
                        continue;
                    }
                    for x2 in 0..n {
                        for y2 in 0..n {
                            for z2 in 0..n {
                                if !distinct(&[x, y, z, x2, y2, z2]) {
                                    continue;
                                }
                                nodes += 1;
                                if nodes > budget {
                                    return Err(ResourceError {
                                        task: "brute-force twist tuples",
                                        budget,
                                    });
                                }
                                let choice = TwistChoice {
                                    row,
                                    first: (x, y, z),
                                    second: (x2, y2, z2),
                                }
                                .canonical();
                                if found.contains(&choice) {
                                    continue;
                                }
                                if crate::switchings::twist_checked(l, &census, &choice, cap)
                                    .is_ok()
                                {
                                    found.insert(choice);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(found.into_iter().collect())
}

/// Number of ordered one-factorizations: sequences of perfect matchings
/// that partition the edge set. Counts by removing one matching at a time.
/// Zero for non-regular graphs (they have no one-factorization).
pub fn count_one_factorizations(g: &BitMatrix) -> u64 {
    let d = g.row_degree(0);
    if !g.is_regular(d) {
        return 0;
    }
    fn rec(g: &BitMatrix) -> u64 {
        if g.rows.iter().all(|&m| m == 0) {
            return 1;
        }
        let mut total = 0u64;
        let mut assignment = vec![0u32; g.n];
        let mut matchings = Vec::new();
        for_each_matching_from(g, 0, 0, &mut assignment, &mut |a| {
            matchings.push(a.to_vec());
        });
        for m in matchings {
            let mut rest = g.clone();
            for (r, &c) in m.iter().enumerate() {
                rest.rows[r] &= !(1 << c);
            }
            total += rec(&rest);
        }
        total
    }
    rec(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_counts_for_tiny_orders() {
        let opts = EnumerationOptions::default();
        assert_eq!(enumerate_squares(1, &opts).unwrap().total, 1);
        assert_eq!(enumerate_squares(2, &opts).unwrap().total, 2);
        assert_eq!(enumerate_squares(3, &opts).unwrap().total, 12);
        assert_eq!(enumerate_squares(4, &opts).unwrap().total, 576);
    }

    #[test]
    fn reduced_counts_match_full_counts() {
        for n in 2..=4 {
            let reduced = count_reduced_squares(n, None).unwrap();
            let full = enumerate_squares(n, &EnumerationOptions::default()).unwrap().total;
            assert_eq!(reduced * factorial(n), full, "n={n}");
        }
    }

    #[test]
    fn first_square_is_cyclic() {
        let mut first = None;
        for_each_square(3, None, |sq| {
            first = Some(sq.clone());
            false
        })
        .unwrap();
        assert_eq!(first.unwrap(), LatinSquare::cyclic(3));
    }

    #[test]
    fn rectangle_count_2x4() {
        // 4! first rows × 9 derangements of 4
        let total = for_each_rectangle(2, 4, None, |_| true).unwrap();
        assert_eq!(total, 216);
    }

    #[test]
    fn extension_counts_from_a_fixed_rectangle() {
        // third-row extension counts depend only on the row-pair cycle type:
        // a (2,2) pair admits 4 third rows, a (4) pair admits 2
        let two_two = LatinRectangle::from_rows(&[vec![0, 1, 2, 3], vec![1, 0, 3, 2]]).unwrap();
        let four = LatinRectangle::from_rows(&[vec![0, 1, 2, 3], vec![1, 2, 3, 0]]).unwrap();
        assert_eq!(for_each_extension(&two_two, 3, None, |_| true).unwrap(), 4);
        assert_eq!(for_each_extension(&four, 3, None, |_| true).unwrap(), 2);
        // extending to the same height visits exactly the prefix
        assert_eq!(for_each_extension(&four, 2, None, |_| true).unwrap(), 1);
    }

    #[test]
    fn histograms_for_order_four() {
        let opts = EnumerationOptions { histograms: true, ..Default::default() };
        let result = enumerate_squares(4, &opts).unwrap();
        assert_eq!(result.total, 576);
        // order 4 admits exactly two intercalate counts
        let histogram: Vec<(u64, u64)> =
            result.intercalate_histogram.iter().map(|(&a, &b)| (a, b)).collect();
        assert_eq!(histogram, vec![(4, 432), (12, 144)]);
        assert!((result.mean_intercalates() - 6.0).abs() < 1e-12);
        // first-two-rows classes split evenly between 0 and 2 intercalates,
        // so the first-pair count has mean exactly 1
        assert_eq!(result.class_sizes.get(&0), Some(&288));
        assert_eq!(result.class_sizes.get(&2), Some(&288));
        assert_eq!(result.class_sizes.get(&1), None);
        assert_eq!(result.class_sizes.values().sum::<u64>(), 576);
    }

    #[test]
    fn histograms_for_order_five() {
        let opts = EnumerationOptions { histograms: true, ..Default::default() };
        let result = enumerate_squares(5, &opts).unwrap();
        assert_eq!(result.total, 161_280);
        let histogram: Vec<(u64, u64)> =
            result.intercalate_histogram.iter().map(|(&a, &b)| (a, b)).collect();
        assert_eq!(histogram, vec![(0, 17_280), (4, 144_000)]);
        let classes: Vec<(u64, u64)> =
            result.class_sizes.iter().map(|(&a, &b)| (a, b)).collect();
        assert_eq!(classes, vec![(0, 103_680), (1, 57_600)]);
    }

    #[test]
    fn enumeration_budget_is_enforced() {
        assert!(for_each_square(5, Some(1000), |_| true).is_err());
    }

    #[test]
    fn early_stop_reports_partial_count() {
        let mut seen = 0;
        let visited = for_each_square(4, None, |_| {
            seen += 1;
            seen < 10
        })
        .unwrap();
        assert_eq!(visited, 10);
    }

    #[test]
    fn collected_squares_are_distinct_and_valid() {
        let opts = EnumerationOptions { collect: true, ..Default::default() };
        let result = enumerate_squares(3, &opts).unwrap();
        assert_eq!(result.collected.len(), 12);
        let set: std::collections::HashSet<_> = result.collected.iter().collect();
        assert_eq!(set.len(), 12);
    }

    #[test]
    fn unrank_yields_all_permutations_in_order() {
        let all: Vec<Vec<u32>> = (0..24).map(|r| unrank_permutation(4, r)).collect();
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(all, sorted, "ranks must enumerate in lexicographic order");
        assert_eq!(all.len(), 24);
        assert_eq!(all[0], vec![0, 1, 2, 3]);
        assert_eq!(all[23], vec![3, 2, 1, 0]);
    }

    #[test]
    fn checkpointed_run_resumes_and_matches_single_shot() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("enum4.ckpt");
        // small per-call budget: the run must be interrupted at least once
        // (one first-row block costs ~234 nodes, the full space 24 blocks)
        let mut calls = 0;
        let result = loop {
            calls += 1;
            assert!(calls <= 100, "checkpointed run failed to make progress");
            match enumerate_squares_checkpointed(4, &path, Some(2_000)) {
                Ok(r) => break r,
                Err(CheckpointError::Budget(_)) => continue,
                Err(e) => panic!("unexpected checkpoint failure: {e}"),
            }
        };
        assert!(calls > 1, "budget was meant to interrupt the run");
        let opts = EnumerationOptions { histograms: true, ..Default::default() };
        let single = enumerate_squares(4, &opts).unwrap();
        assert_eq!(result.total, single.total);
        assert_eq!(result.intercalate_histogram, single.intercalate_histogram);
        assert_eq!(result.class_sizes, single.class_sizes);
    }

    #[test]
    fn checkpoint_mismatch_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("enum.ckpt");
        enumerate_squares_checkpointed(3, &path, None).unwrap();
        // a finished order-3 checkpoint cannot serve an order-4 run
        match enumerate_squares_checkpointed(4, &path, None) {
            Err(CheckpointError::Mismatch { expected: (4, 4), found: (3, 3) }) => {}
            other => panic!("expected mismatch, got {other:?}"),
        }
    }

    #[test]
    fn permanent_of_all_ones_is_factorial() {
        for n in 1..=6 {
            let matrix = vec![vec![1u64; n]; n];
            assert_eq!(exact_permanent(&matrix).unwrap(), BigInt::from(factorial(n)));
        }
    }

    #[test]
    fn permanent_of_identity_is_one() {
        let matrix: Vec<Vec<u64>> =
            (0..5).map(|r| (0..5).map(|c| (r == c) as u64).collect()).collect();
        assert_eq!(exact_permanent(&matrix).unwrap(), BigInt::from(1));
    }

    #[test]
    fn gray_code_permanent_matches_naive_scan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.random_range(1..=6);
            let matrix: Vec<Vec<u64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.random_range(0..4)).collect())
                .collect();
            assert_eq!(exact_permanent(&matrix).unwrap(), permanent_naive(&matrix));
        }
    }

    #[test]
    fn big_entry_permanent_uses_bignum_path() {
        // row sums near u64::MAX force the BigInt accumulator
        let big = u64::MAX / 2;
        let matrix = vec![vec![big; 3]; 3];
        let expected = BigInt::from(big).pow(3) * 6;
        assert_eq!(exact_permanent(&matrix).unwrap(), expected);
    }

    #[test]
    fn permanent_dimension_guard() {
        let matrix = vec![vec![1u64; 25]; 25];
        assert!(exact_permanent(&matrix).is_err());
    }

    #[test]
    fn regular_graph_counts_for_small_orders() {
        // d = 1 graphs are permutation matrices; d = n − 1 their complements
        assert_eq!(regular_bipartite_graphs(3, 1).unwrap().len(), 6);
        assert_eq!(regular_bipartite_graphs(3, 2).unwrap().len(), 6);
        assert_eq!(regular_bipartite_graphs(4, 1).unwrap().len(), 24);
        assert_eq!(regular_bipartite_graphs(4, 2).unwrap().len(), 90);
        assert_eq!(regular_bipartite_graphs(4, 3).unwrap().len(), 24);
        for n in 1..=4 {
            assert_eq!(regular_bipartite_graphs(n, 0).unwrap().len(), 1);
            assert_eq!(regular_bipartite_graphs(n, n).unwrap().len(), 1);
        }
    }

    #[test]
    fn matching_count_agrees_with_permanent() {
        for g in regular_bipartite_graphs(4, 2).unwrap() {
            let by_permanent = exact_permanent(&g.to_table()).unwrap();
            assert_eq!(BigInt::from(g.matching_count()), by_permanent);
        }
    }

    #[test]
    fn one_factorizations_of_complete_bipartite_count_latin_squares() {
        // ordered one-factorizations of K_{n,n} biject with Latin squares:
        // the t-th matching marks the cells holding symbol t
        for n in 2..=3 {
            let full = BitMatrix { n, rows: vec![(1 << n) - 1; n] };
            let squares = enumerate_squares(n, &EnumerationOptions::default()).unwrap().total;
            assert_eq!(count_one_factorizations(&full), squares);
        }
    }

    #[test]
    fn one_factorizations_of_two_regular_graphs() {
        // a single 6-cycle has two matchings and two ordered factorizations;
        // a pair of 4-cycles has four of each
        let six_cycle = BitMatrix { n: 3, rows: vec![0b011, 0b110, 0b101] };
        assert_eq!(six_cycle.matching_count(), 2);
        assert_eq!(count_one_factorizations(&six_cycle), 2);
        let two_squares = BitMatrix { n: 4, rows: vec![0b0011, 0b0011, 0b1100, 0b1100] };
        assert_eq!(two_squares.matching_count(), 4);
        assert_eq!(count_one_factorizations(&two_squares), 4);
    }

    #[test]
    fn random_regular_graphs_are_regular() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for _ in 0..20 {
            for (n, d) in [(5, 2), (6, 3), (8, 5), (6, 0), (6, 6)] {
                let g = random_regular_bipartite(n, d, &mut rng);
                assert!(g.is_regular(d), "n={n} d={d}");
            }
        }
    }
}
