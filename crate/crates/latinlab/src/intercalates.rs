//! Counting intercalates — 2×2 Latin subsquares — and general `m × m`
//! subsquares of Latin rectangles.
//!
//! An intercalate is a pair of rows `i < j` and a pair of columns `x < y`
//! such that the four cells form a 2×2 Latin square: `L[i][x] = L[j][y]`
//! and `L[i][y] = L[j][x]`. Equivalently, `{x, y}` is a 2-cycle of the
//! row-pair permutation of `(i, j)`, which is how the census counts them
//! in O(n) per row pair without scanning column pairs.

use crate::model::LatinRectangle;
use crate::ResourceError;
use std::collections::BTreeMap;

/// One intercalate, normalized to `rows.0 < rows.1` and `cols.0 < cols.1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Intercalate {
    pub rows: (usize, usize),
    pub cols: (usize, usize),
}

impl Intercalate {
    /// The two symbols on the intercalate, in the order they appear in the
    /// upper row: `(L[i][x], L[i][y])`.
    pub fn symbols(&self, l: &LatinRectangle) -> (usize, usize) {
        (l.get(self.rows.0, self.cols.0), l.get(self.rows.0, self.cols.1))
    }
}

/// Aggregate intercalate counts of one rectangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntercalateCensus {
    /// Total number of intercalates, `N(L)`.
    pub total: u64,
    /// `per_row[r]` = number of intercalates using row `r`.
    pub per_row: Vec<u64>,
    /// Nonzero counts per row pair `(i, j)` with `i < j`.
    pub per_pair: BTreeMap<(usize, usize), u64>,
}

impl IntercalateCensus {
    /// Largest single-row count.
    pub fn max_per_row(&self) -> u64 {
        self.per_row.iter().copied().max().unwrap_or(0)
    }

    /// `N(L) / n²`, the natural density scale for squares.
    pub fn rate(&self) -> f64 {
        let n = self.per_row.len() as f64;
        if n == 0.0 {
            0.0
        } else {
            self.total as f64 / (n * n)
        }
    }
}

/// Number of intercalates on one row pair: the 2-cycle count of the
/// row-pair permutation, found by a single O(n) scan.
///
/// # Panics
/// Panics if `i` or `j` is out of range or `i == j`.
pub fn two_row_count(l: &LatinRectangle, i: usize, j: usize) -> usize {
    let k = l.row_count();
    assert!(i < k && j < k && i != j, "invalid row pair ({i},{j})");
    let n = l.n();
    let mut count = 0;
    for x in 0..n {
        let y = l.column_of(i, l.get(j, x));
        if y > x && l.column_of(i, l.get(j, y)) == x {
            count += 1;
        }
    }
    count
}

/// Full census over all row pairs. O(k²·n).
pub fn census(l: &LatinRectangle) -> IntercalateCensus {
    let k = l.row_count();
    let mut total = 0u64;
    let mut per_row = vec![0u64; k];
    let mut per_pair = BTreeMap::new();
    for i in 0..k {
        for j in i + 1..k {
            let c = two_row_count(l, i, j) as u64;
            if c > 0 {
                total += c;
                per_row[i] += c;
                per_row[j] += c;
                per_pair.insert((i, j), c);
            }
        }
    }
    debug_assert_eq!(per_row.iter().sum::<u64>(), 2 * total);
    IntercalateCensus { total, per_row, per_pair }
}

/// Every intercalate, in lexicographic order of `(rows, cols)`.
pub fn witnesses(l: &LatinRectangle) -> Vec<Intercalate> {
    let k = l.row_count();
    let n = l.n();
    let mut out = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            for x in 0..n {
                let y = l.column_of(i, l.get(j, x));
                if y > x && l.column_of(i, l.get(j, y)) == x {
                    out.push(Intercalate { rows: (i, j), cols: (x, y) });
                }
            }
        }
    }
    out
}

/// Number of `m × m` Latin subsquares: row subsets and column subsets whose
/// restriction is a Latin square on `m` symbols.
///
/// Backtracks over row subsets, then over column subsets with per-row
/// symbol-disjointness and symbol-union pruning. Each extension attempt
/// costs one node against `budget` (`None` resolves via
/// [`crate::resolve_budget`]).
pub fn subsquare_count(
    l: &LatinRectangle,
    m: usize,
    budget: Option<u64>,
) -> Result<u64, ResourceError> {
    let k = l.row_count();
    let n = l.n();
    if m == 0 || m > k.min(n) {
        return Ok(0);
    }
    if n > 128 {
        return Err(ResourceError { task: "subsquare search width (n ≤ 128)", budget: 128 });
    }
    let budget = crate::resolve_budget(budget);
    let mut nodes = 0u64;
    let mut rows = Vec::with_capacity(m);
    let mut found = 0u64;
    let mut used = vec![0u128; m];
    search_rows(l, m, &mut rows, 0, &mut used, budget, &mut nodes, &mut found)?;
    Ok(found)
}

#[allow(clippy::too_many_arguments)]
fn search_rows(
    l: &LatinRectangle,
    m: usize,
    rows: &mut Vec<usize>,
    from: usize,
    used: &mut [u128],
    budget: u64,
    nodes: &mut u64,
    found: &mut u64,
) -> Result<(), ResourceError> {
    if rows.len() == m {
        let mut cols = Vec::with_capacity(m);
        used.iter_mut().for_each(|u| *u = 0);
        return search_cols(l, m, rows, &mut cols, 0, used, 0, budget, nodes, found);
    }
    let slack = m - rows.len();
    for r in from..=l.row_count().saturating_sub(slack) {
        *nodes += 1;
        if *nodes > budget {
            return Err(ResourceError { task: "subsquare backtracking nodes", budget });
        }
        rows.push(r);
        search_rows(l, m, rows, r + 1, used, budget, nodes, found)?;
        rows.pop();
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn search_cols(
    l: &LatinRectangle,
    m: usize,
    rows: &[usize],
    cols: &mut Vec<usize>,
    from: usize,
    used: &mut [u128],
    union: u128,
    budget: u64,
    nodes: &mut u64,
    found: &mut u64,
) -> Result<(), ResourceError> {
    if cols.len() == m {
        // per-row disjointness and |union| ≤ m imply each row's symbol set
        // equals the union, so the restriction is already known Latin
        debug_assert_eq!(union.count_ones() as usize, m);
        *found += 1;
        return Ok(());
    }
    let slack = m - cols.len();
    'next: for c in from..=l.n().saturating_sub(slack) {
        *nodes += 1;
        if *nodes > budget {
            return Err(ResourceError { task: "subsquare backtracking nodes", budget });
        }
        let mut new_union = union;
        for (t, &r) in rows.iter().enumerate() {
            let bit = 1u128 << l.get(r, c);
            if used[t] & bit != 0 {
                continue 'next;
            }
            new_union |= bit;
        }
        if new_union.count_ones() as usize > m {
            continue;
        }
        for (t, &r) in rows.iter().enumerate() {
            used[t] |= 1u128 << l.get(r, c);
        }
        cols.push(c);
        search_cols(l, m, rows, cols, c + 1, used, new_union, budget, nodes, found)?;
        cols.pop();
        for (t, &r) in rows.iter().enumerate() {
            used[t] &= !(1u128 << l.get(r, c));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LatinSquare;

    #[test]
    fn cyclic_even_orders_have_intercalates() {
        // in the cyclic square, row pairs at distance n/2 contribute n/2 each
        let c = census(&LatinSquare::cyclic(4));
        assert_eq!(c.total, 4);
        assert_eq!(c.per_row, vec![2, 2, 2, 2]);
        assert_eq!(c.per_pair.get(&(0, 2)), Some(&2));
        assert_eq!(c.per_pair.get(&(0, 1)), None);
        assert_eq!(census(&LatinSquare::cyclic(6)).total, 9);
    }

    #[test]
    fn cyclic_odd_orders_are_intercalate_free() {
        for n in [3, 5, 7, 9] {
            assert_eq!(census(&LatinSquare::cyclic(n)).total, 0);
        }
    }

    #[test]
    fn witness_list_matches_census_and_is_sorted() {
        let l = LatinSquare::cyclic(4);
        let w = witnesses(&l);
        assert_eq!(w.len(), census(&l).total as usize);
        let expected = vec![
            Intercalate { rows: (0, 2), cols: (0, 2) },
            Intercalate { rows: (0, 2), cols: (1, 3) },
            Intercalate { rows: (1, 3), cols: (0, 2) },
            Intercalate { rows: (1, 3), cols: (1, 3) },
        ];
        assert_eq!(w, expected);
        // each witness really is a 2×2 Latin subsquare
        for itc in &w {
            let (i, j) = itc.rows;
            let (x, y) = itc.cols;
            assert_eq!(l.get(i, x), l.get(j, y));
            assert_eq!(l.get(i, y), l.get(j, x));
            assert_ne!(l.get(i, x), l.get(i, y));
        }
        assert_eq!(w[0].symbols(&l), (0, 2));
    }

    #[test]
    fn two_row_count_matches_census_pairs() {
        let l = LatinSquare::cyclic(6);
        let c = census(&l);
        for i in 0..6 {
            for j in i + 1..6 {
                let expected = c.per_pair.get(&(i, j)).copied().unwrap_or(0);
                assert_eq!(two_row_count(&l, i, j) as u64, expected);
            }
        }
    }

    #[test]
    fn rate_and_max_per_row() {
        let c = census(&LatinSquare::cyclic(4));
        assert_eq!(c.max_per_row(), 2);
        assert!((c.rate() - 4.0 / 16.0).abs() < 1e-12);
    }

    /// Reference subsquare counter: scan all row and column subsets.
    fn naive_subsquare_count(l: &LatinRectangle, m: usize) -> u64 {
        fn subsets(limit: usize, m: usize) -> Vec<Vec<usize>> {
            let mut out = Vec::new();
            let mut cur = Vec::new();
            fn rec(limit: usize, m: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
                if cur.len() == m {
                    out.push(cur.clone());
                    return;
                }
                for i in from..limit {
                    cur.push(i);
                    rec(limit, m, i + 1, cur, out);
                    cur.pop();
                }
            }
            rec(limit, m, 0, &mut cur, &mut out);
            out
        }
        let mut found = 0;
        for rows in subsets(l.row_count(), m) {
            'cols: for cols in subsets(l.n(), m) {
                let mut symbols: Vec<usize> = Vec::new();
                for &r in &rows {
                    let mut row_syms: Vec<usize> =
                        cols.iter().map(|&c| l.get(r, c)).collect();
                    row_syms.sort_unstable();
                    if row_syms.windows(2).any(|w| w[0] == w[1]) {
                        continue 'cols;
                    }
                    if symbols.is_empty() {
                        symbols = row_syms;
                    } else if symbols != row_syms {
                        continue 'cols;
                    }
                }
                found += 1;
            }
        }
        found
    }

    #[test]
    fn subsquare_count_order_two_equals_census() {
        for n in [4, 5, 6] {
            let l = LatinSquare::cyclic(n);
            assert_eq!(subsquare_count(&l, 2, None).unwrap(), census(&l).total);
        }
    }

    #[test]
    fn subsquare_count_matches_naive_scan() {
        for n in [4, 5, 6] {
            let l = LatinSquare::cyclic(n);
            for m in 1..=4 {
                assert_eq!(
                    subsquare_count(&l, m, None).unwrap(),
                    naive_subsquare_count(&l, m),
                    "n={n} m={m}"
                );
            }
        }
    }

    #[test]
    fn whole_square_is_its_own_subsquare() {
        let l = LatinSquare::cyclic(4);
        assert_eq!(subsquare_count(&l, 4, None).unwrap(), 1);
        assert_eq!(subsquare_count(&l, 5, None).unwrap(), 0);
    }

    #[test]
    fn subsquare_budget_is_enforced() {
        let l = LatinSquare::cyclic(6);
        let err = subsquare_count(&l, 3, Some(10)).unwrap_err();
        assert_eq!(err.budget, 10);
    }
}
