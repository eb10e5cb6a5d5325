//! Core types: validated Latin rectangles and squares, row/column/symbol
//! lookup tables, the 0/1 incidence view, cycle structures of row-pair and
//! column-pair permutations, and the text/JSON interchange formats.
//!
//! Internally rows, columns and symbols are 0-based. The interchange formats
//! (and coordinates quoted in error messages) are 1-based; conversion is
//! confined to this module's serialization boundary.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Sentinel for "no row holds this symbol in this column" in partial
/// (rectangle) column tables.
pub(crate) const ABSENT: u32 = u32::MAX;

/// Validation or parse failure for rectangle/square input.
///
/// All coordinates and symbol values quoted by these errors are 1-based,
/// matching the interchange formats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    /// A row has the wrong number of entries.
    Shape { row: usize, got: usize, expected: usize },
    /// The number of rows is zero, or exceeds the number of columns.
    RowCount { rows: usize, n: usize },
    /// A square was required but the input is a proper rectangle.
    NotSquare { rows: usize, n: usize },
    /// An entry lies outside `1..=n`.
    Symbol { row: usize, col: usize, value: i64, n: usize },
    /// A symbol occurs twice in one row; the cell is the second occurrence.
    RowRepeat { row: usize, col: usize, symbol: usize },
    /// A symbol occurs twice in one column; the cell is the lower occurrence.
    ColumnRepeat { row: usize, col: usize, symbol: usize },
    /// A row, column or symbol index is out of range for this shape.
    Index { what: &'static str, got: usize, limit: usize },
    /// A claimed permutation is not one.
    NotPermutation { position: usize, value: usize },
    /// Malformed textual input.
    Parse { line: usize, reason: String },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Shape { row, got, expected } => {
                write!(f, "row {row} has {got} entries, expected {expected}")
            }
            ModelError::RowCount { rows, n } => {
                write!(f, "{rows} rows do not fit a Latin rectangle on {n} columns")
            }
            ModelError::NotSquare { rows, n } => {
                write!(f, "expected a square, got {rows} rows on {n} columns")
            }
            ModelError::Symbol { row, col, value, n } => {
                write!(f, "cell ({row},{col}) holds {value}, outside 1..={n}")
            }
            ModelError::RowRepeat { row, col, symbol } => {
                write!(f, "symbol {symbol} repeated in row {row}, second time at cell ({row},{col})")
            }
            ModelError::ColumnRepeat { row, col, symbol } => {
                write!(f, "symbol {symbol} repeated in column {col}, second time at cell ({row},{col})")
            }
            ModelError::Index { what, got, limit } => {
                write!(f, "{what} index {got} out of range (limit {limit})")
            }
            ModelError::NotPermutation { position, value } => {
                write!(f, "not a permutation: value {value} at position {position} is out of range or repeated")
            }
            ModelError::Parse { line, reason } => write!(f, "line {line}: {reason}"),
        }
    }
}

impl std::error::Error for ModelError {}

/// A `k × n` Latin rectangle: `k` rows over symbols `0..n`, every row a
/// permutation, no symbol repeated within a column.
///
/// Alongside the cell array the type maintains two lookup tables so that the
/// three coordinate directions of the incidence array can each be resolved in
/// O(1): symbol at `(row, col)`, column holding a symbol within a row, and row
/// holding a symbol within a column (absent for rectangles with `k < n`).
#[derive(Clone)]
pub struct LatinRectangle {
    k: usize,
    n: usize,
    /// Row-major, `k * n` entries in `0..n`.
    cells: Vec<u32>,
    /// `col_of[r * n + s]` = column of symbol `s` in row `r`.
    col_of: Vec<u32>,
    /// `row_of[c * n + s]` = row holding symbol `s` in column `c`, or [`ABSENT`].
    row_of: Vec<u32>,
}

impl PartialEq for LatinRectangle {
    fn eq(&self, other: &Self) -> bool {
        // the lookup tables are determined by the cells
        self.k == other.k && self.n == other.n && self.cells == other.cells
    }
}

impl Eq for LatinRectangle {}

impl std::hash::Hash for LatinRectangle {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.k.hash(state);
        self.n.hash(state);
        self.cells.hash(state);
    }
}

impl fmt::Debug for LatinRectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "LatinRectangle {}x{} [", self.k, self.n)?;
        for r in 0..self.k {
            write!(f, "  ")?;
            for c in 0..self.n {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.cells[r * self.n + c] + 1)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl LatinRectangle {
    /// Builds a rectangle from a row-major cell array with 0-based symbols.
    pub fn from_flat(k: usize, n: usize, cells: Vec<u32>) -> Result<Self, ModelError> {
        if k == 0 || n == 0 || k > n {
            return Err(ModelError::RowCount { rows: k, n });
        }
        if cells.len() != k * n {
            return Err(ModelError::Shape {
                row: cells.len() / n.max(1) + 1,
                got: cells.len() % n.max(1),
                expected: n,
            });
        }
        let mut rect = LatinRectangle {
            k,
            n,
            cells,
            col_of: vec![ABSENT; k * n],
            row_of: vec![ABSENT; n * n],
        };
        rect.rebuild_tables()?;
        Ok(rect)
    }

    /// Builds a rectangle from 0-based symbol rows.
    pub fn from_rows(rows: &[Vec<usize>]) -> Result<Self, ModelError> {
        let k = rows.len();
        if k == 0 {
            return Err(ModelError::RowCount { rows: 0, n: 0 });
        }
        let n = rows[0].len();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::Shape { row: r + 1, got: row.len(), expected: n });
            }
        }
        let mut cells = Vec::with_capacity(k * n);
        for row in rows {
            for &s in row {
                cells.push(u32::try_from(s).unwrap_or(u32::MAX - 1));
            }
        }
        Self::from_flat(k, n, cells)
    }

    /// Number of rows (`k`).
    pub fn row_count(&self) -> usize {
        self.k
    }

    /// Number of columns and symbols (`n`).
    pub fn n(&self) -> usize {
        self.n
    }

    /// True when `k == n`.
    pub fn is_square(&self) -> bool {
        self.k == self.n
    }

    /// Symbol at `(row, col)`.
    ///
    /// # Panics
    /// Panics if `row` or `col` is out of range.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> usize {
        assert!(row < self.k && col < self.n, "cell ({row},{col}) out of range");
        self.cells[row * self.n + col] as usize
    }

    /// Column holding `symbol` within `row`.
    ///
    /// # Panics
    /// Panics if `row` or `symbol` is out of range.
    #[inline]
    pub fn column_of(&self, row: usize, symbol: usize) -> usize {
        assert!(row < self.k && symbol < self.n, "(row {row}, symbol {symbol}) out of range");
        self.col_of[row * self.n + symbol] as usize
    }

    /// Row holding `symbol` within `col`, if any row of the rectangle does.
    ///
    /// # Panics
    /// Panics if `col` or `symbol` is out of range.
    #[inline]
    pub fn row_with(&self, col: usize, symbol: usize) -> Option<usize> {
        assert!(col < self.n && symbol < self.n, "(column {col}, symbol {symbol}) out of range");
        match self.row_of[col * self.n + symbol] {
            ABSENT => None,
            r => Some(r as usize),
        }
    }

    /// The cells as 0-based symbol rows.
    pub fn to_rows(&self) -> Vec<Vec<usize>> {
        (0..self.k)
            .map(|r| (0..self.n).map(|c| self.get(r, c)).collect())
            .collect()
    }

    /// Row-major cell array (0-based symbols).
    pub fn flat_cells(&self) -> &[u32] {
        &self.cells
    }

    /// 0/1 incidence view of this rectangle.
    pub fn incidence(&self) -> IncidenceView<'_> {
        IncidenceView(self)
    }

    pub(crate) fn cells_mut(&mut self) -> &mut [u32] {
        &mut self.cells
    }

    /// Builds a rectangle from cells already known to be Latin, skipping
    /// repeat checks (enumeration hot path). Validates fully in debug builds.
    pub(crate) fn from_flat_unchecked(k: usize, n: usize, cells: Vec<u32>) -> Self {
        let mut col_of = vec![ABSENT; k * n];
        let mut row_of = vec![ABSENT; n * n];
        for r in 0..k {
            for c in 0..n {
                let s = cells[r * n + c] as usize;
                col_of[r * n + s] = c as u32;
                row_of[c * n + s] = r as u32;
            }
        }
        let rect = LatinRectangle { k, n, cells, col_of, row_of };
        debug_assert!(
            rect.clone().rebuild_tables().is_ok(),
            "from_flat_unchecked fed non-Latin cells"
        );
        rect
    }

    /// Revalidates the cell array and rebuilds both lookup tables.
    pub(crate) fn rebuild_tables(&mut self) -> Result<(), ModelError> {
        let (k, n) = (self.k, self.n);
        self.col_of.iter_mut().for_each(|v| *v = ABSENT);
        self.row_of.iter_mut().for_each(|v| *v = ABSENT);
        for r in 0..k {
            for c in 0..n {
                let s = self.cells[r * n + c];
                if s as usize >= n {
                    return Err(ModelError::Symbol {
                        row: r + 1,
                        col: c + 1,
                        value: s as i64 + 1,
                        n,
                    });
                }
                let slot = &mut self.col_of[r * n + s as usize];
                if *slot != ABSENT {
                    return Err(ModelError::RowRepeat {
                        row: r + 1,
                        col: c + 1,
                        symbol: s as usize + 1,
                    });
                }
                *slot = c as u32;
                let slot = &mut self.row_of[c * n + s as usize];
                if *slot != ABSENT {
                    return Err(ModelError::ColumnRepeat {
                        row: r + 1,
                        col: c + 1,
                        symbol: s as usize + 1,
                    });
                }
                *slot = r as u32;
            }
        }
        Ok(())
    }

    /// Rebuilds lookup tables after a mutation that is known to preserve the
    /// Latin property.
    pub(crate) fn rebuild_tables_unchecked(&mut self) {
        let result = self.rebuild_tables();
        debug_assert!(result.is_ok(), "mutation broke the Latin property: {result:?}");
        // in release builds a violation would surface as stale tables;
        // callers guarantee validity
        let _ = result;
    }
}

/// An `n × n` Latin square. Dereferences to [`LatinRectangle`] for all
/// shared accessors.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LatinSquare(LatinRectangle);

impl fmt::Debug for LatinSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl std::ops::Deref for LatinSquare {
    type Target = LatinRectangle;

    fn deref(&self) -> &LatinRectangle {
        &self.0
    }
}

impl LatinSquare {
    /// Builds a square from a row-major cell array with 0-based symbols.
    pub fn from_flat(n: usize, cells: Vec<u32>) -> Result<Self, ModelError> {
        LatinRectangle::from_flat(n, n, cells).map(LatinSquare)
    }

    /// Builds a square from 0-based symbol rows.
    pub fn from_rows(rows: &[Vec<usize>]) -> Result<Self, ModelError> {
        let rect = LatinRectangle::from_rows(rows)?;
        Self::from_rectangle(rect)
    }

    /// Wraps a rectangle that must already be square.
    pub fn from_rectangle(rect: LatinRectangle) -> Result<Self, ModelError> {
        if !rect.is_square() {
            return Err(ModelError::NotSquare { rows: rect.k, n: rect.n });
        }
        Ok(LatinSquare(rect))
    }

    /// The cyclic square `L[r][c] = (r + c) mod n`.
    ///
    /// # Panics
    /// Panics if `n == 0`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0, "order must be at least 1");
        let mut cells = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                cells.push(((r + c) % n) as u32);
            }
        }
        Self::from_flat(n, cells).expect("cyclic construction is always Latin")
    }

    /// Row holding `symbol` within `col`; total for squares.
    #[inline]
    pub fn row_of(&self, col: usize, symbol: usize) -> usize {
        self.0
            .row_with(col, symbol)
            .expect("squares hold every symbol in every column")
    }

    /// Gives up the square wrapper.
    pub fn into_rectangle(self) -> LatinRectangle {
        self.0
    }

    pub(crate) fn rect_mut(&mut self) -> &mut LatinRectangle {
        &mut self.0
    }
}

/// Read-only 0/1 incidence array `A` of a rectangle: `A[r][c][s] = 1` iff
/// cell `(r, c)` holds symbol `s`. Every axis-parallel line of a square sums
/// to 1; for a `k × n` rectangle, column-direction lines sum to `k / n`-ths
/// of that, i.e. symbol/column pairs may be absent.
pub struct IncidenceView<'a>(&'a LatinRectangle);

impl IncidenceView<'_> {
    /// The `(row, col, symbol)` entry.
    #[inline]
    pub fn entry(&self, row: usize, col: usize, symbol: usize) -> bool {
        self.0.get(row, col) == symbol
    }

    /// Resolves the unique 1 on the line `(row, col, ·)`.
    #[inline]
    pub fn symbol_at(&self, row: usize, col: usize) -> usize {
        self.0.get(row, col)
    }

    /// Resolves the unique 1 on the line `(row, ·, symbol)`.
    #[inline]
    pub fn column_with(&self, row: usize, symbol: usize) -> usize {
        self.0.column_of(row, symbol)
    }

    /// Resolves the 1 on the line `(·, col, symbol)`, if present.
    #[inline]
    pub fn row_with(&self, col: usize, symbol: usize) -> Option<usize> {
        self.0.row_with(col, symbol)
    }
}

/// A combinatorial box `I × X × Q`: row, column and symbol subsets whose
/// incidence-array restriction is counted by [`incidence_count`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceBox {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub symbols: Vec<usize>,
}

impl IncidenceBox {
    /// Validates the subsets against a rectangle's shape; each subset is
    /// sorted and deduplicated.
    pub fn new(
        l: &LatinRectangle,
        rows: Vec<usize>,
        cols: Vec<usize>,
        symbols: Vec<usize>,
    ) -> Result<Self, ModelError> {
        let check = |v: &[usize], limit: usize, what: &'static str| {
            for &i in v {
                if i >= limit {
                    return Err(ModelError::Index { what, got: i, limit });
                }
            }
            Ok(())
        };
        check(&rows, l.row_count(), "row")?;
        check(&cols, l.n(), "column")?;
        check(&symbols, l.n(), "symbol")?;
        let mut b = IncidenceBox { rows, cols, symbols };
        for v in [&mut b.rows, &mut b.cols, &mut b.symbols] {
            v.sort_unstable();
            v.dedup();
        }
        Ok(b)
    }

    /// `|I| · |X| · |Q|`.
    pub fn volume(&self) -> u64 {
        self.rows.len() as u64 * self.cols.len() as u64 * self.symbols.len() as u64
    }
}

/// Number of 1-entries of the incidence array inside the box: the count of
/// `(r, c) ∈ I × X` whose symbol lies in `Q`.
///
/// Runs in `O(min(|I||X|, |I||Q|, |X||Q|) + n)` by iterating the two cheapest
/// axes and resolving the third through a lookup table.
pub fn incidence_count(l: &LatinRectangle, t: &IncidenceBox) -> usize {
    let (ni, nx, nq) = (t.rows.len(), t.cols.len(), t.symbols.len());
    let mut count = 0usize;
    if ni * nx <= ni * nq && ni * nx <= nx * nq {
        let mut in_q = vec![false; l.n()];
        for &q in &t.symbols {
            in_q[q] = true;
        }
        for &r in &t.rows {
            for &c in &t.cols {
                if in_q[l.get(r, c)] {
                    count += 1;
                }
            }
        }
    } else if ni * nq <= nx * nq {
        let mut in_x = vec![false; l.n()];
        for &c in &t.cols {
            in_x[c] = true;
        }
        for &r in &t.rows {
            for &q in &t.symbols {
                if in_x[l.column_of(r, q)] {
                    count += 1;
                }
            }
        }
    } else {
        let mut in_i = vec![false; l.row_count()];
        for &r in &t.rows {
            in_i[r] = true;
        }
        for &c in &t.cols {
            for &q in &t.symbols {
                if let Some(r) = l.row_with(c, q) {
                    if in_i[r] {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// A permutation together with its decomposition into cycles.
///
/// The decomposition is canonical: each cycle is listed starting from its
/// smallest element, and cycles are sorted by smallest element. Fixed points
/// are kept as 1-cycles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleStructure {
    perm: Vec<u32>,
    cycles: Vec<Vec<u32>>,
    cycle_index: Vec<u32>,
    length_counts: Vec<u32>,
}

impl CycleStructure {
    /// Decomposes a permutation of `0..perm.len()`.
    pub fn from_permutation(perm: Vec<usize>) -> Result<Self, ModelError> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for (i, &v) in perm.iter().enumerate() {
            if v >= n || seen[v] {
                return Err(ModelError::NotPermutation { position: i, value: v });
            }
            seen[v] = true;
        }
        let perm: Vec<u32> = perm.into_iter().map(|v| v as u32).collect();
        Ok(Self::from_valid_perm(perm))
    }

    fn from_valid_perm(perm: Vec<u32>) -> Self {
        let n = perm.len();
        let mut cycles = Vec::new();
        let mut cycle_index = vec![0u32; n];
        let mut length_counts = vec![0u32; n + 1];
        let mut visited = vec![false; n];
        // ascending starts make every cycle begin at its minimum and list
        // the cycles sorted by minimum
        for start in 0..n {
            if visited[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start as u32;
            loop {
                visited[x as usize] = true;
                cycle_index[x as usize] = cycles.len() as u32;
                cycle.push(x);
                x = perm[x as usize];
                if x as usize == start {
                    break;
                }
            }
            length_counts[cycle.len()] += 1;
            cycles.push(cycle);
        }
        CycleStructure { perm, cycles, cycle_index, length_counts }
    }

    /// Size of the underlying ground set.
    pub fn len(&self) -> usize {
        self.perm.len()
    }

    /// True for the empty permutation.
    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Image of `x`.
    #[inline]
    pub fn image(&self, x: usize) -> usize {
        self.perm[x] as usize
    }

    /// Number of cycles (fixed points included).
    pub fn cycle_count(&self) -> usize {
        self.cycles.len()
    }

    /// Number of cycles of exactly `length` elements.
    pub fn count_of_length(&self, length: usize) -> usize {
        if length < self.length_counts.len() {
            self.length_counts[length] as usize
        } else {
            0
        }
    }

    /// The canonical cycle containing `x`.
    pub fn cycle_containing(&self, x: usize) -> &[u32] {
        &self.cycles[self.cycle_index[x] as usize]
    }

    /// Whether `a` and `b` lie on the same cycle.
    pub fn same_cycle(&self, a: usize, b: usize) -> bool {
        self.cycle_index[a] == self.cycle_index[b]
    }

    /// All cycles in canonical order.
    pub fn cycles(&self) -> impl Iterator<Item = &[u32]> {
        self.cycles.iter().map(|c| c.as_slice())
    }

    /// The elements of all 2-cycles, as ascending pairs in ascending order.
    pub fn two_cycles(&self) -> Vec<(usize, usize)> {
        self.cycles
            .iter()
            .filter(|c| c.len() == 2)
            .map(|c| (c[0] as usize, c[1] as usize))
            .collect()
    }

    /// True when no element is fixed.
    pub fn is_derangement(&self) -> bool {
        self.length_counts[1] == 0
    }

    /// Sorted cycle lengths, largest first.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut lens: Vec<usize> = self.cycles.iter().map(|c| c.len()).collect();
        lens.sort_unstable_by(|a, b| b.cmp(a));
        lens
    }

    /// 1-based cycle notation, e.g. `(1 4 5)(2 3)`.
    pub fn notation(&self) -> String {
        let mut out = String::new();
        for cycle in &self.cycles {
            out.push('(');
            for (i, &x) in cycle.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(&(x + 1).to_string());
            }
            out.push(')');
        }
        out
    }
}

/// The permutation of columns induced by a pair of distinct rows: column `x`
/// maps to the column `y` where row `i` holds the symbol that row `j` holds
/// at `x`. Always a derangement, and its 2-cycles are exactly the column
/// pairs forming an intercalate with rows `i, j`.
pub fn row_pair_cycles(
    l: &LatinRectangle,
    i: usize,
    j: usize,
) -> Result<CycleStructure, ModelError> {
    let k = l.row_count();
    if i >= k {
        return Err(ModelError::Index { what: "row", got: i, limit: k });
    }
    if j >= k || j == i {
        return Err(ModelError::Index { what: "row", got: j, limit: k });
    }
    let n = l.n();
    let perm: Vec<u32> = (0..n)
        .map(|x| l.column_of(i, l.get(j, x)) as u32)
        .collect();
    Ok(CycleStructure::from_valid_perm(perm))
}

/// The permutation of rows induced by a pair of distinct columns of a
/// square: row `i` maps to the row `j` where column `x` holds the symbol
/// that row `i` holds at `y`. Always a derangement.
pub fn column_pair_cycles(
    l: &LatinSquare,
    x: usize,
    y: usize,
) -> Result<CycleStructure, ModelError> {
    let n = l.n();
    if x >= n {
        return Err(ModelError::Index { what: "column", got: x, limit: n });
    }
    if y >= n || y == x {
        return Err(ModelError::Index { what: "column", got: y, limit: n });
    }
    let perm: Vec<u32> = (0..n)
        .map(|i| l.row_of(x, l.get(i, y)) as u32)
        .collect();
    Ok(CycleStructure::from_valid_perm(perm))
}

// ---------------------------------------------------------------------------
// interchange formats
// ---------------------------------------------------------------------------

/// Canonical text form: a header line `k n` (or `n` alone for squares),
/// then `k` rows of space-separated 1-based symbols, each line newline
/// terminated, no trailing whitespace.
pub fn to_text(l: &LatinRectangle) -> String {
    let mut out = String::new();
    if l.is_square() {
        out.push_str(&l.n().to_string());
    } else {
        out.push_str(&format!("{} {}", l.row_count(), l.n()));
    }
    out.push('\n');
    for r in 0..l.row_count() {
        for c in 0..l.n() {
            if c > 0 {
                out.push(' ');
            }
            out.push_str(&(l.get(r, c) + 1).to_string());
        }
        out.push('\n');
    }
    out
}

/// Parses the text form; both header shapes are accepted, and `k == n`
/// inputs round-trip to the square header.
pub fn parse_text(input: &str) -> Result<LatinRectangle, ModelError> {
    let mut lines = input.lines().enumerate();
    let (header_no, header) = lines
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| ModelError::Parse { line: 1, reason: "empty input".into() })?;
    let header_fields: Vec<&str> = header.split_whitespace().collect();
    let parse_dim = |tok: &str| -> Result<usize, ModelError> {
        tok.parse::<usize>().map_err(|_| ModelError::Parse {
            line: header_no + 1,
            reason: format!("expected a dimension, found {tok:?}"),
        })
    };
    let (k, n) = match header_fields.as_slice() {
        [n] => {
            let n = parse_dim(n)?;
            (n, n)
        }
        [k, n] => (parse_dim(k)?, parse_dim(n)?),
        _ => {
            return Err(ModelError::Parse {
                line: header_no + 1,
                reason: format!("expected `k n` or `n`, found {header:?}"),
            })
        }
    };
    if k == 0 || n == 0 || k > n {
        return Err(ModelError::RowCount { rows: k, n });
    }
    let mut cells = Vec::with_capacity(k * n);
    let mut row = 0usize;
    let mut last_line = header_no + 1;
    for (idx, line) in lines {
        last_line = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if row == k {
            return Err(ModelError::Parse {
                line: idx + 1,
                reason: format!("unexpected content after {k} rows"),
            });
        }
        let mut got = 0usize;
        for tok in line.split_whitespace() {
            let value: i64 = tok.parse().map_err(|_| ModelError::Parse {
                line: idx + 1,
                reason: format!("expected an integer, found {tok:?}"),
            })?;
            if value < 1 || value > n as i64 {
                return Err(ModelError::Symbol { row: row + 1, col: got + 1, value, n });
            }
            if got == n {
                return Err(ModelError::Shape { row: row + 1, got: got + 1, expected: n });
            }
            cells.push((value - 1) as u32);
            got += 1;
        }
        if got != n {
            return Err(ModelError::Shape { row: row + 1, got, expected: n });
        }
        row += 1;
    }
    if row != k {
        return Err(ModelError::Parse {
            line: last_line,
            reason: format!("expected {k} rows, found {row}"),
        });
    }
    LatinRectangle::from_flat(k, n, cells)
}

/// Parses the text form and requires a square.
pub fn parse_square_text(input: &str) -> Result<LatinSquare, ModelError> {
    LatinSquare::from_rectangle(parse_text(input)?)
}

/// Canonical multi-rectangle stream: text forms separated by single blank
/// lines.
pub fn to_text_stream<'a>(items: impl IntoIterator<Item = &'a LatinRectangle>) -> String {
    let mut out = String::new();
    for (i, l) in items.into_iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&to_text(l));
    }
    out
}

/// Parses a blank-line separated stream of text forms.
pub fn parse_text_stream(input: &str) -> Result<Vec<LatinRectangle>, ModelError> {
    let mut items = Vec::new();
    let mut block = String::new();
    for line in input.lines().chain(std::iter::once("")) {
        if line.trim().is_empty() {
            if !block.is_empty() {
                items.push(parse_text(&block)?);
                block.clear();
            }
        } else {
            block.push_str(line);
            block.push('\n');
        }
    }
    Ok(items)
}

#[derive(Serialize, Deserialize)]
struct JsonRect {
    n: usize,
    k: usize,
    rows: Vec<Vec<i64>>,
}

/// JSON form: `{"n":…,"k":…,"rows":[[…]]}` with 1-based symbols.
pub fn to_json(l: &LatinRectangle) -> String {
    let rows = (0..l.row_count())
        .map(|r| (0..l.n()).map(|c| l.get(r, c) as i64 + 1).collect())
        .collect();
    let doc = JsonRect { n: l.n(), k: l.row_count(), rows };
    serde_json::to_string(&doc).expect("plain struct serializes")
}

/// Parses the JSON form.
pub fn parse_json(input: &str) -> Result<LatinRectangle, ModelError> {
    let doc: JsonRect = serde_json::from_str(input)
        .map_err(|e| ModelError::Parse { line: e.line(), reason: e.to_string() })?;
    if doc.k != doc.rows.len() {
        return Err(ModelError::Parse {
            line: 1,
            reason: format!("k = {} but {} rows present", doc.k, doc.rows.len()),
        });
    }
    let n = doc.n;
    let mut cells = Vec::with_capacity(doc.k * n);
    for (r, row) in doc.rows.iter().enumerate() {
        if row.len() != n {
            return Err(ModelError::Shape { row: r + 1, got: row.len(), expected: n });
        }
        for (c, &value) in row.iter().enumerate() {
            if value < 1 || value > n as i64 {
                return Err(ModelError::Symbol { row: r + 1, col: c + 1, value, n });
            }
            cells.push((value - 1) as u32);
        }
    }
    LatinRectangle::from_flat(doc.k, n, cells)
}
