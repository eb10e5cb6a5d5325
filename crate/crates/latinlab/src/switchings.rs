//! Local surgery on Latin squares and rectangles.
//!
//! For squares, everything revolves around the permutation induced by the
//! first two rows: *turn* exchanges those rows along one of its cycles,
//! *flip* exchanges two columns along a cycle of the column-pair
//! permutation, and *join* composes the two to merge a 2-cycle (an
//! intercalate of the first two rows) into another cycle whether or not the
//! column pair starts out flippable.
//!
//! For rectangles, *rotate* cyclically shifts three symbols within one row
//! — producing a raw array that may violate the column constraint — and
//! *twist* composes two disjoint rotations so that, when a battery of
//! validity conditions holds, the result is again Latin and has exactly one
//! more intercalate than the input.
//!
//! All row/column arguments are 0-based; the operations on squares always
//! act on rows 0 and 1.

use crate::intercalates::{self, IntercalateCensus};
use crate::model::{
    column_pair_cycles, row_pair_cycles, LatinRectangle, LatinSquare, ModelError,
};
use crate::ResourceError;
use std::collections::BTreeSet;
use std::fmt;

/// A switching operation could not be applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SwitchError {
    /// The column set handed to `turn` is not a cycle of the first-two-rows
    /// permutation.
    NotACycle { columns: Vec<usize> },
    /// Rows 0 and 1 share a cycle of the column-pair permutation of
    /// `{x, y}`, so the pair cannot be flipped.
    NotFlippable { x: usize, y: usize },
    /// A join precondition failed.
    JoinPrecondition { reason: &'static str, x: usize, y: usize },
    /// A twist was rejected; the variant names the violated requirement.
    Twist(TwistViolation),
    /// An index or shape problem from the model layer.
    Model(ModelError),
}

impl fmt::Display for SwitchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SwitchError::NotACycle { columns } => {
                write!(f, "columns {columns:?} do not form a cycle of the first two rows")
            }
            SwitchError::NotFlippable { x, y } => {
                write!(f, "column pair ({}, {}) is not flippable", x + 1, y + 1)
            }
            SwitchError::JoinPrecondition { reason, x, y } => {
                write!(f, "cannot join columns ({}, {}): {reason}", x + 1, y + 1)
            }
            SwitchError::Twist(v) => write!(f, "twist rejected: {v}"),
            SwitchError::Model(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for SwitchError {}

impl From<ModelError> for SwitchError {
    fn from(e: ModelError) -> Self {
        SwitchError::Model(e)
    }
}

// ---------------------------------------------------------------------------
// turn / flip / join (squares)
// ---------------------------------------------------------------------------

/// Exchanges the contents of rows 0 and 1 within the cycle of the
/// first-two-rows permutation containing column `x`.
pub fn turn_at(l: &LatinSquare, x: usize) -> Result<LatinSquare, SwitchError> {
    if x >= l.n() {
        return Err(ModelError::Index { what: "column", got: x, limit: l.n() }.into());
    }
    let sigma = row_pair_cycles(l, 0, 1)?;
    let cycle: Vec<usize> = sigma.cycle_containing(x).iter().map(|&c| c as usize).collect();
    Ok(turn_on_cycle(l, &cycle))
}

/// Exchanges the contents of rows 0 and 1 within the given columns, which
/// must form exactly one cycle of the first-two-rows permutation.
pub fn turn(l: &LatinSquare, columns: &[usize]) -> Result<LatinSquare, SwitchError> {
    let first = *columns
        .first()
        .ok_or(SwitchError::NotACycle { columns: Vec::new() })?;
    for &c in columns {
        if c >= l.n() {
            return Err(ModelError::Index { what: "column", got: c, limit: l.n() }.into());
        }
    }
    let sigma = row_pair_cycles(l, 0, 1)?;
    let mut given: Vec<usize> = columns.to_vec();
    given.sort_unstable();
    given.dedup();
    let mut cycle: Vec<usize> =
        sigma.cycle_containing(first).iter().map(|&c| c as usize).collect();
    cycle.sort_unstable();
    if given != cycle {
        return Err(SwitchError::NotACycle { columns: columns.to_vec() });
    }
    Ok(turn_on_cycle(l, &cycle))
}

fn turn_on_cycle(l: &LatinSquare, cycle: &[usize]) -> LatinSquare {
    let mut out = l.clone();
    let n = out.n();
    let rect = out.rect_mut();
    let cells = rect.cells_mut();
    for &c in cycle {
        cells.swap(c, n + c);
    }
    // the two rows trade the same symbol set along a cycle, so the result
    // is Latin again
    rect.rebuild_tables_unchecked();
    out
}

/// Whether `{x, y}` is a flippable pair: rows 0 and 1 lie on different
/// cycles of the column-pair permutation.
pub fn is_flippable(l: &LatinSquare, x: usize, y: usize) -> Result<bool, SwitchError> {
    let tau = column_pair_cycles(l, x, y)?;
    Ok(!tau.same_cycle(0, 1))
}

/// Exchanges columns `x` and `y` within every row of the cycle of the
/// column-pair permutation containing row 1.
pub fn flip(l: &LatinSquare, x: usize, y: usize) -> Result<LatinSquare, SwitchError> {
    let tau = column_pair_cycles(l, x, y)?;
    if tau.same_cycle(0, 1) {
        return Err(SwitchError::NotFlippable { x, y });
    }
    let c2: Vec<usize> = tau.cycle_containing(1).iter().map(|&r| r as usize).collect();
    let mut out = l.clone();
    let n = out.n();
    let rect = out.rect_mut();
    let cells = rect.cells_mut();
    for &r in &c2 {
        cells.swap(r * n + x, r * n + y);
    }
    rect.rebuild_tables_unchecked();
    Ok(out)
}

/// Which kind of join was performed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum JoinKind {
    /// `x` on a longer cycle: the first-two-rows 2-cycle count drops by 1.
    Single,
    /// `x` on another 2-cycle: the count drops by 2.
    Double,
}

/// Result of a [`join`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinOutcome {
    pub result: LatinSquare,
    pub kind: JoinKind,
    /// Whether the pair had to be made flippable by a preparatory turn
    /// through the cycle of `y`.
    pub used_turn: bool,
}

/// Merges the 2-cycle through `y` into the cycle through `x`: flips
/// `{x, y}` directly when flippable, otherwise turns through the cycle of
/// `y` first (which toggles flippability without disturbing the
/// permutation) and then flips.
pub fn join(l: &LatinSquare, x: usize, y: usize) -> Result<JoinOutcome, SwitchError> {
    let sigma = row_pair_cycles(l, 0, 1)?;
    if x >= l.n() {
        return Err(ModelError::Index { what: "column", got: x, limit: l.n() }.into());
    }
    if y >= l.n() || y == x {
        return Err(ModelError::Index { what: "column", got: y, limit: l.n() }.into());
    }
    if sigma.same_cycle(x, y) {
        return Err(SwitchError::JoinPrecondition {
            reason: "columns lie on the same cycle",
            x,
            y,
        });
    }
    if sigma.cycle_containing(y).len() != 2 {
        return Err(SwitchError::JoinPrecondition {
            reason: "second column must lie on a 2-cycle",
            x,
            y,
        });
    }
    let kind = if sigma.cycle_containing(x).len() == 2 {
        JoinKind::Double
    } else {
        JoinKind::Single
    };
    let (result, used_turn) = if is_flippable(l, x, y)? {
        (flip(l, x, y)?, false)
    } else {
        let turned = turn_at(l, y)?;
        debug_assert!(is_flippable(&turned, x, y).unwrap(), "turn must toggle flippability");
        (flip(&turned, x, y)?, true)
    };
    #[cfg(debug_assertions)]
    {
        let before = sigma.count_of_length(2);
        let after = row_pair_cycles(&result, 0, 1).unwrap().count_of_length(2);
        let drop = match kind {
            JoinKind::Single => 1,
            JoinKind::Double => 2,
        };
        debug_assert_eq!(before - drop, after, "join changed the 2-cycle count wrongly");
    }
    Ok(JoinOutcome { result, kind, used_turn })
}

/// All `(x, y)` choices for a single join: `x` on a cycle of length ≥ 3,
/// `y` on a 2-cycle, in lexicographic order. The count is always
/// `(n − 2·X₂)·2·X₂` for `X₂` 2-cycles.
pub fn single_join_choices(l: &LatinSquare) -> Vec<(usize, usize)> {
    let sigma = row_pair_cycles(l, 0, 1).expect("squares have ≥ 2 rows");
    let twos: Vec<usize> = sigma
        .two_cycles()
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .collect();
    let mut out = Vec::new();
    for x in 0..l.n() {
        if sigma.cycle_containing(x).len() == 2 {
            continue;
        }
        for &y in &twos {
            out.push((x, y));
        }
    }
    out.sort_unstable();
    out
}

/// All ordered `(x, y)` choices for a double join: two columns on distinct
/// 2-cycles, in lexicographic order. The count is `2·X₂·(2·X₂ − 2)`.
pub fn double_join_choices(l: &LatinSquare) -> Vec<(usize, usize)> {
    let sigma = row_pair_cycles(l, 0, 1).expect("squares have ≥ 2 rows");
    let twos: Vec<usize> = sigma
        .two_cycles()
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .collect();
    let mut out = Vec::new();
    for &x in &twos {
        for &y in &twos {
            if !sigma.same_cycle(x, y) {
                out.push((x, y));
            }
        }
    }
    out.sort_unstable();
    out
}

/// A square that joins to the target, together with the join choice that
/// gets there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinPredecessor {
    pub source: LatinSquare,
    pub x: usize,
    pub y: usize,
    pub used_turn: bool,
}

/// All squares that reach `target` by a single join. For each column `x`
/// on a cycle of length ≥ 5 the candidate pair is `y = σ²(x)`; undoing the
/// flip and optionally the turn yields at most two candidate sources per
/// `x`, each verified by replaying the join.
pub fn single_join_predecessors(target: &LatinSquare) -> Vec<JoinPredecessor> {
    join_predecessors(target, JoinKind::Single)
}

/// All squares that reach `target` by a double join; candidates come from
/// columns on 4-cycles.
pub fn double_join_predecessors(target: &LatinSquare) -> Vec<JoinPredecessor> {
    join_predecessors(target, JoinKind::Double)
}

fn join_predecessors(target: &LatinSquare, kind: JoinKind) -> Vec<JoinPredecessor> {
    let sigma = row_pair_cycles(target, 0, 1).expect("squares have ≥ 2 rows");
    let mut out = Vec::new();
    for x in 0..target.n() {
        let len = sigma.cycle_containing(x).len();
        let eligible = match kind {
            JoinKind::Single => len > 4,
            JoinKind::Double => len == 4,
        };
        if !eligible {
            continue;
        }
        let y = sigma.image(sigma.image(x));
        if !is_flippable(target, x, y).unwrap_or(false) {
            continue;
        }
        let unflipped = flip(target, x, y).expect("flippability just checked");
        let mut candidates = vec![unflipped.clone()];
        if let Ok(turned) = turn_at(&unflipped, y) {
            candidates.push(turned);
        }
        for source in candidates {
            match join(&source, x, y) {
                Ok(outcome) if outcome.result == *target && outcome.kind == kind => {
                    out.push(JoinPredecessor {
                        source,
                        x,
                        y,
                        used_turn: outcome.used_turn,
                    });
                }
                _ => {}
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// rotate / twist (rectangles)
// ---------------------------------------------------------------------------

/// A rectangle-shaped symbol array that may violate the column constraint.
///
/// This is the deliberate output type of [`rotate`]: rotations keep every
/// row a permutation but can repeat a symbol within a column. A raw array
/// must pass [`RawRectangle::validate`] to become a [`LatinRectangle`]
/// again; [`twist`] is the only operation in the crate that consumes raw
/// arrays directly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRectangle {
    k: usize,
    n: usize,
    cells: Vec<u32>,
}

impl RawRectangle {
    pub fn from_rectangle(l: &LatinRectangle) -> Self {
        RawRectangle { k: l.row_count(), n: l.n(), cells: l.flat_cells().to_vec() }
    }

    pub fn row_count(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> usize {
        assert!(row < self.k && col < self.n, "cell ({row},{col}) out of range");
        self.cells[row * self.n + col] as usize
    }

    /// Cyclically shifts the symbols of `row` on the columns of the
    /// ordered triple `(x, y, z)`: position `x` receives the symbol from
    /// `z`, `y` from `x`, and `z` from `y`.
    ///
    /// # Panics
    /// Panics unless the three columns are distinct and in range.
    pub fn rotate_row(&mut self, row: usize, triple: (usize, usize, usize)) {
        let (x, y, z) = triple;
        assert!(row < self.k, "row {row} out of range");
        assert!(x < self.n && y < self.n && z < self.n, "triple column out of range");
        assert!(x != y && y != z && x != z, "triple columns must be distinct");
        let base = row * self.n;
        let old_x = self.cells[base + x];
        self.cells[base + x] = self.cells[base + z];
        self.cells[base + z] = self.cells[base + y];
        self.cells[base + y] = old_x;
    }

    /// Whether the array currently satisfies the Latin property.
    pub fn is_latin(&self) -> bool {
        self.validate().is_ok()
    }

    /// Re-checks the Latin property and converts back to a validated
    /// rectangle.
    pub fn validate(&self) -> Result<LatinRectangle, ModelError> {
        LatinRectangle::from_flat(self.k, self.n, self.cells.clone())
    }
}

/// Applies one rotation to a validated rectangle, yielding a raw array.
pub fn rotate(l: &LatinRectangle, row: usize, triple: (usize, usize, usize)) -> RawRectangle {
    let mut raw = RawRectangle::from_rectangle(l);
    raw.rotate_row(row, triple);
    raw
}

/// A twist: one row and two ordered column triples with disjoint supports.
/// The two rotations commute, so the pair of triples is semantically
/// unordered; [`TwistChoice::canonical`] fixes a representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TwistChoice {
    pub row: usize,
    pub first: (usize, usize, usize),
    pub second: (usize, usize, usize),
}

impl TwistChoice {
    /// Orders the two triples lexicographically.
    pub fn canonical(self) -> Self {
        if self.second < self.first {
            TwistChoice { row: self.row, first: self.second, second: self.first }
        } else {
            self
        }
    }
}

/// Why a twist was rejected. Variants appear in validation order; all
/// coordinates are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwistViolation {
    RowOutOfRange { row: usize, limit: usize },
    ColumnOutOfRange { col: usize, limit: usize },
    /// The six triple columns are not pairwise distinct.
    ColumnsNotDistinct,
    /// The input rectangle already has a row above the intercalate cap.
    SourceNotGood { row: usize, count: u64, cap: u64 },
    /// A rotation repeated `symbol` within `col`; `row` is the lower of
    /// the clashing cells.
    NotLatin { row: usize, col: usize, symbol: usize },
    /// The result has a row above the intercalate cap.
    ResultNotGood { row: usize, count: u64, cap: u64 },
    /// A touched position of the chosen row already lies in an intercalate
    /// of the input.
    PreexistingIntercalate { col: usize },
    /// One of the four non-target positions lies in an intercalate of the
    /// result.
    StrayIntercalate { col: usize },
    /// No intercalate joining the two target positions was created.
    MissingNewIntercalate,
    /// A target position lies in more than the one created intercalate.
    ExtraIntercalateAtTarget { col: usize },
}

impl fmt::Display for TwistViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TwistViolation::RowOutOfRange { row, limit } => {
                write!(f, "row {row} out of range (limit {limit})")
            }
            TwistViolation::ColumnOutOfRange { col, limit } => {
                write!(f, "column {col} out of range (limit {limit})")
            }
            TwistViolation::ColumnsNotDistinct => {
                write!(f, "the six triple columns must be pairwise distinct")
            }
            TwistViolation::SourceNotGood { row, count, cap } => {
                write!(f, "input row {row} lies in {count} intercalates, above the cap {cap}")
            }
            TwistViolation::NotLatin { row, col, symbol } => {
                write!(f, "result repeats symbol {symbol} in column {col} (row {row})")
            }
            TwistViolation::ResultNotGood { row, count, cap } => {
                write!(f, "result row {row} lies in {count} intercalates, above the cap {cap}")
            }
            TwistViolation::PreexistingIntercalate { col } => {
                write!(f, "input already has an intercalate through the chosen row at column {col}")
            }
            TwistViolation::StrayIntercalate { col } => {
                write!(f, "result has a stray intercalate through the chosen row at column {col}")
            }
            TwistViolation::MissingNewIntercalate => {
                write!(f, "no intercalate joins the two target positions in the result")
            }
            TwistViolation::ExtraIntercalateAtTarget { col } => {
                write!(f, "target column {col} lies in more than the created intercalate")
            }
        }
    }
}

/// Number of intercalates involving position `(row, col)`.
fn position_intercalates(l: &LatinRectangle, row: usize, col: usize) -> usize {
    let mut count = 0;
    for j in 0..l.row_count() {
        if j == row {
            continue;
        }
        let w = l.column_of(row, l.get(j, col));
        if w != col && l.get(j, w) == l.get(row, col) {
            count += 1;
        }
    }
    count
}

/// Applies a twist: both rotations of `choice` on its row, then the full
/// battery of validity checks. On success the result is a Latin rectangle
/// with exactly one more intercalate than the input — the new one joins
/// the two leading triple columns in the chosen row.
///
/// `cap` is the goodness bound: no row of the input or the result may lie
/// in more than `cap` intercalates.
///
/// Checks run in a fixed order (structure, input goodness, Latin property,
/// result goodness, touched positions clean in the input, non-target
/// positions clean in the result, exactly one new intercalate across the
/// targets), and the first failure is reported.
pub fn twist(
    l: &LatinRectangle,
    choice: &TwistChoice,
    cap: u64,
) -> Result<LatinRectangle, SwitchError> {
    twist_checked(l, &intercalates::census(l), choice, cap).map_err(SwitchError::Twist)
}

/// Twist with a precomputed census of `l` (enumeration hot path).
pub(crate) fn twist_checked(
    l: &LatinRectangle,
    source_census: &IntercalateCensus,
    choice: &TwistChoice,
    cap: u64,
) -> Result<LatinRectangle, TwistViolation> {
    let k = l.row_count();
    let n = l.n();
    let i = choice.row;
    let (x, y, z) = choice.first;
    let (x2, y2, z2) = choice.second;
    if i >= k {
        return Err(TwistViolation::RowOutOfRange { row: i, limit: k });
    }
    let cols = [x, y, z, x2, y2, z2];
    for &c in &cols {
        if c >= n {
            return Err(TwistViolation::ColumnOutOfRange { col: c, limit: n });
        }
    }
    for a in 0..6 {
        for b in a + 1..6 {
            if cols[a] == cols[b] {
                return Err(TwistViolation::ColumnsNotDistinct);
            }
        }
    }
    for (r, &count) in source_census.per_row.iter().enumerate() {
        if count > cap {
            return Err(TwistViolation::SourceNotGood { row: r, count, cap });
        }
    }
    let mut raw = RawRectangle::from_rectangle(l);
    raw.rotate_row(i, (x2, y2, z2));
    raw.rotate_row(i, (x, y, z));
    let result = raw.validate().map_err(|e| match e {
        // rotations keep rows permutations; only column repeats can appear
        ModelError::ColumnRepeat { row, col, symbol } => {
            TwistViolation::NotLatin { row: row - 1, col: col - 1, symbol: symbol - 1 }
        }
        other => unreachable!("unexpected rotation failure: {other}"),
    })?;
    // goodness of the result, incrementally: only pairs through row i move
    let mut result_row_i = 0u64;
    for r in 0..k {
        if r == i {
            continue;
        }
        let before = intercalates::two_row_count(l, i, r) as u64;
        let after = intercalates::two_row_count(&result, i, r) as u64;
        result_row_i += after;
        let total = source_census.per_row[r] - before + after;
        if total > cap {
            return Err(TwistViolation::ResultNotGood { row: r, count: total, cap });
        }
    }
    if result_row_i > cap {
        return Err(TwistViolation::ResultNotGood { row: i, count: result_row_i, cap });
    }
    // all six touched positions must be intercalate-free in the input
    for &c in &[y, z, y2, z2, x, x2] {
        if position_intercalates(l, i, c) > 0 {
            return Err(TwistViolation::PreexistingIntercalate { col: c });
        }
    }
    // the four non-target positions must stay intercalate-free
    for &c in &[y, z, y2, z2] {
        if position_intercalates(&result, i, c) > 0 {
            return Err(TwistViolation::StrayIntercalate { col: c });
        }
    }
    // exactly one new intercalate, spanning both targets
    let spans_both = (0..k).any(|j| {
        j != i && result.get(i, x) == result.get(j, x2) && result.get(i, x2) == result.get(j, x)
    });
    if !spans_both {
        return Err(TwistViolation::MissingNewIntercalate);
    }
    if position_intercalates(&result, i, x) > 1 {
        return Err(TwistViolation::ExtraIntercalateAtTarget { col: x });
    }
    if position_intercalates(&result, i, x2) > 1 {
        return Err(TwistViolation::ExtraIntercalateAtTarget { col: x2 });
    }
    debug_assert_eq!(
        intercalates::census(&result).total,
        source_census.total + 1,
        "a valid twist adds exactly one intercalate"
    );
    Ok(result)
}

/// Exact set of valid twists from `l`, canonicalized and sorted.
///
/// Candidates are generated structurally: for each ordered row pair
/// `(i, j)` and target columns `(x, x')`, the third columns of both
/// triples are forced by the requirement that the new intercalate pairs
/// rows `i` and `j` across `x` and `x'`; only `y` and `y'` remain free.
/// Every generated candidate is validated by [`twist`]'s checks. Each
/// candidate tuple costs one budget node.
pub fn forward_twist_choices(
    l: &LatinRectangle,
    cap: u64,
    budget: Option<u64>,
) -> Result<Vec<TwistChoice>, ResourceError> {
    let budget = crate::resolve_budget(budget);
    let mut nodes = 0u64;
    let k = l.row_count();
    let n = l.n();
    let census = intercalates::census(l);
    let mut found: BTreeSet<TwistChoice> = BTreeSet::new();
    for i in 0..k {
        for j in 0..k {
            if j == i {
                continue;
            }
            for x in 0..n {
                for x2 in 0..n {
                    if x2 == x {
                        continue;
                    }
                    nodes += 1;
                    if nodes > budget {
                        return Err(ResourceError { task: "twist candidates", budget });
                    }
                    // force the intercalate on rows {i, j}, columns {x, x'}
                    let z2 = l.column_of(i, l.get(j, x));
                    let z = l.column_of(i, l.get(j, x2));
                    if z == z2 || [x, x2].contains(&z) || [x, x2].contains(&z2) {
                        continue;
                    }
                    for yc in 0..n {
                        if [x, x2, z, z2].contains(&yc) {
                            continue;
                        }
                        for y2 in 0..n {
                            if yc == y2 || [x, x2, z, z2].contains(&y2) {
                                continue;
                            }
                            nodes += 1;
                            if nodes > budget {
                                return Err(ResourceError {
                                    task: "twist candidates",
                                    budget,
                                });
                            }
                            let choice = TwistChoice {
                                row: i,
                                first: (x, yc, z),
                                second: (x2, y2, z2),
                            }
                            .canonical();
                            if found.contains(&choice) {
                                continue;
                            }
                            if twist_checked(l, &census, &choice, cap).is_ok() {
                                found.insert(choice);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(found.into_iter().collect())
}

/// All `(choice, source)` pairs whose twist yields `target`: for each
/// intercalate of the target and each of its two rows, the target columns
/// are fixed and all ordered `(y, z, y', z')` column tuples are tried by
/// rotating backwards and replaying the twist. The pair count is bounded
/// by `2·s·n⁴` for `s` intercalates.
pub fn backward_twist_sources(
    target: &LatinRectangle,
    cap: u64,
    budget: Option<u64>,
) -> Result<Vec<(TwistChoice, LatinRectangle)>, ResourceError> {
    let budget = crate::resolve_budget(budget);
    let mut nodes = 0u64;
    let n = target.n();
    let mut out = Vec::new();
    for witness in intercalates::witnesses(target) {
        let (x, x2) = witness.cols;
        for i in [witness.rows.0, witness.rows.1] {
            let free: Vec<usize> = (0..n).filter(|c| *c != x && *c != x2).collect();
            for &yc in &free {
                for &z in &free {
                    if z == yc {
                        continue;
                    }
                    for &y2 in &free {
                        if y2 == yc || y2 == z {
                            continue;
                        }
                        for &z2 in &free {
                            if z2 == yc || z2 == z || z2 == y2 {
                                continue;
                            }
                            nodes += 1;
                            if nodes > budget {
                                return Err(ResourceError {
                                    task: "backward twist candidates",
                                    budget,
                                });
                            }
                            // undo both rotations (inverse triples)
                            let mut raw = RawRectangle::from_rectangle(target);
                            raw.rotate_row(i, (x, z, yc));
                            raw.rotate_row(i, (x2, z2, y2));
                            let Ok(source) = raw.validate() else { continue };
                            let choice = TwistChoice {
                                row: i,
                                first: (x, yc, z),
                                second: (x2, y2, z2),
                            }
                            .canonical();
                            match twist(&source, &choice, cap) {
                                Ok(result) if result == *target => {
                                    out.push((choice, source));
                                }
                                _ => {}
                            }
                        }
                    }
                }
            }
        }
    }
    let s = intercalates::census(target).total;
    let bound = 2 * s * (n as u64).pow(4);
    assert!(
        out.len() as u64 <= bound,
        "backward twist count {} exceeds its bound {bound}",
        out.len()
    );
    Ok(out)
}

// ---------------------------------------------------------------------------
// invariant audit
// ---------------------------------------------------------------------------

/// A failed switching-calculus invariant on a specific square.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantViolation {
    /// Which invariant broke (a stable machine-readable name).
    pub check: &'static str,
    /// Human-readable specifics: the columns involved and what was seen.
    pub detail: String,
}

impl fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.check, self.detail)
    }
}

impl std::error::Error for InvariantViolation {}

/// Work done by a successful [`verify_switching_invariants`] run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SwitchingAudit {
    pub pairs_checked: u64,
    pub flips_checked: u64,
    pub single_joins: u64,
    pub double_joins: u64,
}

/// Exhaustively audits the switching calculus on one square:
///
/// * the first-two-rows permutation is a derangement;
/// * turning through a 2-cycle preserves the permutation, and turning
///   twice restores the square;
/// * for every column pair on distinct cycles, turning through either
///   column's cycle toggles flippability;
/// * every flip merges exactly the two cycles involved (an α-cycle and a
///   β-cycle become one (α+β)-cycle, all others untouched), flipping again
///   restores the square, and when the second column sat on a 2-cycle the
///   merged permutation squares the first column onto the second;
/// * the single-join choices number `2X₂(n−2X₂)` and produce that many
///   distinct squares, each dropping the 2-cycle count by exactly 1 into a
///   merged cycle longer than 4; double joins drop it by 2 into a 4-cycle,
///   and distinct double-join results number at least `2X₂(X₂−1)`;
/// * join sources recovered from this square as a target replay exactly,
///   and number at most twice the columns on cycles longer than 4 (single)
///   or twice the columns on 4-cycles (double).
pub fn verify_switching_invariants(
    l: &LatinSquare,
) -> Result<SwitchingAudit, InvariantViolation> {
    let n = l.n();
    let mut audit = SwitchingAudit::default();
    let fail = |check: &'static str, detail: String| Err(InvariantViolation { check, detail });
    let sigma = row_pair_cycles(l, 0, 1).map_err(|e| InvariantViolation {
        check: "first-two-rows permutation",
        detail: e.to_string(),
    })?;
    if !sigma.is_derangement() {
        return fail("derangement", format!("fixed point in {}", sigma.notation()));
    }
    // turns through 2-cycles
    for &(a, b) in &sigma.two_cycles() {
        let turned = turn(l, &[a, b]).expect("2-cycles are cycles");
        let sigma_after = row_pair_cycles(&turned, 0, 1).unwrap();
        if sigma_after != sigma {
            return fail(
                "two-cycle turn preserves the permutation",
                format!("turn through ({a},{b}) changed σ to {}", sigma_after.notation()),
            );
        }
        if turn(&turned, &[a, b]).expect("cycle survives") != *l {
            return fail("turn involution", format!("double turn through ({a},{b}) moved"));
        }
    }
    // pair-by-pair: toggling, merging, involution, squaring
    for x in 0..n {
        for y in x + 1..n {
            if sigma.same_cycle(x, y) {
                continue;
            }
            audit.pairs_checked += 1;
            let before = is_flippable(l, x, y).expect("in range");
            for column in [x, y] {
                let turned = turn_at(l, column).expect("in range");
                let after = is_flippable(&turned, x, y).expect("in range");
                if after == before {
                    return fail(
                        "turn toggles flippability",
                        format!("pair ({x},{y}) unchanged by turn through column {column}"),
                    );
                }
            }
            if !before {
                continue;
            }
            audit.flips_checked += 1;
            let flipped = flip(l, x, y).expect("flippable");
            let merged = row_pair_cycles(&flipped, 0, 1).unwrap();
            let alpha = sigma.cycle_containing(x).len();
            let beta = sigma.cycle_containing(y).len();
            if !merged.same_cycle(x, y) || merged.cycle_containing(x).len() != alpha + beta {
                return fail(
                    "flip merges the two cycles",
                    format!(
                        "pair ({x},{y}): lengths {alpha}+{beta}, merged {}",
                        merged.cycle_containing(x).len()
                    ),
                );
            }
            // all untouched cycles survive as-is
            let untouched_ok = sigma
                .cycles()
                .filter(|cycle| {
                    let lead = cycle[0] as usize;
                    !sigma.same_cycle(lead, x) && !sigma.same_cycle(lead, y)
                })
                .all(|cycle| {
                    cycle.iter().all(|&c| merged.image(c as usize) == sigma.image(c as usize))
                });
            if !untouched_ok {
                return fail(
                    "flip leaves other cycles untouched",
                    format!("pair ({x},{y}) disturbed an uninvolved cycle"),
                );
            }
            if flip(&flipped, x, y).expect("flip stays flippable") != *l {
                return fail("flip involution", format!("double flip of ({x},{y}) moved"));
            }
            if beta == 2 && merged.image(merged.image(x)) != y {
                return fail(
                    "merged permutation squares x onto y",
                    format!("pair ({x},{y}): σ'²({x}) = {}", merged.image(merged.image(x))),
                );
            }
        }
    }
    // join counting
    let x2 = sigma.count_of_length(2) as u64;
    let singles = single_join_choices(l);
    if singles.len() as u64 != 2 * x2 * (n as u64 - 2 * x2) {
        return fail(
            "single-join choice count",
            format!("{} choices, expected 2·{x2}·({n}−2·{x2})", singles.len()),
        );
    }
    let mut single_results = BTreeSet::new();
    for &(x, y) in &singles {
        audit.single_joins += 1;
        let outcome = join(l, x, y).expect("choice is joinable");
        if outcome.kind != JoinKind::Single {
            return fail("single-join kind", format!("({x},{y}) reported {:?}", outcome.kind));
        }
        let after = row_pair_cycles(&outcome.result, 0, 1).unwrap();
        if after.count_of_length(2) + 1 != sigma.count_of_length(2)
            || after.cycle_containing(x).len() <= 4
        {
            return fail(
                "single join merges into a long cycle",
                format!("({x},{y}) left {} 2-cycles", after.count_of_length(2)),
            );
        }
        single_results.insert(outcome.result.flat_cells().to_vec());
    }
    if single_results.len() != singles.len() {
        return fail(
            "single-join results distinct",
            format!("{} choices, {} distinct squares", singles.len(), single_results.len()),
        );
    }
    let mut double_results = BTreeSet::new();
    for &(x, y) in &double_join_choices(l) {
        audit.double_joins += 1;
        let outcome = join(l, x, y).expect("choice is joinable");
        let after = row_pair_cycles(&outcome.result, 0, 1).unwrap();
        if outcome.kind != JoinKind::Double
            || after.count_of_length(2) + 2 != sigma.count_of_length(2)
            || after.cycle_containing(x).len() != 4
        {
            return fail(
                "double join merges into a 4-cycle",
                format!("({x},{y}): {:?}, {} 2-cycles", outcome.kind, after.count_of_length(2)),
            );
        }
        double_results.insert(outcome.result.flat_cells().to_vec());
    }
    if x2 >= 1 && (double_results.len() as u64) < 2 * x2 * (x2 - 1) {
        return fail(
            "distinct double-join results",
            format!("{} results, expected ≥ 2·{x2}·({x2}−1)", double_results.len()),
        );
    }
    // predecessor bounds, treating this square as the join target
    let long_columns: u64 = (0..n)
        .filter(|&c| sigma.cycle_containing(c).len() > 4)
        .count() as u64;
    let four_columns: u64 =
        (0..n).filter(|&c| sigma.cycle_containing(c).len() == 4).count() as u64;
    let single_preds = single_join_predecessors(l);
    if single_preds.len() as u64 > 2 * long_columns {
        return fail(
            "single-join predecessor bound",
            format!("{} predecessors, bound 2·{long_columns}", single_preds.len()),
        );
    }
    let double_preds = double_join_predecessors(l);
    if double_preds.len() as u64 > 2 * four_columns {
        return fail(
            "double-join predecessor bound",
            format!("{} predecessors, bound 2·{four_columns}", double_preds.len()),
        );
    }
    for p in single_preds.iter().chain(&double_preds) {
        let replay = join(&p.source, p.x, p.y).expect("recovered source joins");
        if replay.result != *l {
            return fail(
                "predecessor replay",
                format!("source via ({},{}) does not reach the target", p.x, p.y),
            );
        }
    }
    Ok(audit)
}

/// Draws random twist choices from `l` until one is accepted, using the
/// same structural recipe as [`forward_twist_choices`]; `None` after
/// `attempts` rejections.
pub fn random_twist(
    l: &LatinRectangle,
    cap: u64,
    rng: &mut impl rand::Rng,
    attempts: u32,
) -> Option<(TwistChoice, LatinRectangle)> {
    let k = l.row_count();
    let n = l.n();
    if k < 2 || n < 6 {
        return None;
    }
    let census = intercalates::census(l);
    for _ in 0..attempts {
        let i = rng.random_range(0..k);
        let j = {
            let r = rng.random_range(0..k - 1);
            if r >= i {
                r + 1
            } else {
                r
            }
        };
        let x = rng.random_range(0..n);
        let x2 = {
            let r = rng.random_range(0..n - 1);
            if r >= x {
                r + 1
            } else {
                r
            }
        };
        let z2 = l.column_of(i, l.get(j, x));
        let z = l.column_of(i, l.get(j, x2));
        let mut taken = [x, x2, z, z2, 0, 0];
        if z == z2 || [x, x2].contains(&z) || [x, x2].contains(&z2) {
            continue;
        }
        let yc = rng.random_range(0..n);
        if taken[..4].contains(&yc) {
            continue;
        }
        taken[4] = yc;
        let y2 = rng.random_range(0..n);
        if taken[..5].contains(&y2) {
            continue;
        }
        let choice =
            TwistChoice { row: i, first: (x, yc, z), second: (x2, y2, z2) }.canonical();
        if let Ok(result) = twist_checked(l, &census, &choice, cap) {
            return Some((choice, result));
        }
    }
    None
}
