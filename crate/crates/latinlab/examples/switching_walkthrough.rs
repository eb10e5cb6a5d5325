//! Walks one square through the switching moves: inspect the first-two-rows
//! cycle structure, turn a cycle, flip a column pair, then join a 2-cycle
//! into a longer one, printing the square and its cycles after each move.
//!
//! ```text
//! cargo run --example switching_walkthrough
//! ```

use latinlab::model::{row_pair_cycles, LatinSquare};
use latinlab::switchings::{flip, is_flippable, join, single_join_choices, turn_at, JoinKind};

fn show(title: &str, l: &LatinSquare) {
    let sigma = row_pair_cycles(l, 0, 1).expect("two rows");
    println!("{title}:");
    print!("{}", latinlab::model::to_text(l));
    println!("  rows 1,2 cycles: {}", sigma.notation());
    println!(
        "  2-cycles (intercalates of that row pair): {}",
        sigma.count_of_length(2)
    );
    println!();
}

fn main() {
    // a 5×5 square whose first two rows split into a 3-cycle and a 2-cycle
    let l = LatinSquare::from_rows(&[
        vec![0, 4, 2, 3, 1],
        vec![3, 2, 4, 1, 0],
        vec![1, 0, 3, 4, 2],
        vec![2, 3, 1, 0, 4],
        vec![4, 1, 0, 2, 3],
    ])
    .expect("rows form a Latin square");
    show("start", &l);

    // a turn swaps the first two rows along one cycle; turning a 2-cycle
    // rewrites two cells without changing the cycle structure at all
    let turned = turn_at(&l, 1).expect("column in range");
    show("after turning the cycle through column 2", &turned);

    // a flip swaps two columns along the row cycle through row 2, merging
    // their σ-cycles into one of the combined length
    assert!(is_flippable(&turned, 0, 2).expect("columns in range"));
    let flipped = flip(&turned, 0, 2).expect("flippable pair");
    show("after flipping columns 1 and 3", &flipped);

    // a join picks a column off a 2-cycle and absorbs that 2-cycle into a
    // longer cycle, removing an intercalate of the first row pair
    let choices = single_join_choices(&l);
    println!(
        "single joins available on the start square: {} (choices {:?})",
        choices.len(),
        choices.iter().map(|&(x, y)| (x + 1, y + 1)).collect::<Vec<_>>()
    );
    let &(x, y) = choices.first().expect("the start square has a 2-cycle");
    let outcome = join(&l, x, y).expect("preconditions checked by the chooser");
    assert_eq!(outcome.kind, JoinKind::Single);
    println!(
        "joining columns {} and {} (preparatory turn: {})",
        x + 1,
        y + 1,
        outcome.used_turn
    );
    println!();
    show("after the join", &outcome.result);
}
