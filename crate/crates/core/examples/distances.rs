//! Shortest-path distances from truncated walk-count series.

use algreach::dist::{DistConfig, DistState};
use algreach::engine::Engine;
use algreach::graph::Graph;

fn print_row(s: &DistState, from: usize) -> algreach::Result<()> {
    let row: Vec<String> = (0..s.n())
        .map(|t| match s.distance(from, t) {
            Ok(Some(d)) => d.to_string(),
            Ok(None) => "-".into(),
            Err(e) => e.to_string(),
        })
        .collect();
    println!("  from {from}: {}", row.join(" "));
    Ok(())
}

fn main() -> algreach::Result<()> {
    let n = 5;
    let g = Graph::with_edges(n, [(0, 1), (1, 2), (2, 3), (3, 4)])?;
    let mut state = DistState::new(&g, DistConfig::for_n(n))?;
    println!("pool of {} primes", state.pool().len());
    print_row(&state, 0)?;

    state.apply_change(&[(0, 3)], &[])?;
    println!("shortcut 0->3:");
    print_row(&state, 0)?;

    let p = state.pool().prime(0);
    println!(
        "walks 0->4 of length 2: {}",
        state.walk_count_mod(0, 4, 2, p)?.value()
    );

    state.apply_change(&[], &[(3, 4)])?;
    println!("cut 3->4:");
    print_row(&state, 0)?;
    Ok(())
}
