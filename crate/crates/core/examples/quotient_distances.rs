//! Distances kept as evaluations of polynomial quotients at many points,
//! recovered by interpolation.

use algreach::engine::Engine;
use algreach::graph::Graph;
use algreach::quotient::{QuotientConfig, QuotientState};

fn main() -> algreach::Result<()> {
    let n = 5;
    let g = Graph::with_edges(n, [(0, 1), (1, 2)])?;
    let config = QuotientConfig::for_n(n);
    let mut state = QuotientState::new(&g, config)?;
    println!(
        "{} points x {} primes, degree bound {}",
        state.points().len(),
        state.primes().len(),
        state.deg_bound()
    );

    for (ins, del) in [
        (vec![(2, 3), (3, 4)], vec![]),
        (vec![(0, 4)], vec![(1, 2)]),
        (vec![], vec![(0, 4)]),
    ] {
        state.apply_change(&ins, &del)?;
        let row: Vec<String> = (0..n)
            .map(|t| match state.extract_distance(0, t) {
                Ok(Some(d)) => d.to_string(),
                Ok(None) => "-".into(),
                Err(e) => e.to_string(),
            })
            .collect();
        println!(
            "+{ins:?} -{del:?}: from 0 [{}], degree bound {}, valid pairs {}",
            row.join(" "),
            state.deg_bound(),
            state.valid_pairs()
        );
    }
    Ok(())
}
