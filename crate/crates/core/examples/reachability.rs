//! Reachability under edge insertions and deletions.

use algreach::engine::Engine;
use algreach::graph::Graph;
use algreach::reach::{PrimeMode, ReachConfig, ReachState};

fn main() -> algreach::Result<()> {
    let n = 6;
    let g = Graph::with_edges(n, [(0, 1), (1, 2), (3, 4)])?;
    let mut config = ReachConfig::for_n(n);
    config.prime_mode = PrimeMode::Random { count: 4, seed: 7 };
    let mut state = ReachState::new(&g, config)?;
    println!("k = {}, epoch = {}", state.k(), state.config().epoch_len);

    let show = |s: &ReachState| -> algreach::Result<()> {
        println!(
            "  0->2 {}  0->4 {}  3->5 {}  (valid primes {})",
            s.reachable(0, 2)?,
            s.reachable(0, 4)?,
            s.reachable(3, 5)?,
            s.valid_count()
        );
        Ok(())
    };
    show(&state)?;

    state.apply_change(&[(2, 3), (4, 5)], &[])?;
    println!("after inserting 2->3 and 4->5:");
    show(&state)?;

    state.apply_change(&[], &[(1, 2)])?;
    println!("after deleting 1->2:");
    show(&state)?;
    assert!(state.check_inverses(state.pool().len()));
    Ok(())
}
