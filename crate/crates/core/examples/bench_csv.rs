//! Incremental updates against recomputation, as CSV on stdout.

use std::io;

use algreach::cli::{bench, EngineChoice, RunConfig};

fn main() -> algreach::Result<()> {
    let sizes: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let sizes = if sizes.is_empty() {
        vec![32, 64]
    } else {
        sizes
    };
    bench(
        &sizes,
        5,
        &RunConfig::new(EngineChoice::Reach),
        &mut io::stdout().lock(),
    )
}
