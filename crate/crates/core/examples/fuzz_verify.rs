//! Random change scripts checked pair by pair against breadth-first search.

use algreach::cli::{verify_fuzz, EngineChoice, RunConfig};

fn main() -> algreach::Result<()> {
    for (engine, n) in [
        (EngineChoice::Reach, 16),
        (EngineChoice::Dist, 10),
        (EngineChoice::Quotient, 6),
    ] {
        let report = verify_fuzz(n, 20, 42, &RunConfig::new(engine))?;
        let rebuilds: usize = report.steps.iter().map(|s| s.rebuilds).sum();
        println!(
            "{:>8} n={n:<3} steps={} mismatches={} rebuilds={rebuilds}",
            engine.name(),
            report.steps.len(),
            report.mismatches()
        );
    }
    Ok(())
}
