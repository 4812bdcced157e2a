//! Graph files and change scripts, replayed against each engine.

use algreach::cli::{parse_graph, parse_script, run_script, EngineChoice, RunConfig};

const GRAPH: &str = "\
# a 4-cycle missing one edge
4 3
1 2
2 3
3 4
";

const SCRIPT: &str = "\
+ 4 1
step
- 2 3
+ 1 3
step
? reach 4 3
? dist 4 3
? dist 2 4
";

fn main() -> algreach::Result<()> {
    let g = parse_graph(GRAPH)?;
    let script = parse_script(SCRIPT, g.n())?;
    for engine in [EngineChoice::Dist, EngineChoice::Quotient] {
        let report = run_script(&g, &script, &RunConfig::new(engine))?;
        println!("[{}]", engine.name());
        for rec in &report.steps {
            let answers: Vec<String> = rec.answers.iter().map(|a| a.to_string()).collect();
            println!("  step {}: {}", rec.step, answers.join(" "));
        }
        let mut csv = Vec::new();
        report.write_csv(&mut csv)?;
        print!("{}", String::from_utf8_lossy(&csv));
    }
    Ok(())
}
