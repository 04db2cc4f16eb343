//! Run the full algorithm grid over three presets and print the
//! trade-off each strategy strikes between missed reorderings and
//! buffer overfitting.

use ooo_buffer::buffer::EngineConfig;
use ooo_buffer::eval::{default_grid, run_grid};
use ooo_buffer::synth::{generate, preset};

fn main() -> ooo_buffer::Result<()> {
    let mut datasets = Vec::new();
    for label in ["G-2", "G-4", "G-6"] {
        datasets.push((label.to_owned(), generate(&preset(label)?)?));
    }

    let outcomes = run_grid(&datasets, &default_grid(), &EngineConfig::default());
    println!(
        "{:<6} {:<8} {:>10} {:>12} {:>14} {:>10}",
        "data", "algo", "ooo", "not comp %", "mean buf ms", "overfit %"
    );
    for outcome in outcomes {
        match outcome.result {
            Ok(r) => println!(
                "{:<6} {:<8} {:>10} {:>12.2} {:>14.1} {:>10}",
                r.dataset,
                r.algorithm.name(),
                r.ooo_events,
                r.not_compensated_pct,
                r.mean_buffer_ms,
                r.overfit_pct
                    .map(|v| format!("{v:.1}"))
                    .unwrap_or_else(|| "-".into()),
            ),
            Err(e) => eprintln!("{} x {}: {e}", outcome.dataset, outcome.algorithm),
        }
    }
    Ok(())
}
