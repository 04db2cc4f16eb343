//! Derive starting parameters for every algorithm from a recorded sample,
//! then check what the suggested static buffer does on the same data.

use ooo_buffer::buffer::EngineConfig;
use ooo_buffer::eval::evaluate_run;
use ooo_buffer::strategy::{Algorithm, suggest_params};
use ooo_buffer::synth::{generate, preset};

fn main() -> ooo_buffer::Result<()> {
    // A sample of roughly 5,000 events is enough for stable percentiles.
    let mut sample = generate(&preset("G-3")?)?;
    sample.truncate(5_000);

    let suggested = suggest_params(&sample)?;
    println!(
        "98th percentile of full processing time: {} ms\n",
        suggested.p98_fpt_ms
    );
    for algo in Algorithm::ALL {
        println!(
            "{:<8} {}",
            algo.name(),
            algo.params_string(suggested.config(algo))
        );
    }

    let events = generate(&preset("G-3")?)?;
    let run = evaluate_run(
        "G-3",
        &events,
        Algorithm::Sba,
        suggested.config(Algorithm::Sba),
        &EngineConfig::default(),
        None,
    )?;
    println!(
        "\nsba with the suggested buffer on the full session: {:.2}% not compensated, mean buffer {:.0} ms",
        run.not_compensated_pct, run.mean_buffer_ms
    );
    Ok(())
}
