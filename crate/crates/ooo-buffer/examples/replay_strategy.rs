//! Replay one dataset through the reorder buffer with one sizing strategy
//! and write the emission log, metrics, and the buffer-time series.

use ooo_buffer::buffer::EngineConfig;
use ooo_buffer::dataset::{write_buffer_series, write_emission_log, write_metrics};
use ooo_buffer::eval::evaluate_run_with_log;
use ooo_buffer::strategy::Algorithm;
use ooo_buffer::synth::{generate, preset};

fn main() -> ooo_buffer::Result<()> {
    let out_dir = std::env::temp_dir().join("ooo-buffer-example");
    std::fs::create_dir_all(&out_dir).expect("create output dir");

    let events = generate(&preset("G-6")?)?;
    let algo = Algorithm::Bsttda;
    let config = algo.default_config();
    let (result, emissions) = evaluate_run_with_log(
        "G-6",
        &events,
        algo,
        &config,
        &EngineConfig::default(),
        None,
    )?;

    println!("algorithm      : {} ({})", algo, result.params);
    println!("events         : {}", result.events);
    println!(
        "out of order   : {} ({:.2}%)",
        result.ooo_events,
        100.0 * result.ooo_events as f64 / result.events as f64
    );
    println!(
        "not compensated: {} ({:.2}% of out-of-order)",
        result.not_compensated, result.not_compensated_pct
    );
    println!("mean buffer    : {:.1} ms", result.mean_buffer_ms);
    println!("minimal buffer : {} ms", result.min_required_buffer_ms);
    if let Some(overfit) = result.overfit_pct {
        println!("overfit        : {overfit:.1}%");
    }

    write_emission_log(&emissions, out_dir.join("emissions.csv"))?;
    write_buffer_series(&result.buffer_series, out_dir.join("buffer_series.csv"))?;
    write_metrics(std::slice::from_ref(&result), out_dir.join("metrics.csv"))?;
    println!("\nlogs written under {}", out_dir.display());

    let late = emissions.iter().find(|e| !e.compensated);
    if let Some(e) = late {
        println!(
            "first uncompensated event: {}/{} detected at {} but emitted at clock {}",
            e.event.producer_id, e.event.seq_id, e.event.dt, e.emit_clock
        );
    }
    Ok(())
}
