//! Generate synthetic datasets: one from a stock preset, one from a
//! hand-rolled workload spec, both written as CSV.

use ooo_buffer::dataset::{summarize, write_dataset};
use ooo_buffer::synth::{DelayModel, IntervalSchedule, WorkloadSpec, generate, preset};

fn main() -> ooo_buffer::Result<()> {
    let out_dir = std::env::temp_dir().join("ooo-buffer-example");
    std::fs::create_dir_all(&out_dir).expect("create output dir");

    // A stock preset: 10 producers, 600 s, wide uniform delays.
    let spec = preset("G-1")?;
    let events = generate(&spec)?;
    let path = out_dir.join("g1.csv");
    write_dataset(&events, &path)?;
    let summary = summarize(&events)?;
    println!(
        "G-1: {} events from {} producers, {:.2}% out of order -> {}",
        summary.event_count,
        summary.client_count,
        summary.ooo_pct,
        path.display()
    );

    // A custom workload: 5 producers, delays drifting up over 2 minutes.
    let custom = WorkloadSpec {
        producers: 5,
        session_s: 120,
        interval: IntervalSchedule::Constant { interval_ms: 100 },
        delay: DelayModel::Ramp {
            from_ms: 20,
            to_ms: 400,
            jitter_ms: 30,
        },
        payload_bytes: 256,
        seed: 7,
    };
    println!("\ncustom spec:\n{}", custom.to_config_string());
    let events = generate(&custom)?;
    let path = out_dir.join("custom.csv");
    write_dataset(&events, &path)?;
    let summary = summarize(&events)?;
    println!(
        "custom: {} events, {:.2}% out of order, fpt {}..{} ms -> {}",
        summary.event_count,
        summary.ooo_pct,
        summary.fpt.min,
        summary.fpt.max,
        path.display()
    );
    Ok(())
}
