//! Sweep one parameter of one algorithm and watch the trade-off move:
//! larger offsets compensate more events but inflate the buffer.

use ooo_buffer::buffer::EngineConfig;
use ooo_buffer::eval::sweep;
use ooo_buffer::strategy::Algorithm;
use ooo_buffer::synth::{generate, preset};

fn main() -> ooo_buffer::Result<()> {
    let events = generate(&preset("G-1")?)?;
    let algo = Algorithm::Bsttda;
    let values: Vec<String> = [0i64, 50, 150, 350, 700]
        .iter()
        .map(|v| v.to_string())
        .collect();

    let runs = sweep(
        "G-1",
        &events,
        algo,
        &algo.default_config(),
        "offset_ms",
        &values,
        &EngineConfig::default(),
    )?;

    println!("sweep of offset_ms for {algo} on G-1");
    println!(
        "{:>9} {:>12} {:>14} {:>10}",
        "offset", "not comp %", "mean buf ms", "overfit %"
    );
    for (value, run) in values.iter().zip(&runs) {
        println!(
            "{:>9} {:>12.3} {:>14.1} {:>10}",
            value,
            run.not_compensated_pct,
            run.mean_buffer_ms,
            run.overfit_pct
                .map(|v| format!("{v:.1}"))
                .unwrap_or_else(|| "-".into()),
        );
    }
    Ok(())
}
