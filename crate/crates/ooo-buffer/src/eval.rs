//! Evaluation metrics and the replay harness.
//!
//! Two quality metrics describe a replay:
//!
//! * *not compensated* — the share of out-of-order events the buffer
//!   failed to reorder, relative to all out-of-order events in the
//!   dataset;
//! * *overfitting* — the mean applied buffer time relative to the
//!   smallest static buffer that would have compensated everything.
//!
//! The minimal buffer is found by binary search over static replays: the
//! uncompensated count is non-increasing in the static buffer time, and a
//! static buffer equal to the maximum transmission time always reaches
//! zero.

use crate::buffer::{BufferSample, EmittedEvent, EngineConfig, run_replay};
use crate::error::{Error, Result};
use crate::event::{Event, detect_ooo_by_dt};
use crate::strategy::{Algorithm, StrategyConfig};

/// Metrics of one replay of one algorithm over one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub dataset: String,
    pub algorithm: Algorithm,
    /// Compact `key=value;...` rendering of the configuration used.
    pub params: String,
    pub events: usize,
    /// Out-of-order events (by detection time) in the dataset.
    pub ooo_events: usize,
    pub not_compensated: usize,
    /// `100 * not_compensated / ooo_events`; 0 when nothing was out of order.
    pub not_compensated_pct: f64,
    /// Arithmetic mean of the applied buffer-time series.
    pub mean_buffer_ms: f64,
    /// Smallest static buffer that compensates the whole dataset.
    pub min_required_buffer_ms: i64,
    /// `100 * mean_buffer / min_required_buffer`; absent when the dataset
    /// needs no buffer at all.
    pub overfit_pct: Option<f64>,
    pub buffer_series: Vec<BufferSample>,
}

/// Share of out-of-order events the replay failed to compensate.
pub fn not_compensated_pct(emissions: &[EmittedEvent], ooo_total: usize) -> f64 {
    if ooo_total == 0 {
        return 0.0;
    }
    let not_compensated = emissions.iter().filter(|e| !e.compensated).count();
    100.0 * not_compensated as f64 / ooo_total as f64
}

/// Mean applied buffer time relative to the minimal required one.
pub fn overfit_pct(series: &[BufferSample], min_required_ms: i64) -> Option<f64> {
    if min_required_ms == 0 || series.is_empty() {
        return None;
    }
    let sum: i64 = series.iter().map(|s| s.buffer_ms).sum();
    let mean = sum as f64 / series.len() as f64;
    Some(100.0 * mean / min_required_ms as f64)
}

fn static_uncompensated(events: &[Event], buffer_ms: i64, max_buffer_ms: i64) -> Result<usize> {
    let cfg = StrategyConfig {
        static_buffer_ms: buffer_ms,
        ..StrategyConfig::default()
    };
    let mut strategy = Algorithm::Sba.build(&cfg)?;
    let engine = EngineConfig {
        min_buffer_ms: 0,
        max_buffer_ms,
    };
    Ok(run_replay(events, strategy.as_mut(), &engine)?.uncompensated_count())
}

/// Smallest static buffer time that compensates every event of the
/// dataset. Zero for a stream that is already in detection-time order.
pub fn min_required_buffer(events: &[Event]) -> Result<i64> {
    let max_tt = events.iter().map(Event::transmission_ms).max().unwrap_or(0);
    let mut lo = 0i64;
    let mut hi = max_tt;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if static_uncompensated(events, mid, max_tt)? == 0 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Replays `events` with one algorithm and computes all metrics.
///
/// `min_required_ms` can be passed in when already known for the dataset
/// (it does not depend on the algorithm); otherwise it is computed here.
pub fn evaluate_run(
    dataset: &str,
    events: &[Event],
    algorithm: Algorithm,
    config: &StrategyConfig,
    engine: &EngineConfig,
    min_required_ms: Option<i64>,
) -> Result<RunResult> {
    Ok(evaluate_run_with_log(dataset, events, algorithm, config, engine, min_required_ms)?.0)
}

/// Like [`evaluate_run`], but also hands back the emission log.
pub fn evaluate_run_with_log(
    dataset: &str,
    events: &[Event],
    algorithm: Algorithm,
    config: &StrategyConfig,
    engine: &EngineConfig,
    min_required_ms: Option<i64>,
) -> Result<(RunResult, Vec<EmittedEvent>)> {
    let ooo_events = detect_ooo_by_dt(events).iter().filter(|&&f| f).count();
    let mut strategy = algorithm.build(config)?;
    let output = run_replay(events, strategy.as_mut(), engine)?;
    let min_required_ms = match min_required_ms {
        Some(b) => b,
        None => min_required_buffer(events)?,
    };
    let not_compensated = output.uncompensated_count();
    let result = RunResult {
        dataset: dataset.to_owned(),
        algorithm,
        params: algorithm.params_string(config),
        events: events.len(),
        ooo_events,
        not_compensated,
        not_compensated_pct: not_compensated_pct(&output.emissions, ooo_events),
        mean_buffer_ms: output.mean_buffer_ms(),
        min_required_buffer_ms: min_required_ms,
        overfit_pct: overfit_pct(&output.buffer_series, min_required_ms),
        buffer_series: output.buffer_series,
    };
    Ok((result, output.emissions))
}

/// The stock evaluation bundle: every algorithm with its default
/// configuration.
pub fn default_grid() -> Vec<(Algorithm, StrategyConfig)> {
    Algorithm::ALL
        .iter()
        .map(|&a| (a, a.default_config()))
        .collect()
}

/// One cell of a grid run. Failures are recorded, not propagated, so the
/// rest of the grid still runs.
#[derive(Debug)]
pub struct GridOutcome {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub result: Result<RunResult>,
}

/// Replays every algorithm over every dataset. Results come back sorted
/// by `(dataset, algorithm)` regardless of input order.
pub fn run_grid(
    datasets: &[(String, Vec<Event>)],
    algorithms: &[(Algorithm, StrategyConfig)],
    engine: &EngineConfig,
) -> Vec<GridOutcome> {
    let mut outcomes = Vec::with_capacity(datasets.len() * algorithms.len());
    for (dataset, events) in datasets {
        let min_required = min_required_buffer(events);
        for (algorithm, config) in algorithms {
            let result = match &min_required {
                Ok(b) => evaluate_run(dataset, events, *algorithm, config, engine, Some(*b)),
                Err(e) => Err(Error::InvalidConfig(format!(
                    "min required buffer failed for {dataset}: {e}"
                ))),
            };
            outcomes.push(GridOutcome {
                dataset: dataset.clone(),
                algorithm: *algorithm,
                result,
            });
        }
    }
    outcomes
        .sort_by(|a, b| (a.dataset.as_str(), a.algorithm).cmp(&(b.dataset.as_str(), b.algorithm)));
    outcomes
}

/// Replays one algorithm over one dataset once per parameter value.
///
/// `param` must be a key the algorithm reads; `values` are parsed with the
/// same rules as CLI parameters.
pub fn sweep(
    dataset: &str,
    events: &[Event],
    algorithm: Algorithm,
    base_config: &StrategyConfig,
    param: &str,
    values: &[String],
    engine: &EngineConfig,
) -> Result<Vec<RunResult>> {
    if !algorithm.param_keys().contains(&param) {
        return Err(Error::InvalidParam(format!(
            "'{param}' is not a parameter of {algorithm}"
        )));
    }
    let min_required = min_required_buffer(events)?;
    let mut results = Vec::with_capacity(values.len());
    for value in values {
        let mut config = base_config.clone();
        config.set(param, value)?;
        results.push(evaluate_run(
            dataset,
            events,
            algorithm,
            &config,
            engine,
            Some(min_required),
        )?);
    }
    Ok(results)
}
