//! Out-of-order event compensation with dynamically sized time-out buffers.
//!
//! Distributed producers stamp each observation with its detection time,
//! but varying network delays deliver the events to the fusion center out
//! of order. This crate reorders such streams with a time-out buffer:
//! each arrival is held until its detection time plus a buffer time has
//! passed, then released in detection-time order. Arrivals that show up
//! too late to reorder are emitted immediately and flagged. The buffer
//! time itself is sized by a pluggable strategy — one static policy and
//! six dynamic ones that learn from observed transmission times — and a
//! replay harness measures how well each strategy trades buffer size
//! against missed reorderings on recorded or synthetic datasets.
//!
//! # Modules
//!
//! * [`event`] — the event model and out-of-order detection.
//! * [`buffer`] — the reorder buffer and deterministic replay engine.
//! * [`strategy`] — the seven buffer-sizing algorithms and the
//!   parameter-suggestion procedure.
//! * [`window`] — sliding-window statistics backing the windowed
//!   strategies.
//! * [`dataset`] — CSV datasets, emission logs, metrics files, and
//!   session summaries.
//! * [`synth`] — seeded synthetic workload generation with configurable
//!   delay models, including the `G-1`..`G-12` presets.
//! * [`eval`] — replay metrics, algorithm-by-dataset grids, and parameter
//!   sweeps.
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --example generate_dataset     # synthesize a workload, write CSV
//! cargo run --example detect_out_of_order  # detection on a hand-built stream
//! cargo run --example replay_strategy      # one replay, with emission log
//! cargo run --example compare_strategies   # full grid over three presets
//! cargo run --example parameter_sweep      # sweep an offset, watch the trade-off
//! cargo run --example suggest_parameters   # derive starting parameters
//! ```
//!
//! The same operations are scriptable through the `oooeval` binary; see
//! the README.

pub mod buffer;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod event;
pub mod strategy;
pub mod synth;
pub mod window;

pub use buffer::{
    BufferSample, EmittedEvent, EngineConfig, ReorderBuffer, ReplayOutput, run_replay,
};
pub use dataset::{ColumnMapping, DatasetSummary, read_dataset, summarize, write_dataset};
pub use error::{Error, Result};
pub use eval::{RunResult, min_required_buffer, not_compensated_pct, overfit_pct, run_grid};
pub use event::{
    Durations, Event, OooFlags, detect_ooo_by_dt, detect_ooo_by_seq, detect_ooo_flags,
};
pub use strategy::{Algorithm, SizingStrategy, StrategyConfig, SuggestedParams, suggest_params};
pub use synth::{DelayModel, IntervalSchedule, WorkloadSpec, generate, preset};
