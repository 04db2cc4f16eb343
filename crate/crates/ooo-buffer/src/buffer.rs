//! Time-out reorder buffer and deterministic replay engine.
//!
//! Events are admitted in fusion-center arrival order. Each admission
//! advances a virtual clock to the event's server receive time, asks the
//! sizing strategy for the buffer time to apply, and holds the event until
//! its detection time plus that buffer time has passed on the virtual
//! clock. Held events are released in detection-time order; an arrival
//! whose detection time lies below the watermark (the highest detection
//! time already released in order) can no longer be reordered and is
//! emitted immediately, flagged as not compensated.
//!
//! Release rules, fixed for determinism:
//!
//! * on a clock advance, entries whose deadline lies strictly before the
//!   new clock are released before the arriving event is examined — their
//!   deadlines passed earlier on the timeline;
//! * entries whose deadline equals the new clock are released after the
//!   arriving event is admitted, so an event arriving exactly at another's
//!   deadline still gets into the buffer ahead of it;
//! * releasing an entry also releases every pending entry with a smaller
//!   or equal detection time, whatever its own deadline. Once the
//!   watermark moves past them, holding them longer cannot help any
//!   future arrival, and releasing them keeps the compensated output
//!   sorted even when buffer resizes invert deadlines.
//!
//! Each entry is released against the buffer time captured at its own
//! admission; later resizes do not reach back.

use std::collections::BTreeMap;
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::event::Event;
use crate::strategy::SizingStrategy;

/// Clamp bounds applied to every strategy answer.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub min_buffer_ms: i64,
    pub max_buffer_ms: i64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            min_buffer_ms: 0,
            max_buffer_ms: 60_000,
        }
    }
}

impl EngineConfig {
    /// Bounds wide enough to never clip a strategy answer.
    pub fn unclamped() -> Self {
        Self {
            min_buffer_ms: 0,
            max_buffer_ms: i64::MAX,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_buffer_ms < 0 || self.min_buffer_ms > self.max_buffer_ms {
            return Err(Error::InvalidConfig(format!(
                "buffer clamp needs 0 <= min <= max, got {}..{}",
                self.min_buffer_ms, self.max_buffer_ms
            )));
        }
        Ok(())
    }
}

/// One event leaving the buffer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedEvent {
    pub event: Event,
    /// True when the event left in detection-time order; false when it
    /// arrived past the watermark and could not be reordered.
    pub compensated: bool,
    /// Virtual clock at emission.
    pub emit_clock: i64,
    /// Buffer time captured at this event's admission.
    pub buffer_time_used: i64,
}

/// Virtual replay time: the maximum server receive time observed so far.
#[derive(Debug, Default, Clone, Copy)]
pub struct ReplayClock {
    now: Option<i64>,
}

impl ReplayClock {
    pub fn now_ms(&self) -> Option<i64> {
        self.now
    }

    fn advance(&mut self, t: i64) -> i64 {
        let next = self.now.map_or(t, |n| n.max(t));
        self.now = Some(next);
        next
    }
}

#[derive(Debug)]
struct PendingEntry {
    event: Event,
    buffer_ms: i64,
    deadline: i64,
}

/// Buffered events, totally ordered by `(dt, producer_id, seq_id)`.
#[derive(Debug, Default)]
pub struct PendingQueue {
    entries: BTreeMap<(i64, String, u64), PendingEntry>,
}

impl PendingQueue {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn insert(&mut self, event: Event, buffer_ms: i64) {
        let key = (event.dt, event.producer_id.clone(), event.seq_id);
        let deadline = event.dt.saturating_add(buffer_ms);
        self.entries.insert(
            key,
            PendingEntry {
                event,
                buffer_ms,
                deadline,
            },
        );
    }

    /// Highest detection time among entries due at `clock`.
    fn due_watermark(&self, clock: i64, inclusive: bool) -> Option<i64> {
        self.entries
            .values()
            .filter(|e| {
                if inclusive {
                    e.deadline <= clock
                } else {
                    e.deadline < clock
                }
            })
            .map(|e| e.event.dt)
            .max()
    }

    /// Removes and returns all entries with `dt <= bound`, ascending.
    fn pop_through(&mut self, bound: i64) -> Vec<PendingEntry> {
        let mut out = Vec::new();
        while let Some(entry) = self.entries.first_entry() {
            if entry.key().0 > bound {
                break;
            }
            out.push(entry.remove());
        }
        out
    }

    fn drain_all(&mut self) -> Vec<PendingEntry> {
        std::mem::take(&mut self.entries).into_values().collect()
    }
}

/// The reorder buffer driving one replay.
#[derive(Debug, Default)]
pub struct ReorderBuffer {
    config: EngineConfig,
    clock: ReplayClock,
    pending: PendingQueue,
    /// Highest detection time emitted as compensated.
    watermark: Option<i64>,
    seen: HashSet<(String, u64)>,
    last_arrival: Option<(i64, String, u64)>,
}

/// What one admission produced.
#[derive(Debug)]
pub struct Admitted {
    /// Buffer time applied to this event (after clamping).
    pub buffer_ms: i64,
    /// Events leaving the buffer during this admission, in emission order.
    pub emitted: Vec<EmittedEvent>,
}

impl ReorderBuffer {
    pub fn new(config: EngineConfig) -> Self {
        Self {
            config,
            clock: ReplayClock::default(),
            pending: PendingQueue::default(),
            watermark: None,
            seen: HashSet::new(),
            last_arrival: None,
        }
    }

    pub fn watermark(&self) -> Option<i64> {
        self.watermark
    }

    pub fn clock(&self) -> Option<i64> {
        self.clock.now_ms()
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    /// Admits the next arrival and returns everything the buffer emits in
    /// response. Arrivals must come in ascending `(srect, producer_id,
    /// seq_id)` order with unique `(producer_id, seq_id)` pairs.
    pub fn admit(&mut self, event: Event, strategy: &mut dyn SizingStrategy) -> Result<Admitted> {
        event.validate()?;
        let key = (event.srect, event.producer_id.clone(), event.seq_id);
        if self
            .seen
            .contains(&(event.producer_id.clone(), event.seq_id))
        {
            return Err(Error::DuplicateEvent {
                producer_id: event.producer_id,
                seq_id: event.seq_id,
            });
        }
        if let Some(last) = &self.last_arrival
            && key < *last
        {
            return Err(Error::AdmissionOrder {
                producer_id: event.producer_id,
                seq_id: event.seq_id,
                srect: event.srect,
            });
        }
        self.seen.insert((event.producer_id.clone(), event.seq_id));
        self.last_arrival = Some(key);

        let clock = self.clock.advance(event.srect);

        // Deadlines that passed before this arrival.
        let mut emitted = self.release_due(clock, false);

        let raw = strategy.observe(event.transmission_ms());
        let buffer_ms = raw
            .max(self.config.min_buffer_ms)
            .min(self.config.max_buffer_ms);

        if self.watermark.is_some_and(|w| event.dt < w) {
            // Too late to reorder: something with a higher detection time
            // already left in order.
            emitted.push(EmittedEvent {
                event,
                compensated: false,
                emit_clock: clock,
                buffer_time_used: buffer_ms,
            });
        } else {
            self.pending.insert(event, buffer_ms);
        }

        // Deadlines reached exactly now, including the new entry's own.
        emitted.extend(self.release_due(clock, true));

        Ok(Admitted { buffer_ms, emitted })
    }

    fn release_due(&mut self, clock: i64, inclusive: bool) -> Vec<EmittedEvent> {
        let Some(bound) = self.pending.due_watermark(clock, inclusive) else {
            return Vec::new();
        };
        self.watermark = Some(self.watermark.map_or(bound, |w| w.max(bound)));
        self.pending
            .pop_through(bound)
            .into_iter()
            .map(|entry| EmittedEvent {
                event: entry.event,
                compensated: true,
                emit_clock: clock,
                buffer_time_used: entry.buffer_ms,
            })
            .collect()
    }

    /// Releases everything still pending, in detection-time order.
    pub fn flush_end_of_stream(&mut self) -> Vec<EmittedEvent> {
        let clock = self.clock.now_ms().unwrap_or(0);
        let drained = self.pending.drain_all();
        if let Some(last) = drained.last() {
            let dt = last.event.dt;
            self.watermark = Some(self.watermark.map_or(dt, |w| w.max(dt)));
        }
        drained
            .into_iter()
            .map(|entry| EmittedEvent {
                event: entry.event,
                compensated: true,
                emit_clock: clock,
                buffer_time_used: entry.buffer_ms,
            })
            .collect()
    }
}

/// Buffer time in effect after one admission; the replay-wide sequence of
/// these is the buffer-time series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BufferSample {
    pub event_index: usize,
    pub srect: i64,
    pub buffer_ms: i64,
}

/// Everything a replay produces.
#[derive(Debug)]
pub struct ReplayOutput {
    /// All emissions, in emission order. Exactly one per admitted event.
    pub emissions: Vec<EmittedEvent>,
    /// Buffer time after each admission, in admission order.
    pub buffer_series: Vec<BufferSample>,
}

impl ReplayOutput {
    pub fn uncompensated_count(&self) -> usize {
        self.emissions.iter().filter(|e| !e.compensated).count()
    }

    pub fn mean_buffer_ms(&self) -> f64 {
        if self.buffer_series.is_empty() {
            return 0.0;
        }
        let sum: i64 = self.buffer_series.iter().map(|s| s.buffer_ms).sum();
        sum as f64 / self.buffer_series.len() as f64
    }
}

/// Replays a whole dataset through the buffer: admits every event in
/// order, flushes, and records the buffer-time series.
pub fn run_replay(
    events: &[Event],
    strategy: &mut dyn SizingStrategy,
    config: &EngineConfig,
) -> Result<ReplayOutput> {
    config.validate()?;
    let mut engine = ReorderBuffer::new(config.clone());
    let mut emissions = Vec::with_capacity(events.len());
    let mut buffer_series = Vec::with_capacity(events.len());
    for (index, event) in events.iter().enumerate() {
        let admitted = engine
            .admit(event.clone(), strategy)
            .map_err(|e| Error::Replay {
                index,
                source: Box::new(e),
            })?;
        buffer_series.push(BufferSample {
            event_index: index,
            srect: event.srect,
            buffer_ms: admitted.buffer_ms,
        });
        emissions.extend(admitted.emitted);
    }
    emissions.extend(engine.flush_end_of_stream());
    Ok(ReplayOutput {
        emissions,
        buffer_series,
    })
}
