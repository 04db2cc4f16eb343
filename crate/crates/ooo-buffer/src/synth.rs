//! Seeded synthetic workload generation.
//!
//! A [`WorkloadSpec`] describes a session: how many producers emit, how
//! detection times are spaced, and how the simulated network delays each
//! event on its way to the fusion center. Given the same spec and seed the
//! generator reproduces the dataset byte for byte. Each producer draws
//! from its own PRNG stream derived from `(seed, producer index)`, so
//! changing the producer count never reshuffles the other producers'
//! draws.
//!
//! The `G-1` .. `G-12` presets approximate the recorded sessions of the
//! published evaluation corpus: the delay-range and out-of-order
//! characteristics are targeted, not the exact samples, because the
//! original generator functions are not public. Tests against presets
//! therefore check ranges, never exact values.

use std::fmt;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::event::{Event, sort_arrival_order};

/// Network delay as a function of session time (and randomness).
#[derive(Debug, Clone, PartialEq)]
pub enum DelayModel {
    /// Fixed delay.
    Constant { delay_ms: i64 },
    /// Independent uniform draw from `[lo_ms, hi_ms]` per event.
    Uniform { lo_ms: i64, hi_ms: i64 },
    /// Linear drift from `from_ms` to `to_ms` over the session, plus an
    /// independent uniform jitter of `±jitter_ms`.
    Ramp {
        from_ms: i64,
        to_ms: i64,
        jitter_ms: i64,
    },
    /// Biased sine wave; the amplitude itself drifts linearly from
    /// `amplitude_from_ms` to `amplitude_to_ms` over the session. An
    /// independent uniform jitter of `±jitter_ms` is added on top.
    Sine {
        bias_ms: i64,
        amplitude_from_ms: i64,
        amplitude_to_ms: i64,
        period_s: f64,
        jitter_ms: i64,
    },
}

/// Upper bound for delay parameters, ms. Keeps `dt + delay` far from
/// overflow for any representable session.
const MAX_DELAY_MS: i64 = 1_000_000_000;

impl DelayModel {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        let in_range = |v: i64| (0..=MAX_DELAY_MS).contains(&v);
        match *self {
            DelayModel::Constant { delay_ms } if !in_range(delay_ms) => bad(format!(
                "constant delay must be in 0..={MAX_DELAY_MS}, got {delay_ms}"
            )),
            DelayModel::Uniform { lo_ms, hi_ms }
                if !in_range(lo_ms) || !in_range(hi_ms) || hi_ms < lo_ms =>
            {
                bad(format!(
                    "uniform delay needs 0 <= lo <= hi <= {MAX_DELAY_MS}, got {lo_ms}:{hi_ms}"
                ))
            }
            DelayModel::Ramp {
                from_ms,
                to_ms,
                jitter_ms,
            } if !in_range(from_ms) || !in_range(to_ms) || !in_range(jitter_ms) => bad(format!(
                "ramp delay parameters must be in 0..={MAX_DELAY_MS}"
            )),
            DelayModel::Sine {
                bias_ms,
                amplitude_from_ms,
                amplitude_to_ms,
                period_s,
                jitter_ms,
            } if !in_range(bias_ms)
                || !in_range(amplitude_from_ms)
                || !in_range(amplitude_to_ms)
                || !in_range(jitter_ms)
                || period_s <= 0.0
                || period_s.is_nan() =>
            {
                bad(format!(
                    "sine delay needs parameters in 0..={MAX_DELAY_MS} and period_s > 0"
                ))
            }
            _ => Ok(()),
        }
    }

    /// Samples the delay for an event detected `t_ms` into the session.
    fn sample(&self, t_ms: i64, session_ms: i64, rng: &mut ChaCha8Rng) -> i64 {
        let frac = if session_ms > 0 {
            t_ms as f64 / session_ms as f64
        } else {
            0.0
        };
        let jitter =
            |j: i64, rng: &mut ChaCha8Rng| if j > 0 { rng.random_range(-j..=j) } else { 0 };
        let delay = match *self {
            DelayModel::Constant { delay_ms } => delay_ms,
            DelayModel::Uniform { lo_ms, hi_ms } => rng.random_range(lo_ms..=hi_ms),
            DelayModel::Ramp {
                from_ms,
                to_ms,
                jitter_ms,
            } => {
                let base = from_ms as f64 + (to_ms - from_ms) as f64 * frac;
                base.round() as i64 + jitter(jitter_ms, rng)
            }
            DelayModel::Sine {
                bias_ms,
                amplitude_from_ms,
                amplitude_to_ms,
                period_s,
                jitter_ms,
            } => {
                let amp =
                    amplitude_from_ms as f64 + (amplitude_to_ms - amplitude_from_ms) as f64 * frac;
                let phase = 2.0 * std::f64::consts::PI * t_ms as f64 / (period_s * 1000.0);
                let base = bias_ms as f64 + amp * phase.sin();
                base.round() as i64 + jitter(jitter_ms, rng)
            }
        };
        delay.max(0)
    }
}

impl fmt::Display for DelayModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DelayModel::Constant { delay_ms } => write!(f, "constant:{delay_ms}"),
            DelayModel::Uniform { lo_ms, hi_ms } => write!(f, "uniform:{lo_ms}:{hi_ms}"),
            DelayModel::Ramp {
                from_ms,
                to_ms,
                jitter_ms,
            } => write!(f, "ramp:{from_ms}:{to_ms}:{jitter_ms}"),
            DelayModel::Sine {
                bias_ms,
                amplitude_from_ms,
                amplitude_to_ms,
                period_s,
                jitter_ms,
            } => write!(
                f,
                "sine:{bias_ms}:{amplitude_from_ms}:{period_s}:{amplitude_to_ms}:{jitter_ms}"
            ),
        }
    }
}

impl FromStr for DelayModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("bad delay model '{s}'"));
        let mut parts = s.split(':');
        let kind = parts.next().ok_or_else(bad)?;
        let rest: Vec<&str> = parts.collect();
        let int = |i: usize| -> Result<i64> { rest[i].trim().parse().map_err(|_| bad()) };
        let model = match (kind.trim(), rest.len()) {
            ("constant", 1) => DelayModel::Constant { delay_ms: int(0)? },
            ("uniform", 2) => DelayModel::Uniform {
                lo_ms: int(0)?,
                hi_ms: int(1)?,
            },
            ("ramp", 2 | 3) => DelayModel::Ramp {
                from_ms: int(0)?,
                to_ms: int(1)?,
                jitter_ms: if rest.len() > 2 { int(2)? } else { 0 },
            },
            ("sine", 3..=5) => {
                let amp = int(1)?;
                DelayModel::Sine {
                    bias_ms: int(0)?,
                    amplitude_from_ms: amp,
                    period_s: rest[2].trim().parse().map_err(|_| bad())?,
                    amplitude_to_ms: if rest.len() > 3 { int(3)? } else { amp },
                    jitter_ms: if rest.len() > 4 { int(4)? } else { 0 },
                }
            }
            _ => return Err(bad()),
        };
        model.validate()?;
        Ok(model)
    }
}

/// Spacing of consecutive detection times of one producer.
#[derive(Debug, Clone, PartialEq)]
pub enum IntervalSchedule {
    Constant {
        interval_ms: i64,
    },
    /// Event rate interpolates linearly between the reciprocal endpoints,
    /// so a `10000 -> 100` ramp speeds up smoothly over the session.
    Ramp {
        from_ms: i64,
        to_ms: i64,
    },
}

impl IntervalSchedule {
    fn validate(&self) -> Result<()> {
        let in_range = |v: i64| (1..=MAX_DELAY_MS).contains(&v);
        let ok = match *self {
            IntervalSchedule::Constant { interval_ms } => in_range(interval_ms),
            IntervalSchedule::Ramp { from_ms, to_ms } => in_range(from_ms) && in_range(to_ms),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!(
                "intervals must be in 1..={MAX_DELAY_MS}"
            )))
        }
    }

    fn interval_at(&self, t_ms: i64, session_ms: i64) -> i64 {
        match *self {
            IntervalSchedule::Constant { interval_ms } => interval_ms,
            IntervalSchedule::Ramp { from_ms, to_ms } => {
                let frac = (t_ms as f64 / session_ms as f64).clamp(0.0, 1.0);
                let rate =
                    1.0 / from_ms as f64 + (1.0 / to_ms as f64 - 1.0 / from_ms as f64) * frac;
                ((1.0 / rate).round() as i64).max(1)
            }
        }
    }
}

impl fmt::Display for IntervalSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            IntervalSchedule::Constant { interval_ms } => write!(f, "constant:{interval_ms}"),
            IntervalSchedule::Ramp { from_ms, to_ms } => write!(f, "ramp:{from_ms}:{to_ms}"),
        }
    }
}

impl FromStr for IntervalSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("bad interval schedule '{s}'"));
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let schedule = match parts.as_slice() {
            ["constant", ms] => IntervalSchedule::Constant {
                interval_ms: ms.parse().map_err(|_| bad())?,
            },
            ["ramp", from, to] => IntervalSchedule::Ramp {
                from_ms: from.parse().map_err(|_| bad())?,
                to_ms: to.parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        schedule.validate()?;
        Ok(schedule)
    }
}

/// Full description of one synthetic session.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadSpec {
    pub producers: u32,
    pub session_s: u64,
    pub interval: IntervalSchedule,
    pub delay: DelayModel,
    pub payload_bytes: u64,
    pub seed: u64,
}

impl WorkloadSpec {
    /// One year, the longest representable session.
    pub const MAX_SESSION_S: u64 = 31_536_000;

    fn validate(&self) -> Result<()> {
        if self.producers == 0 || self.session_s == 0 {
            return Err(Error::EmptyWorkload(
                "need at least one producer and a non-zero session".into(),
            ));
        }
        if self.session_s > Self::MAX_SESSION_S {
            return Err(Error::InvalidSpec(format!(
                "session_s must be at most {}, got {}",
                Self::MAX_SESSION_S,
                self.session_s
            )));
        }
        self.interval.validate()?;
        self.delay.validate()
    }

    /// Plain `key=value` rendering, one key per line.
    pub fn to_config_string(&self) -> String {
        format!(
            "producers={}\nsession_s={}\ninterval={}\ndelay={}\npayload_bytes={}\nseed={}\n",
            self.producers,
            self.session_s,
            self.interval,
            self.delay,
            self.payload_bytes,
            self.seed
        )
    }

    /// Parses the `key=value` form. Blank lines and `#` comments are
    /// ignored; `payload_bytes` and `seed` default to 0.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut producers = None;
        let mut session_s = None;
        let mut interval = None;
        let mut delay = None;
        let mut payload_bytes = 0u64;
        let mut seed = 0u64;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidSpec(format!("expected key=value, got '{line}'")))?;
            let value = value.trim();
            let bad = |what: &str| Error::InvalidSpec(format!("{what} '{value}'"));
            match key.trim() {
                "producers" => producers = Some(value.parse().map_err(|_| bad("bad producers"))?),
                "session_s" => session_s = Some(value.parse().map_err(|_| bad("bad session_s"))?),
                "interval" => interval = Some(value.parse()?),
                "delay" => delay = Some(value.parse()?),
                "payload_bytes" => {
                    payload_bytes = value.parse().map_err(|_| bad("bad payload_bytes"))?
                }
                "seed" => seed = value.parse().map_err(|_| bad("bad seed"))?,
                other => return Err(Error::InvalidSpec(format!("unknown key '{other}'"))),
            }
        }
        let spec = WorkloadSpec {
            producers: producers.ok_or_else(|| Error::InvalidSpec("missing producers".into()))?,
            session_s: session_s.ok_or_else(|| Error::InvalidSpec("missing session_s".into()))?,
            interval: interval.ok_or_else(|| Error::InvalidSpec("missing interval".into()))?,
            delay: delay.ok_or_else(|| Error::InvalidSpec("missing delay".into()))?,
            payload_bytes,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Generates the session described by `spec`, in fusion-center arrival
/// order.
///
/// Producer starts are staggered evenly within the first interval, the
/// way independently launched clients interleave; without the stagger all
/// producers would share one detection-time grid and low-variance delays
/// could never produce disorder. Server-side processing and client
/// response legs are zero-width because only the network leg is
/// simulated.
pub fn generate(spec: &WorkloadSpec) -> Result<Vec<Event>> {
    spec.validate()?;
    let session_ms = spec.session_s as i64 * 1000;
    let first_interval = spec.interval.interval_at(0, session_ms);
    let mut events = Vec::new();
    for producer in 0..spec.producers {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(producer as u64);
        let producer_id = format!("p{producer}");
        let mut t = first_interval * producer as i64 / spec.producers as i64;
        let mut seq = 0u64;
        while t < session_ms {
            let delay = spec.delay.sample(t, session_ms, &mut rng);
            let srect = t + delay;
            events.push(Event {
                producer_id: producer_id.clone(),
                seq_id: seq,
                dt: t,
                cst: t,
                srect,
                srest: srect,
                crt: srect,
                payload_bytes: spec.payload_bytes,
            });
            t += spec.interval.interval_at(t, session_ms);
            seq += 1;
        }
    }
    if events.is_empty() {
        return Err(Error::EmptyWorkload("schedule produced no events".into()));
    }
    sort_arrival_order(&mut events);
    Ok(events)
}

/// A documented approximation of one of the published synthetic sessions.
///
/// All presets run 10 producers for 600 s. G-1..G-8 emit every 200 ms;
/// G-9/G-10 ramp the interval from 10 s down to 100 ms, G-11/G-12 the
/// other way. Delay shapes: wide uniform (G-1), narrow uniform (G-2),
/// drift up/down with jitter (G-3/G-4), sine with growing amplitude
/// (G-5/G-6), fast and slow biased sine (G-7/G-8); G-9..G-12 reuse the
/// wide and narrow uniforms under the ramped intervals.
pub fn preset(label: &str) -> Result<WorkloadSpec> {
    let norm = label.trim().to_ascii_uppercase();
    let number: u32 = norm
        .strip_prefix("G-")
        .or_else(|| norm.strip_prefix('G'))
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| Error::UnknownPreset(label.to_owned()))?;

    let wide = DelayModel::Uniform {
        lo_ms: 100,
        hi_ms: 900,
    };
    let narrow = DelayModel::Uniform {
        lo_ms: 476,
        hi_ms: 527,
    };
    let every_200ms = IntervalSchedule::Constant { interval_ms: 200 };
    let speeding_up = IntervalSchedule::Ramp {
        from_ms: 10_000,
        to_ms: 100,
    };
    let slowing_down = IntervalSchedule::Ramp {
        from_ms: 100,
        to_ms: 10_000,
    };

    let (interval, delay) = match number {
        1 => (every_200ms, wide),
        2 => (every_200ms, narrow),
        3 => (
            every_200ms,
            DelayModel::Ramp {
                from_ms: 50,
                to_ms: 1000,
                jitter_ms: 25,
            },
        ),
        4 => (
            every_200ms,
            DelayModel::Ramp {
                from_ms: 1000,
                to_ms: 50,
                jitter_ms: 40,
            },
        ),
        5 => (
            every_200ms,
            DelayModel::Sine {
                bias_ms: 300,
                amplitude_from_ms: 20,
                amplitude_to_ms: 650,
                period_s: 75.0,
                jitter_ms: 150,
            },
        ),
        6 => (
            every_200ms,
            DelayModel::Sine {
                bias_ms: 300,
                amplitude_from_ms: 20,
                amplitude_to_ms: 650,
                period_s: 60.0,
                jitter_ms: 150,
            },
        ),
        7 => (
            every_200ms,
            DelayModel::Sine {
                bias_ms: 500,
                amplitude_from_ms: 215,
                amplitude_to_ms: 215,
                period_s: 60.0,
                jitter_ms: 35,
            },
        ),
        8 => (
            every_200ms,
            DelayModel::Sine {
                bias_ms: 500,
                amplitude_from_ms: 223,
                amplitude_to_ms: 223,
                period_s: 300.0,
                jitter_ms: 27,
            },
        ),
        9 => (speeding_up, wide),
        10 => (speeding_up, narrow),
        11 => (slowing_down, wide),
        12 => (slowing_down, narrow),
        _ => return Err(Error::UnknownPreset(label.to_owned())),
    };

    Ok(WorkloadSpec {
        producers: 10,
        session_s: 600,
        interval,
        delay,
        payload_bytes: 0,
        seed: number as u64,
    })
}

/// All preset labels, in order.
pub fn preset_labels() -> Vec<String> {
    (1..=12).map(|n| format!("G-{n}")).collect()
}
