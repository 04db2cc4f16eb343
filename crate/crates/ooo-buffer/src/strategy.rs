//! Buffer sizing strategies.
//!
//! A strategy consumes the transmission time of every incoming event and
//! answers with the buffer time to apply from that point on. Seven policies
//! are provided:
//!
//! * `sba` — static buffer, the comparison baseline;
//! * `bstt` — reacts to the single latest transmission time with
//!   multiplicative increase/decrease;
//! * `bsttwa` — exponentially weighted average over a sliding window;
//! * `bsttd` — max-min spread over a sliding window;
//! * `bsttda` — window average plus the max-min spread;
//! * `bskf` — scalar Kalman filter predicting the next transmission time;
//! * `kslack` — dynamic K-slack: all-time max plus a scaled standard
//!   deviation.
//!
//! All strategies keep real-valued internal state and report whole
//! milliseconds, rounded half-up, so replays are bit-reproducible.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::event::Event;
use crate::window::TtWindow;

/// Rounds a non-negative buffer time to whole milliseconds, halves up.
pub fn round_half_up_ms(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

/// Observes transmission times and sizes the reorder buffer.
///
/// One instance drives one replay; state is single-owner mutable.
pub trait SizingStrategy {
    /// Feeds one observed transmission time (ms) and returns the buffer
    /// time (ms) to apply from now on.
    fn observe(&mut self, tt_ms: i64) -> i64;
}

/// Parameters understood by the strategies. Each algorithm reads only the
/// fields it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyConfig {
    /// Returned by windowed strategies until they hold two samples; also
    /// the starting buffer for `bstt`.
    pub initial_buffer_ms: i64,
    /// Safety margin added on top of the computed baseline.
    pub offset_ms: i64,
    /// Sliding window length, in samples.
    pub window_n: usize,
    /// Multiplier applied by `bstt` when the buffer grows.
    pub increase_factor: f64,
    /// Multiplier applied by `bstt` when the buffer shrinks.
    pub decrease_factor: f64,
    /// Damping below which `bstt` refuses to shrink.
    pub threshold_ms: i64,
    /// `kslack` multiplier for the standard-deviation margin.
    pub scaling_factor_lambda: f64,
    /// Fixed buffer used by `sba`.
    pub static_buffer_ms: i64,
    /// Kalman process noise.
    pub kalman_q: f64,
    /// Kalman measurement noise.
    pub kalman_r: f64,
    /// Kalman initial estimate covariance.
    pub kalman_p0: f64,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            initial_buffer_ms: 750,
            offset_ms: 350,
            window_n: 600,
            increase_factor: 2.0,
            decrease_factor: 0.99,
            threshold_ms: 100,
            scaling_factor_lambda: 0.8,
            static_buffer_ms: 1000,
            kalman_q: 1.0,
            kalman_r: 100.0,
            kalman_p0: 1.0,
        }
    }
}

impl StrategyConfig {
    /// Applies one `key=value` pair. Unknown keys and unparsable values
    /// are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::InvalidParam(format!("{key}: {what} '{value}'"));
        match key {
            "initial_buffer_ms" => {
                self.initial_buffer_ms = value.parse().map_err(|_| bad("bad integer"))?
            }
            "offset_ms" => self.offset_ms = value.parse().map_err(|_| bad("bad integer"))?,
            "window_n" => self.window_n = value.parse().map_err(|_| bad("bad integer"))?,
            "increase_factor" => {
                self.increase_factor = value.parse().map_err(|_| bad("bad number"))?
            }
            "decrease_factor" => {
                self.decrease_factor = value.parse().map_err(|_| bad("bad number"))?
            }
            "threshold_ms" => self.threshold_ms = value.parse().map_err(|_| bad("bad integer"))?,
            "scaling_factor_lambda" => {
                self.scaling_factor_lambda = value.parse().map_err(|_| bad("bad number"))?
            }
            "static_buffer_ms" => {
                self.static_buffer_ms = value.parse().map_err(|_| bad("bad integer"))?
            }
            "kalman_q" => self.kalman_q = value.parse().map_err(|_| bad("bad number"))?,
            "kalman_r" => self.kalman_r = value.parse().map_err(|_| bad("bad number"))?,
            "kalman_p0" => self.kalman_p0 = value.parse().map_err(|_| bad("bad number"))?,
            _ => return Err(Error::InvalidParam(format!("unknown parameter '{key}'"))),
        }
        Ok(())
    }

    /// Applies a `key=value;key=value` parameter string.
    pub fn apply_params(&mut self, params: &str) -> Result<()> {
        for pair in params.split(';').filter(|p| !p.trim().is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidParam(format!("expected key=value, got '{pair}'")))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.window_n < 1 {
            return Err(Error::InvalidConfig("window_n must be >= 1".into()));
        }
        if self.increase_factor <= 0.0 || self.decrease_factor <= 0.0 {
            return Err(Error::InvalidConfig("factors must be > 0".into()));
        }
        if self.scaling_factor_lambda < 0.0 {
            return Err(Error::InvalidConfig(
                "scaling_factor_lambda must be >= 0".into(),
            ));
        }
        for (name, v) in [
            ("initial_buffer_ms", self.initial_buffer_ms),
            ("offset_ms", self.offset_ms),
            ("threshold_ms", self.threshold_ms),
            ("static_buffer_ms", self.static_buffer_ms),
        ] {
            if v < 0 {
                return Err(Error::InvalidConfig(format!("{name} must be >= 0")));
            }
        }
        if self.kalman_q < 0.0 || self.kalman_r <= 0.0 || self.kalman_p0 <= 0.0 {
            return Err(Error::InvalidConfig(
                "kalman_q must be >= 0, kalman_r and kalman_p0 > 0".into(),
            ));
        }
        Ok(())
    }
}

/// The seven sizing algorithms, by their short names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Sba,
    Bstt,
    Bsttwa,
    Bsttd,
    Bsttda,
    Bskf,
    Kslack,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Sba,
        Algorithm::Bstt,
        Algorithm::Bsttwa,
        Algorithm::Bsttd,
        Algorithm::Bsttda,
        Algorithm::Bskf,
        Algorithm::Kslack,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Sba => "sba",
            Algorithm::Bstt => "bstt",
            Algorithm::Bsttwa => "bsttwa",
            Algorithm::Bsttd => "bsttd",
            Algorithm::Bsttda => "bsttda",
            Algorithm::Bskf => "bskf",
            Algorithm::Kslack => "kslack",
        }
    }

    /// The stock evaluation configuration for this algorithm.
    pub fn default_config(&self) -> StrategyConfig {
        let mut cfg = StrategyConfig::default();
        match self {
            Algorithm::Sba => {
                cfg.static_buffer_ms = 1000;
            }
            Algorithm::Bstt => {
                cfg.initial_buffer_ms = 500;
                cfg.offset_ms = 500;
                cfg.threshold_ms = 100;
                cfg.increase_factor = 2.0;
                cfg.decrease_factor = 0.99;
            }
            Algorithm::Bsttwa => {
                cfg.window_n = 100;
                cfg.initial_buffer_ms = 750;
                cfg.offset_ms = 750;
            }
            Algorithm::Bsttd | Algorithm::Bsttda => {
                cfg.window_n = 600;
                cfg.initial_buffer_ms = 750;
                cfg.offset_ms = 350;
            }
            Algorithm::Bskf => {
                cfg.initial_buffer_ms = 750;
                cfg.offset_ms = 600;
            }
            Algorithm::Kslack => {
                cfg.scaling_factor_lambda = 0.8;
                cfg.initial_buffer_ms = 750;
            }
        }
        cfg
    }

    /// Parameter keys this algorithm actually reads.
    pub fn param_keys(&self) -> &'static [&'static str] {
        match self {
            Algorithm::Sba => &["static_buffer_ms"],
            Algorithm::Bstt => &[
                "initial_buffer_ms",
                "offset_ms",
                "threshold_ms",
                "increase_factor",
                "decrease_factor",
            ],
            Algorithm::Bsttwa | Algorithm::Bsttd | Algorithm::Bsttda => {
                &["window_n", "offset_ms", "initial_buffer_ms"]
            }
            Algorithm::Bskf => &[
                "offset_ms",
                "initial_buffer_ms",
                "kalman_q",
                "kalman_r",
                "kalman_p0",
            ],
            Algorithm::Kslack => &["scaling_factor_lambda", "initial_buffer_ms"],
        }
    }

    /// Compact `key=value;...` rendering of the relevant parameters.
    pub fn params_string(&self, cfg: &StrategyConfig) -> String {
        self.param_keys()
            .iter()
            .map(|&key| {
                let value = match key {
                    "initial_buffer_ms" => cfg.initial_buffer_ms.to_string(),
                    "offset_ms" => cfg.offset_ms.to_string(),
                    "window_n" => cfg.window_n.to_string(),
                    "increase_factor" => cfg.increase_factor.to_string(),
                    "decrease_factor" => cfg.decrease_factor.to_string(),
                    "threshold_ms" => cfg.threshold_ms.to_string(),
                    "scaling_factor_lambda" => cfg.scaling_factor_lambda.to_string(),
                    "static_buffer_ms" => cfg.static_buffer_ms.to_string(),
                    "kalman_q" => cfg.kalman_q.to_string(),
                    "kalman_r" => cfg.kalman_r.to_string(),
                    "kalman_p0" => cfg.kalman_p0.to_string(),
                    _ => unreachable!("param_keys lists known keys"),
                };
                format!("{key}={value}")
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Builds a fresh strategy instance from `cfg`.
    pub fn build(&self, cfg: &StrategyConfig) -> Result<Box<dyn SizingStrategy>> {
        cfg.validate()?;
        Ok(match self {
            Algorithm::Sba => Box::new(Sba {
                buffer_ms: cfg.static_buffer_ms,
            }),
            Algorithm::Bstt => Box::new(Bstt {
                current: cfg.initial_buffer_ms as f64,
                offset: cfg.offset_ms as f64,
                threshold: cfg.threshold_ms as f64,
                increase: cfg.increase_factor,
                decrease: cfg.decrease_factor,
            }),
            Algorithm::Bsttwa => Box::new(Bsttwa {
                window: TtWindow::new(cfg.window_n),
                offset: cfg.offset_ms as f64,
                initial: cfg.initial_buffer_ms,
            }),
            Algorithm::Bsttd => Box::new(Bsttd {
                window: TtWindow::new(cfg.window_n),
                offset: cfg.offset_ms,
                initial: cfg.initial_buffer_ms,
            }),
            Algorithm::Bsttda => Box::new(Bsttda {
                window: TtWindow::new(cfg.window_n),
                offset: cfg.offset_ms as f64,
                initial: cfg.initial_buffer_ms,
            }),
            Algorithm::Bskf => Box::new(Bskf::new(
                cfg.kalman_q,
                cfg.kalman_r,
                cfg.kalman_p0,
                cfg.offset_ms,
            )),
            Algorithm::Kslack => Box::new(Kslack::new(cfg.scaling_factor_lambda)),
        })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sba" => Ok(Algorithm::Sba),
            "bstt" => Ok(Algorithm::Bstt),
            "bsttwa" => Ok(Algorithm::Bsttwa),
            "bsttd" => Ok(Algorithm::Bsttd),
            "bsttda" => Ok(Algorithm::Bsttda),
            "bskf" => Ok(Algorithm::Bskf),
            "kslack" => Ok(Algorithm::Kslack),
            _ => Err(Error::UnknownAlgorithm(s.to_owned())),
        }
    }
}

/// Static buffer: always answers the configured buffer time.
pub struct Sba {
    buffer_ms: i64,
}

impl SizingStrategy for Sba {
    fn observe(&mut self, _tt_ms: i64) -> i64 {
        self.buffer_ms
    }
}

/// Single-transmission-time sizing: grows multiplicatively when the latest
/// transmission time overshoots the current buffer, shrinks multiplicatively
/// when it undershoots by more than the threshold, and otherwise holds.
pub struct Bstt {
    current: f64,
    offset: f64,
    threshold: f64,
    increase: f64,
    decrease: f64,
}

impl SizingStrategy for Bstt {
    fn observe(&mut self, tt_ms: i64) -> i64 {
        let excess = tt_ms as f64 - self.offset;
        if excess > self.current {
            self.current = self.current * self.increase + self.offset;
        } else if excess < self.current - self.threshold {
            self.current *= self.decrease;
        }
        round_half_up_ms(self.current)
    }
}

/// Weighted-average sizing: exponentially weighted mean of the window
/// (newest sample heaviest) plus an offset.
pub struct Bsttwa {
    window: TtWindow,
    offset: f64,
    initial: i64,
}

impl SizingStrategy for Bsttwa {
    fn observe(&mut self, tt_ms: i64) -> i64 {
        self.window.push(tt_ms);
        if self.window.len() < 2 {
            return self.initial;
        }
        round_half_up_ms(self.window.weighted_mean().expect("window not empty") + self.offset)
    }
}

/// Spread sizing: max minus min transmission time over the window, plus an
/// offset. Integer-exact.
pub struct Bsttd {
    window: TtWindow,
    offset: i64,
    initial: i64,
}

impl SizingStrategy for Bsttd {
    fn observe(&mut self, tt_ms: i64) -> i64 {
        self.window.push(tt_ms);
        if self.window.len() < 2 {
            return self.initial;
        }
        let max = self.window.max().expect("window not empty");
        let min = self.window.min().expect("window not empty");
        (max - min) + self.offset
    }
}

/// Spread-plus-average sizing: window mean as the long-term baseline, the
/// max-min spread as the current variance, plus an offset.
pub struct Bsttda {
    window: TtWindow,
    offset: f64,
    initial: i64,
}

impl SizingStrategy for Bsttda {
    fn observe(&mut self, tt_ms: i64) -> i64 {
        self.window.push(tt_ms);
        if self.window.len() < 2 {
            return self.initial;
        }
        let max = self.window.max().expect("window not empty");
        let min = self.window.min().expect("window not empty");
        let mean = self.window.mean().expect("window not empty");
        round_half_up_ms(mean + (max - min) as f64 + self.offset)
    }
}

/// Kalman-filter sizing: a scalar filter (unit transition and observation,
/// no control input) predicts the next transmission time; an offset is
/// added as the safety margin.
pub struct Bskf {
    estimate: Option<f64>,
    covariance: f64,
    q: f64,
    r: f64,
    p0: f64,
    offset: f64,
}

impl Bskf {
    pub fn new(q: f64, r: f64, p0: f64, offset_ms: i64) -> Self {
        Self {
            estimate: None,
            covariance: 0.0,
            q,
            r,
            p0,
            offset: offset_ms as f64,
        }
    }

    /// Current state estimate, if initialized.
    pub fn estimate(&self) -> Option<f64> {
        self.estimate
    }
}

impl SizingStrategy for Bskf {
    fn observe(&mut self, tt_ms: i64) -> i64 {
        let z = tt_ms as f64;
        let x = match self.estimate {
            None => {
                self.covariance = self.p0;
                z
            }
            Some(x) => {
                let p_pred = self.covariance + self.q;
                let gain = p_pred / (p_pred + self.r);
                self.covariance = (1.0 - gain) * p_pred;
                x + gain * (z - x)
            }
        };
        self.estimate = Some(x);
        round_half_up_ms(x + self.offset)
    }
}

/// Dynamic K-slack sizing: the maximum transmission time over all
/// observations plus the scaled sample standard deviation of all
/// observations. History is unbounded.
pub struct Kslack {
    max_tt: Option<i64>,
    count: u64,
    mean: f64,
    m2: f64,
    lambda: f64,
}

impl Kslack {
    pub fn new(lambda: f64) -> Self {
        Self {
            max_tt: None,
            count: 0,
            mean: 0.0,
            m2: 0.0,
            lambda,
        }
    }

    /// Running maximum transmission time; never decreases.
    pub fn max_tt(&self) -> Option<i64> {
        self.max_tt
    }
}

impl SizingStrategy for Kslack {
    fn observe(&mut self, tt_ms: i64) -> i64 {
        self.max_tt = Some(self.max_tt.map_or(tt_ms, |m| m.max(tt_ms)));
        // Welford update over all observations.
        self.count += 1;
        let delta = tt_ms as f64 - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (tt_ms as f64 - self.mean);
        let sigma = if self.count >= 2 {
            (self.m2 / (self.count - 1) as f64).sqrt()
        } else {
            0.0
        };
        round_half_up_ms(self.max_tt.expect("just set") as f64 + sigma * self.lambda)
    }
}

/// Nearest-rank percentile: the `ceil(fraction * n)`-th order statistic.
/// `sorted` must be ascending and non-empty.
pub fn nearest_rank(sorted: &[i64], fraction: f64) -> i64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    let rank = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

/// Starting parameters derived from a recorded sample, one configuration
/// per algorithm. Built from the 98th percentile of the sample's full
/// processing times.
#[derive(Debug, Clone)]
pub struct SuggestedParams {
    pub p98_fpt_ms: i64,
    pub sba: StrategyConfig,
    pub bstt: StrategyConfig,
    pub bsttwa: StrategyConfig,
    pub bsttd: StrategyConfig,
    pub bsttda: StrategyConfig,
    pub bskf: StrategyConfig,
    pub kslack: StrategyConfig,
}

impl SuggestedParams {
    pub fn config(&self, algo: Algorithm) -> &StrategyConfig {
        match algo {
            Algorithm::Sba => &self.sba,
            Algorithm::Bstt => &self.bstt,
            Algorithm::Bsttwa => &self.bsttwa,
            Algorithm::Bsttd => &self.bsttd,
            Algorithm::Bsttda => &self.bsttda,
            Algorithm::Bskf => &self.bskf,
            Algorithm::Kslack => &self.kslack,
        }
    }
}

/// Derives starting parameters for every algorithm from a recorded sample
/// (around 5,000 events works well). The common initial buffer is five
/// times the 98th percentile of full processing time; per-algorithm
/// offsets and window lengths follow fixed multiples of that percentile.
pub fn suggest_params(sample: &[Event]) -> Result<SuggestedParams> {
    if sample.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut fpts: Vec<i64> = sample.iter().map(Event::full_proc_ms).collect();
    fpts.sort_unstable();
    let p98 = nearest_rank(&fpts, 0.98);

    let base = |initial: i64| StrategyConfig {
        initial_buffer_ms: initial,
        ..StrategyConfig::default()
    };

    let mut sba = base(p98 * 5);
    sba.static_buffer_ms = p98 * 6;

    let mut bstt = base(p98 * 5);
    bstt.offset_ms = p98 * 3;
    bstt.threshold_ms = 100;
    bstt.increase_factor = 2.0;
    bstt.decrease_factor = 0.99;

    let mut bsttwa = base(p98 * 5);
    bsttwa.window_n = 100;
    bsttwa.offset_ms = p98 * 4;

    let mut bsttd = base(p98 * 5);
    bsttd.window_n = 600;
    bsttd.offset_ms = p98 * 2;

    let mut bsttda = base(p98 * 5);
    bsttda.window_n = 600;
    bsttda.offset_ms = p98;

    let mut bskf = base(p98 * 5);
    bskf.offset_ms = p98 * 4;

    let mut kslack = base(p98 * 4);
    kslack.scaling_factor_lambda = 0.8;

    Ok(SuggestedParams {
        p98_fpt_ms: p98,
        sba,
        bstt,
        bsttwa,
        bsttd,
        bsttda,
        bskf,
        kslack,
    })
}
