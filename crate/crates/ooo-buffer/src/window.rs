//! Sliding window over transmission times with O(1) rolling statistics.
//!
//! Max and min use monotonic deques; the mean uses a running sum; the
//! exponentially weighted mean is kept incrementally in a halved-weight
//! form (the newest sample has weight 1 and every older sample's weight
//! halves), which is the printed power-of-two weighting with numerator
//! and denominator both divided by the largest weight. That keeps the
//! arithmetic in ordinary f64 range for any window length.

use std::collections::VecDeque;

/// Ring of the most recent transmission times, newest last.
#[derive(Debug)]
pub struct TtWindow {
    cap: usize,
    samples: VecDeque<i64>,
    sum: i64,
    /// (index, value); values decreasing front-to-back, front holds the max.
    max_deque: VecDeque<(u64, i64)>,
    /// (index, value); values increasing front-to-back, front holds the min.
    min_deque: VecDeque<(u64, i64)>,
    /// Count of samples ever pushed; used to expire deque entries.
    pushed: u64,
    /// Weighted numerator in halved-weight form.
    weighted_num: f64,
    /// Weight of the oldest slot when the window is full: 0.5^(cap-1).
    tail_weight: f64,
}

impl TtWindow {
    /// Creates a window holding up to `cap` samples. `cap` must be >= 1.
    pub fn new(cap: usize) -> Self {
        assert!(cap >= 1, "window length must be at least 1");
        Self {
            cap,
            samples: VecDeque::with_capacity(cap),
            sum: 0,
            max_deque: VecDeque::new(),
            min_deque: VecDeque::new(),
            pushed: 0,
            weighted_num: 0.0,
            tail_weight: 0.5f64.powi(cap as i32 - 1),
        }
    }

    /// Pushes a sample, evicting the oldest when full.
    pub fn push(&mut self, tt: i64) {
        if self.samples.len() == self.cap {
            let evicted = self.samples.pop_front().expect("window is full");
            self.sum -= evicted;
            self.weighted_num -= evicted as f64 * self.tail_weight;
        }
        self.weighted_num = 0.5 * self.weighted_num + tt as f64;
        self.samples.push_back(tt);
        self.sum += tt;

        let idx = self.pushed;
        self.pushed += 1;
        while self.max_deque.back().is_some_and(|&(_, v)| v <= tt) {
            self.max_deque.pop_back();
        }
        self.max_deque.push_back((idx, tt));
        while self.min_deque.back().is_some_and(|&(_, v)| v >= tt) {
            self.min_deque.pop_back();
        }
        self.min_deque.push_back((idx, tt));

        // Expire entries that slid out of the window.
        let oldest_live = self.pushed.saturating_sub(self.cap as u64);
        while self
            .max_deque
            .front()
            .is_some_and(|&(i, _)| i < oldest_live)
        {
            self.max_deque.pop_front();
        }
        while self
            .min_deque
            .front()
            .is_some_and(|&(i, _)| i < oldest_live)
        {
            self.min_deque.pop_front();
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Largest sample in the window.
    pub fn max(&self) -> Option<i64> {
        self.max_deque.front().map(|&(_, v)| v)
    }

    /// Smallest sample in the window.
    pub fn min(&self) -> Option<i64> {
        self.min_deque.front().map(|&(_, v)| v)
    }

    /// Arithmetic mean of the window.
    pub fn mean(&self) -> Option<f64> {
        if self.samples.is_empty() {
            None
        } else {
            Some(self.sum as f64 / self.samples.len() as f64)
        }
    }

    /// Exponentially weighted mean: newest sample weight 1, each older
    /// sample half the previous.
    pub fn weighted_mean(&self) -> Option<f64> {
        let n = self.samples.len();
        if n == 0 {
            return None;
        }
        // Geometric series 1 + 1/2 + ... + 0.5^(n-1).
        let den = 2.0 - 0.5f64.powi(n as i32 - 1);
        Some(self.weighted_num / den)
    }

    /// Window contents, oldest first.
    pub fn samples(&self) -> impl Iterator<Item = i64> + '_ {
        self.samples.iter().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_weighted_mean(window_oldest_first: &[i64]) -> f64 {
        // Published weighting: w_i = 2^(n-i)/n with i = 1 the newest.
        let n = window_oldest_first.len();
        let mut num = 0.0;
        let mut den = 0.0;
        for (age, &tt) in window_oldest_first.iter().rev().enumerate() {
            let w = 2f64.powi((n - 1 - age) as i32) / n as f64;
            num += tt as f64 * w;
            den += w;
        }
        num / den
    }

    #[test]
    fn rolling_stats_match_full_rescan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut win = TtWindow::new(37);
        let mut naive: Vec<i64> = Vec::new();
        for _ in 0..10_000 {
            let tt = rng.random_range(0..5_000);
            win.push(tt);
            naive.push(tt);
            let lo = naive.len().saturating_sub(37);
            let view = &naive[lo..];
            assert_eq!(win.max(), view.iter().max().copied());
            assert_eq!(win.min(), view.iter().min().copied());
            let mean = view.iter().sum::<i64>() as f64 / view.len() as f64;
            assert!((win.mean().unwrap() - mean).abs() <= 1e-9 * mean.abs().max(1.0));
            let wm = naive_weighted_mean(view);
            assert!(
                (win.weighted_mean().unwrap() - wm).abs() <= 1e-9 * wm.abs().max(1.0),
                "weighted mean diverged: {} vs {}",
                win.weighted_mean().unwrap(),
                wm
            );
        }
    }

    #[test]
    fn weighted_mean_constant_stream_stays_pinned() {
        let mut win = TtWindow::new(100);
        for _ in 0..10_000 {
            win.push(125);
            let wm = win.weighted_mean().unwrap();
            assert!((wm - 125.0).abs() <= 1e-9 * 125.0, "drifted to {wm}");
        }
    }

    #[test]
    fn weighted_mean_prefers_newest() {
        // Newest-first [200, 100, 100] with weights 4:2:1 -> 1100/7.
        let mut win = TtWindow::new(3);
        win.push(100);
        win.push(100);
        win.push(200);
        let expect = 1100.0 / 7.0;
        assert!((win.weighted_mean().unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn single_sample_window() {
        let mut win = TtWindow::new(5);
        win.push(300);
        assert_eq!(win.max(), Some(300));
        assert_eq!(win.min(), Some(300));
        assert_eq!(win.mean(), Some(300.0));
        assert_eq!(win.weighted_mean(), Some(300.0));
    }

    #[test]
    fn eviction_drops_oldest() {
        let mut win = TtWindow::new(2);
        win.push(10);
        win.push(20);
        win.push(5);
        assert_eq!(win.samples().collect::<Vec<_>>(), vec![20, 5]);
        assert_eq!(win.max(), Some(20));
        assert_eq!(win.min(), Some(5));
    }
}
