//! Event model: timestamps, derived durations, and out-of-order detection.
//!
//! An [`Event`] is one observation from one producer, carrying the five
//! timestamps collected along its path to the fusion center. All timestamps
//! are integer milliseconds since the Unix epoch; durations derived from them
//! are integer milliseconds too, so ordering decisions never touch floats.
//!
//! Two notions of "out of order" exist side by side:
//!
//! * by sequence ID, scoped to a single producer;
//! * by detection time, across all producers (the one the buffer compensates).
//!
//! Both detectors are single-pass and keep only running maxima.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// One producer observation.
///
/// Timestamp order within a valid event: `dt <= cst <= srect <= srest <= crt`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    /// Opaque identifier of the event producer.
    pub producer_id: String,
    /// Strictly increasing per producer.
    pub seq_id: u64,
    /// Detection time: when the producer observed the event.
    pub dt: i64,
    /// Client send time: when the message left the producer.
    pub cst: i64,
    /// Server receive time: when the fusion center received the event.
    pub srect: i64,
    /// Server response time: when the server finished processing.
    pub srest: i64,
    /// Client receive time: when the producer got the response.
    pub crt: i64,
    /// Net payload size in bytes.
    pub payload_bytes: u64,
}

/// Durations derived from an event's timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Durations {
    /// `cst - dt`: time to prepare the message on the producer.
    pub message_prep_ms: i64,
    /// `srest - srect`: server-side processing time.
    pub server_proc_ms: i64,
    /// `srect - dt`: detection-to-server-receipt (tt), the signal the
    /// sizing strategies consume.
    pub transmission_ms: i64,
    /// `(srect - cst) + (crt - srest)`: time spent on the network.
    pub rtt_ms: i64,
    /// `crt - dt`: full processing time (fpt).
    pub full_proc_ms: i64,
}

/// Out-of-order flags for one event, relative to what arrived before it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OooFlags {
    /// Late relative to a higher seq_id of the same producer.
    pub ooo_by_seq: bool,
    /// Late relative to a higher dt of any producer.
    pub ooo_by_dt: bool,
}

impl Event {
    /// Checks the timestamp ordering invariants.
    pub fn validate(&self) -> Result<()> {
        let chain = [
            ("dt <= cst", self.dt <= self.cst),
            ("cst <= srect", self.cst <= self.srect),
            ("srect <= srest", self.srect <= self.srest),
            ("srest <= crt", self.srest <= self.crt),
        ];
        for (name, ok) in chain {
            if !ok {
                return Err(Error::InvalidEvent {
                    producer_id: self.producer_id.clone(),
                    seq_id: self.seq_id,
                    detail: format!("{name} violated"),
                });
            }
        }
        Ok(())
    }

    /// Derives all durations, rejecting events with inverted timestamps.
    pub fn durations(&self) -> Result<Durations> {
        self.validate()?;
        Ok(Durations {
            message_prep_ms: self.cst - self.dt,
            server_proc_ms: self.srest - self.srect,
            transmission_ms: self.srect - self.dt,
            rtt_ms: (self.srect - self.cst) + (self.crt - self.srest),
            full_proc_ms: self.crt - self.dt,
        })
    }

    /// Transmission time without revalidation. Callers must hold a
    /// validated event; the value is negative otherwise.
    pub fn transmission_ms(&self) -> i64 {
        self.srect - self.dt
    }

    /// Full processing time without revalidation.
    pub fn full_proc_ms(&self) -> i64 {
        self.crt - self.dt
    }

    /// Key defining fusion-center arrival order: ascending `srect`, ties
    /// broken by `(producer_id, seq_id)` for a deterministic total order.
    pub fn arrival_key(&self) -> (i64, &str, u64) {
        (self.srect, self.producer_id.as_str(), self.seq_id)
    }
}

/// Sorts events into fusion-center arrival order.
pub fn sort_arrival_order(events: &mut [Event]) {
    events.sort_by(|a, b| a.arrival_key().cmp(&b.arrival_key()));
}

/// Streaming detector for out-of-order-by-dt: an event is late when some
/// earlier arrival (any producer) carried a strictly higher detection time.
/// Equal detection times count as correctly ordered.
#[derive(Debug, Default)]
pub struct OooByDtDetector {
    max_dt: Option<i64>,
}

impl OooByDtDetector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Observes the next arrival and reports whether it is out of order.
    pub fn observe(&mut self, dt: i64) -> bool {
        let late = self.max_dt.is_some_and(|m| dt < m);
        if self.max_dt.is_none_or(|m| dt > m) {
            self.max_dt = Some(dt);
        }
        late
    }
}

/// Streaming detector for out-of-order-by-seq, scoped per producer.
#[derive(Debug, Default)]
pub struct OooBySeqDetector {
    max_seq: HashMap<String, u64>,
}

impl OooBySeqDetector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, producer_id: &str, seq_id: u64) -> bool {
        match self.max_seq.get_mut(producer_id) {
            Some(max) => {
                let late = seq_id < *max;
                if seq_id > *max {
                    *max = seq_id;
                }
                late
            }
            None => {
                self.max_seq.insert(producer_id.to_owned(), seq_id);
                false
            }
        }
    }
}

/// Flags every event that arrives after a higher detection time.
///
/// `events` must be in arrival order.
pub fn detect_ooo_by_dt(events: &[Event]) -> Vec<bool> {
    let mut det = OooByDtDetector::new();
    events.iter().map(|e| det.observe(e.dt)).collect()
}

/// Flags every event that arrives after a higher seq_id of its own producer.
///
/// `events` must be in arrival order.
pub fn detect_ooo_by_seq(events: &[Event]) -> Vec<bool> {
    let mut det = OooBySeqDetector::new();
    events
        .iter()
        .map(|e| det.observe(&e.producer_id, e.seq_id))
        .collect()
}

/// Both flags per event, in one pass.
pub fn detect_ooo_flags(events: &[Event]) -> Vec<OooFlags> {
    let mut dt_det = OooByDtDetector::new();
    let mut seq_det = OooBySeqDetector::new();
    events
        .iter()
        .map(|e| OooFlags {
            ooo_by_seq: seq_det.observe(&e.producer_id, e.seq_id),
            ooo_by_dt: dt_det.observe(e.dt),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn ev(producer: &str, seq: u64, dt: i64, srect: i64) -> Event {
        Event {
            producer_id: producer.to_owned(),
            seq_id: seq,
            dt,
            cst: dt,
            srect,
            srest: srect,
            crt: srect,
            payload_bytes: 0,
        }
    }

    #[test]
    fn durations_direct_subtraction() {
        let e = Event {
            producer_id: "a".into(),
            seq_id: 1,
            dt: 100,
            cst: 110,
            srect: 150,
            srest: 155,
            crt: 160,
            payload_bytes: 0,
        };
        let d = e.durations().unwrap();
        assert_eq!(d.transmission_ms, 50);
        assert_eq!(d.full_proc_ms, 60);
        assert_eq!(d.rtt_ms, 45);
        assert_eq!(d.message_prep_ms, 10);
        assert_eq!(d.server_proc_ms, 5);
        assert_eq!(
            d.full_proc_ms,
            d.message_prep_ms + d.rtt_ms + d.server_proc_ms
        );
    }

    #[test]
    fn durations_all_equal_timestamps() {
        let e = ev("a", 1, 42, 42);
        let d = e.durations().unwrap();
        assert_eq!(
            d,
            Durations {
                message_prep_ms: 0,
                server_proc_ms: 0,
                transmission_ms: 0,
                rtt_ms: 0,
                full_proc_ms: 0,
            }
        );
    }

    #[test]
    fn durations_reject_inverted_timestamps() {
        let mut e = ev("a", 1, 100, 150);
        e.cst = 90; // before dt
        assert!(matches!(e.durations(), Err(Error::InvalidEvent { .. })));
    }

    #[test]
    fn seq_detection_in_order() {
        let events: Vec<Event> = [1, 2, 3]
            .iter()
            .enumerate()
            .map(|(i, &s)| ev("a", s, i as i64, i as i64))
            .collect();
        assert_eq!(detect_ooo_by_seq(&events), vec![false, false, false]);
    }

    #[test]
    fn seq_detection_flags_lower_after_higher() {
        let events = vec![ev("a", 1, 0, 0), ev("a", 3, 1, 1), ev("a", 2, 2, 2)];
        assert_eq!(detect_ooo_by_seq(&events), vec![false, false, true]);
    }

    #[test]
    fn seq_detection_is_per_producer() {
        // Interleaved producers, each internally in order.
        let events = vec![
            ev("a", 1, 0, 0),
            ev("b", 1, 1, 1),
            ev("a", 2, 2, 2),
            ev("b", 2, 3, 3),
        ];
        assert_eq!(detect_ooo_by_seq(&events), vec![false; 4]);
    }

    #[test]
    fn dt_detection_flags_lower_after_higher() {
        let events = vec![ev("a", 1, 10, 0), ev("a", 2, 20, 1), ev("a", 3, 15, 2)];
        assert_eq!(detect_ooo_by_dt(&events), vec![false, false, true]);
    }

    #[test]
    fn dt_detection_equal_dts_are_in_order() {
        let events = vec![ev("a", 1, 10, 0), ev("b", 1, 10, 1), ev("c", 1, 10, 2)];
        assert_eq!(detect_ooo_by_dt(&events), vec![false, false, false]);
    }

    #[test]
    fn dt_sorted_stream_has_no_flags() {
        let events: Vec<Event> = (0..100).map(|i| ev("a", i as u64, i, i + 5)).collect();
        assert!(detect_ooo_by_dt(&events).iter().all(|&f| !f));
    }

    #[test]
    fn flags_ignore_payload() {
        let mut a = vec![ev("a", 1, 10, 0), ev("a", 2, 5, 1)];
        let base = detect_ooo_flags(&a);
        for e in &mut a {
            e.payload_bytes = 9999;
        }
        assert_eq!(detect_ooo_flags(&a), base);
    }

    #[test]
    fn matches_pairwise_oracle_small() {
        // Brute-force O(n^2) pairwise definition on a fixed awkward stream.
        let events = vec![
            ev("a", 1, 50, 0),
            ev("b", 1, 40, 1),
            ev("a", 3, 60, 2),
            ev("a", 2, 55, 3),
            ev("b", 2, 60, 4),
            ev("b", 3, 30, 5),
        ];
        let got = detect_ooo_flags(&events);
        for (j, e_j) in events.iter().enumerate() {
            let by_dt = events[..j].iter().any(|e_i| e_i.dt > e_j.dt);
            let by_seq = events[..j]
                .iter()
                .any(|e_i| e_i.producer_id == e_j.producer_id && e_i.seq_id > e_j.seq_id);
            assert_eq!(got[j].ooo_by_dt, by_dt, "dt flag at {j}");
            assert_eq!(got[j].ooo_by_seq, by_seq, "seq flag at {j}");
        }
    }

    #[test]
    fn matches_pairwise_oracle_on_long_stream() {
        // 5,000 pseudo-random arrivals, checked against the quadratic
        // pairwise definition.
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let events: Vec<Event> = (0..5_000u64)
            .map(|i| {
                let producer = format!("p{}", next() % 7);
                let dt = (i * 10) as i64;
                ev(&producer, i, dt, dt + (next() % 400) as i64)
            })
            .collect();
        let mut arrival = events.clone();
        sort_arrival_order(&mut arrival);
        let got = detect_ooo_flags(&arrival);
        for (j, e_j) in arrival.iter().enumerate() {
            let by_dt = arrival[..j].iter().any(|e_i| e_i.dt > e_j.dt);
            let by_seq = arrival[..j]
                .iter()
                .any(|e_i| e_i.producer_id == e_j.producer_id && e_i.seq_id > e_j.seq_id);
            assert_eq!(
                got[j],
                OooFlags {
                    ooo_by_seq: by_seq,
                    ooo_by_dt: by_dt
                },
                "at {j}"
            );
        }
    }

    #[test]
    fn arrival_sort_is_total_and_stable_on_key() {
        let mut events = vec![ev("b", 1, 0, 10), ev("a", 1, 0, 10), ev("a", 2, 0, 5)];
        sort_arrival_order(&mut events);
        let keys: Vec<_> = events.iter().map(|e| e.arrival_key()).collect();
        assert_eq!(keys, vec![(5, "a", 2), (10, "a", 1), (10, "b", 1)]);
    }
}
