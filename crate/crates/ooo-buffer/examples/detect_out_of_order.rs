//! Out-of-order detection on a small hand-built stream.
//!
//! Two producers report observations; network delays shuffle them on the
//! way to the fusion center. Detection runs in arrival order and flags
//! events that arrive after a later observation already did.

use ooo_buffer::event::{Event, detect_ooo_flags, sort_arrival_order};

fn event(producer: &str, seq: u64, dt: i64, delay: i64) -> Event {
    Event {
        producer_id: producer.to_owned(),
        seq_id: seq,
        dt,
        cst: dt + 2,
        srect: dt + delay,
        srest: dt + delay + 1,
        crt: dt + delay + 15,
        payload_bytes: 64,
    }
}

fn main() {
    let mut events = vec![
        event("cam", 1, 100, 30),
        event("cam", 2, 200, 250), // stalls on the network
        event("cam", 3, 300, 20),
        event("lidar", 1, 150, 40),
        event("lidar", 2, 250, 35),
    ];
    sort_arrival_order(&mut events);

    println!(
        "{:<8} {:>4} {:>6} {:>7}  {:>6} {:>6}",
        "producer", "seq", "dt", "arrive", "ooo_dt", "ooo_seq"
    );
    let flags = detect_ooo_flags(&events);
    for (e, f) in events.iter().zip(&flags) {
        println!(
            "{:<8} {:>4} {:>6} {:>7}  {:>6} {:>6}",
            e.producer_id, e.seq_id, e.dt, e.srect, f.ooo_by_dt, f.ooo_by_seq
        );
    }

    let durations = events[0].durations().unwrap();
    println!(
        "\nfirst arrival: transmission {} ms, round trip {} ms, full processing {} ms",
        durations.transmission_ms, durations.rtt_ms, durations.full_proc_ms
    );
}
