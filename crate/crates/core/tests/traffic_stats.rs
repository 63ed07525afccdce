mod common;

use std::fs::File;

use common::dispersion;
use pon_sleep::model::GIGA;
use pon_sleep::traffic::{estimate_hurst, poisson_trace, self_similar_trace, TrafficTrace};

#[test]
fn poisson_counts_are_equidispersed() {
    let t = poisson_trace(2e5, 50_000, 2e-3, 8);
    let d = dispersion(&t.count_series());
    assert!((0.95..=1.05).contains(&d), "dispersion {d}");
    let mean = t.total_packets() as f64 / t.len() as f64;
    assert!((mean / 400.0 - 1.0).abs() < 0.01);
}

#[test]
fn self_similar_is_more_dispersed_than_poisson() {
    let ss = self_similar_trace(5.0 * GIGA, 0.8, 1 << 14, 2e-3, 1).unwrap();
    let h = estimate_hurst(&ss).unwrap();
    assert!(h > 0.7, "H = {h}");
}

#[test]
fn trace_csv_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let t = self_similar_trace(1.0 * GIGA, 0.75, 300, 2e-3, 9).unwrap();
    t.write_csv(File::create(&path).unwrap()).unwrap();
    let back = TrafficTrace::read_csv(File::open(&path).unwrap(), 2e-3).unwrap();
    assert_eq!(back.byte_series(), t.byte_series());
    assert_eq!(back.count_series(), t.count_series());
}
