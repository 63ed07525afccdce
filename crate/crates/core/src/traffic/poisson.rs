use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::{draw_packets, CycleArrivals, PacketSizing, TraceKind, TrafficTrace};

/// Packet size used by the analytic model (10^4 bits).
const ANALYTIC_PACKET_BYTES: u32 = 1250;

/// I.i.d. Poisson(`lambda * cycle_length`) packet counts of fixed 1250-byte
/// packets, the same sizing the analytic chain assumes.
pub fn poisson_trace(lambda: f64, cycles: usize, cycle_length: f64, seed: u64) -> TrafficTrace {
    poisson_trace_with(
        lambda,
        cycles,
        cycle_length,
        seed,
        PacketSizing::Fixed(ANALYTIC_PACKET_BYTES),
        false,
    )
}

pub fn poisson_trace_with(
    lambda: f64,
    cycles: usize,
    cycle_length: f64,
    seed: u64,
    sizing: PacketSizing,
    keep_lengths: bool,
) -> TrafficTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = lambda * cycle_length;
    let dist = (mean > 0.0).then(|| Poisson::new(mean).expect("positive finite mean"));
    let arrivals = (0..cycles)
        .map(|_| match &dist {
            Some(d) => {
                let count = d.sample(&mut rng) as u64;
                draw_packets(count, sizing, keep_lengths, &mut rng)
            }
            None => CycleArrivals::new(0, 0),
        })
        .collect();
    TrafficTrace {
        cycle_length,
        kind: TraceKind::Poisson,
        seed,
        arrivals,
    }
}
