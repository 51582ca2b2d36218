use crate::par;
use crate::rng;

use super::model::FrailtyModel;

pub const TRUTH_DRAWS: usize = 10_000_000;
pub const TRUTH_SEED: u64 = 0x7EA1_0000_5EED;
const CHUNK: usize = 100_000;

/// `P(T1/T0 > r)` by Monte Carlo with [`TRUTH_DRAWS`] draws and a fixed seed.
pub fn true_survival(model: &FrailtyModel, r: f64) -> f64 {
    true_survival_many(model, &[r], TRUTH_DRAWS, TRUTH_SEED)[0]
}

/// Monte Carlo `P(T1/T0 > r)` at several thresholds from one set of draws.
pub fn true_survival_many(model: &FrailtyModel, rs: &[f64], draws: usize, seed: u64) -> Vec<f64> {
    let sampler = model.sampler();
    let chunks = draws.div_ceil(CHUNK);
    let counts = par::map_indexed(chunks, |c| {
        let mut g = rng::stream(seed, c as u64);
        let m = CHUNK.min(draws - c * CHUNK);
        let mut hits = vec![0u64; rs.len()];
        for _ in 0..m {
            let (t0, t1) = sampler.sample(&mut g);
            let q = t1 / t0;
            for (h, &r) in hits.iter_mut().zip(rs) {
                *h += (q > r) as u64;
            }
        }
        hits
    });
    rs.iter()
        .enumerate()
        .map(|(k, &r)| {
            if r <= 0.0 {
                return 1.0;
            }
            counts.iter().map(|h| h[k]).sum::<u64>() as f64 / draws as f64
        })
        .collect()
}
