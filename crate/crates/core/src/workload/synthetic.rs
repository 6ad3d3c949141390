use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, Normal};

use super::{Pattern, TraceRecord, WorkloadSpec};
use crate::{Error, Result};

fn rng(spec: &WorkloadSpec) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(spec.seed)
}

/// Per-node, per-cycle probability of starting a message.
fn start_probability(spec: &WorkloadSpec) -> f64 {
    (spec.rate / spec.msg_flits as f64).min(1.0)
}

/// Bernoulli injection at every node, destination picked by `dest`.
fn bernoulli<F>(
    spec: &WorkloadSpec,
    n: usize,
    horizon: u64,
    mut dest: F,
) -> Result<Vec<TraceRecord>>
where
    F: FnMut(&mut ChaCha8Rng, usize) -> usize,
{
    spec.check()?;
    let p = start_probability(spec);
    let mut out = Vec::new();
    if p == 0.0 {
        return Ok(out);
    }
    let mut rng = rng(spec);
    for cycle in 0..horizon {
        for src in 0..n {
            if rng.random_bool(p) {
                let dst = dest(&mut rng, src);
                out.push(TraceRecord {
                    cycle,
                    src,
                    dst,
                    n_flits: spec.msg_flits,
                });
            }
        }
    }
    Ok(out)
}

pub fn gen_uniform(spec: &WorkloadSpec, n: usize, horizon: u64) -> Result<Vec<TraceRecord>> {
    bernoulli(spec, n, horizon, |rng, _| rng.random_range(0..n))
}

/// Poisson arrivals per node: exponential gaps with mean `msg_flits / rate`,
/// floored to whole cycles. Several messages may share a cycle.
pub fn gen_exponential(spec: &WorkloadSpec, n: usize, horizon: u64) -> Result<Vec<TraceRecord>> {
    spec.check()?;
    let mut out = Vec::new();
    let p = start_probability(spec);
    if p == 0.0 {
        return Ok(out);
    }
    let gap = Exp::new(p).expect("positive rate");
    let mut rng = rng(spec);
    for src in 0..n {
        let mut t = gap.sample(&mut rng);
        while (t as u64) < horizon {
            out.push(TraceRecord {
                cycle: t as u64,
                src,
                dst: rng.random_range(0..n),
                n_flits: spec.msg_flits,
            });
            t += gap.sample(&mut rng);
        }
    }
    out.sort_by_key(|r| (r.cycle, r.src));
    Ok(out)
}

/// Destinations spread as a Gaussian around the source index (mod `n`).
pub fn gen_normal(spec: &WorkloadSpec, n: usize, horizon: u64) -> Result<Vec<TraceRecord>> {
    let sigma = match spec.pattern {
        Pattern::Normal { sigma } => sigma.unwrap_or(n as f64 / 8.0),
        _ => n as f64 / 8.0,
    };
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::NonPositiveSigma(sigma));
    }
    let offset = Normal::new(0.0, sigma).expect("valid sigma");
    bernoulli(spec, n, horizon, |rng, src| {
        let d = (src as f64 + offset.sample(rng)).round() as i64;
        d.rem_euclid(n as i64) as usize
    })
}

/// Sources and destinations drawn from weighted categorical distributions;
/// the expected number of new messages per cycle is `n * rate / msg_flits`.
pub fn gen_hotspot(spec: &WorkloadSpec, n: usize, horizon: u64) -> Result<Vec<TraceRecord>> {
    let Pattern::Hotspot(h) = &spec.pattern else {
        return Err(Error::Config(
            "hotspot generator needs a hotspot pattern".into(),
        ));
    };
    let (src_w, dst_w) = h.weights(n)?;
    spec.check()?;
    let src_dist = WeightedIndex::new(&src_w).map_err(|_| Error::BadWeights)?;
    let dst_dist = WeightedIndex::new(&dst_w).map_err(|_| Error::BadWeights)?;
    let p = start_probability(spec);
    let mut out = Vec::new();
    if p == 0.0 {
        return Ok(out);
    }
    let mut rng = rng(spec);
    let mut batch = Vec::new();
    for cycle in 0..horizon {
        batch.clear();
        for _ in 0..n {
            if rng.random_bool(p) {
                batch.push(TraceRecord {
                    cycle,
                    src: src_dist.sample(&mut rng),
                    dst: dst_dist.sample(&mut rng),
                    n_flits: spec.msg_flits,
                });
            }
        }
        batch.sort_by_key(|r| r.src);
        out.extend_from_slice(&batch);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::{HotspotPreset, HotspotSpec};

    fn offered(records: &[TraceRecord], n: usize, horizon: u64) -> f64 {
        let flits: usize = records.iter().map(|r| r.n_flits).sum();
        flits as f64 / (n as f64 * horizon as f64)
    }

    #[test]
    fn zero_rate_is_empty() {
        for pattern in [
            Pattern::Uniform,
            Pattern::Exponential,
            Pattern::Normal { sigma: None },
            Pattern::Hotspot(HotspotSpec::preset(HotspotPreset::FftProxy)),
        ] {
            let spec = WorkloadSpec::new(pattern, 0.0);
            assert!(spec.generate(32, 1000).unwrap().is_empty());
        }
    }

    #[test]
    fn rate_out_of_range() {
        for rate in [-0.1, 1.5, f64::NAN] {
            let spec = WorkloadSpec::new(Pattern::Uniform, rate);
            assert!(matches!(
                spec.generate(8, 10),
                Err(Error::RateOutOfRange(_))
            ));
        }
        let mut spec = WorkloadSpec::new(Pattern::Uniform, 0.5);
        spec.msg_flits = 0;
        assert!(matches!(spec.generate(8, 10), Err(Error::ZeroFlits)));
    }

    #[test]
    fn full_rate_offered_load() {
        let spec = WorkloadSpec::new(Pattern::Uniform, 1.0).with_seed(3);
        let recs = spec.generate(32, 1000).unwrap();
        assert!((offered(&recs, 32, 1000) - 1.0).abs() <= 0.05);
    }

    #[test]
    fn sigma_must_be_positive() {
        for sigma in [0.0, -1.0] {
            let spec = WorkloadSpec::new(Pattern::Normal { sigma: Some(sigma) }, 0.2);
            assert!(matches!(
                spec.generate(32, 10),
                Err(Error::NonPositiveSigma(_))
            ));
        }
    }

    #[test]
    fn tiny_sigma_stays_local() {
        let spec = WorkloadSpec::new(Pattern::Normal { sigma: Some(1e-9) }, 0.5);
        let recs = spec.generate(32, 500).unwrap();
        assert!(!recs.is_empty());
        assert!(recs.iter().all(|r| r.dst == r.src));
    }

    #[test]
    fn hotspot_rejects_bad_weights() {
        let mut h = HotspotSpec::preset(HotspotPreset::FftProxy);
        h.factor = 0.0;
        let spec = WorkloadSpec::new(Pattern::Hotspot(h), 0.2);
        assert!(matches!(spec.generate(32, 10), Err(Error::BadWeights)));

        let h = HotspotSpec {
            src_weights: Some(vec![1.0; 32]),
            dst_weights: Some(vec![-1.0; 32]),
            ..HotspotSpec::default()
        };
        let spec = WorkloadSpec::new(Pattern::Hotspot(h), 0.2);
        assert!(matches!(spec.generate(32, 10), Err(Error::BadWeights)));
    }

    #[test]
    fn generators_are_sorted_and_in_range() {
        for pattern in [
            Pattern::Uniform,
            Pattern::Exponential,
            Pattern::Normal { sigma: Some(3.0) },
            Pattern::Hotspot(HotspotSpec::preset(HotspotPreset::WaternsqProxy)),
        ] {
            let recs = WorkloadSpec::new(pattern, 0.4).generate(32, 2000).unwrap();
            assert!(recs
                .windows(2)
                .all(|w| (w[0].cycle, w[0].src) <= (w[1].cycle, w[1].src)));
            assert!(recs
                .iter()
                .all(|r| r.src < 32 && r.dst < 32 && r.cycle < 2000));
        }
    }
}
