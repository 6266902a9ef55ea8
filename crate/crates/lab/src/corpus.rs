//! Seeded random problem pairs for property sweeps.

use mismatch_core::channel::validate_pair;
use mismatch_core::{ChannelSpec, InputDist, Matrix, MetricSpec, ProblemPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CorpusKind {
    /// Independent channel and metric; the metric may vanish off the
    /// channel's support.
    Random,
    /// `q = W`.
    Matched,
}

/// A channel with rows drawn from exponential weights; each entry is zeroed
/// with probability `zero_prob`, but every row keeps at least one positive
/// entry.
pub fn random_channel(rng: &mut impl Rng, nx: usize, ny: usize, zero_prob: f64) -> ChannelSpec {
    let mut data = Vec::with_capacity(nx * ny);
    for _ in 0..nx {
        let keep = rng.random_range(0..ny);
        let mut row: Vec<f64> = (0..ny)
            .map(|y| {
                if y != keep && rng.random::<f64>() < zero_prob {
                    0.0
                } else {
                    -(1.0 - rng.random::<f64>()).ln()
                }
            })
            .collect();
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= total);
        // absorb rounding so the row sums to one within tolerance
        let drift = 1.0 - row.iter().sum::<f64>();
        row[keep] += drift;
        data.extend(row);
    }
    ChannelSpec::new(Matrix::new(nx, ny, data).expect("shape")).expect("rows are stochastic")
}

/// A metric positive wherever `channel` is, with entries in `[0.05, 1]`; off
/// the support an entry is zero with probability one half.
pub fn random_metric(rng: &mut impl Rng, channel: &ChannelSpec) -> MetricSpec {
    let (nx, ny) = (channel.input_size(), channel.output_size());
    let data = (0..nx * ny)
        .map(|i| {
            let on_support = channel.prob(i / ny, i % ny) > 0.0;
            if !on_support && rng.random::<bool>() {
                0.0
            } else {
                rng.random_range(0.05..=1.0)
            }
        })
        .collect();
    MetricSpec::new(Matrix::new(nx, ny, data).expect("shape")).expect("metric has a positive entry")
}

pub fn random_pair(rng: &mut impl Rng, nx: usize, ny: usize, kind: CorpusKind) -> ProblemPair {
    let channel = random_channel(rng, nx, ny, 0.2);
    let metric = match kind {
        CorpusKind::Random => random_metric(rng, &channel),
        CorpusKind::Matched => MetricSpec::matched(&channel),
    };
    validate_pair(channel, metric).expect("metric covers the channel support")
}

/// `count` pairs with alphabet sizes drawn from `2..=max_x` and `2..=max_y`.
pub fn pair_corpus(seed: u64, count: usize, max_x: usize, max_y: usize, kind: CorpusKind) -> Vec<ProblemPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let nx = rng.random_range(2..=max_x.max(2));
            let ny = rng.random_range(2..=max_y.max(2));
            random_pair(&mut rng, nx, ny, kind)
        })
        .collect()
}

/// An input law with full support drawn from exponential weights.
pub fn random_input(rng: &mut impl Rng, n: usize) -> InputDist {
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln() + 1e-3).collect();
    InputDist::from_weights(&w).expect("positive weights")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_valid_and_reproducible() {
        let a = pair_corpus(7, 30, 3, 3, CorpusKind::Random);
        let b = pair_corpus(7, 30, 3, 3, CorpusKind::Random);
        assert_eq!(a.len(), 30);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.channel(), y.channel());
            assert_eq!(x.metric(), y.metric());
        }
        assert!(a.iter().any(|p| p.channel().matrix().as_slice().contains(&0.0)));
    }

    #[test]
    fn matched_corpus() {
        for p in pair_corpus(1, 10, 3, 3, CorpusKind::Matched) {
            let w = p.channel().matrix();
            let q = p.metric().matrix();
            let wmax = w.as_slice().iter().cloned().fold(0.0, f64::max);
            for (a, b) in w.as_slice().iter().zip(q.as_slice()) {
                assert!((a / wmax - b).abs() < 1e-12);
            }
        }
    }
}
