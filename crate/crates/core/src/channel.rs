//! Channels, decoding metrics and input distributions over finite alphabets.
//!
//! k-letter objects index tuples in big-endian order: the first letter is the
//! most significant digit, so `(x_1, ..., x_k)` maps to
//! `x_1 * |X|^(k-1) + ... + x_k`.

use alloc::vec;
use alloc::vec::Vec;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::math;

/// Absolute tolerance on probability row sums.
pub const PROB_TOL: f64 = 1e-12;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch("matrix must be non-empty"));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch("data length is not rows * cols"));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows"));
        }
        Matrix::new(rows.len(), cols, rows.iter().flat_map(|r| r.iter().copied()).collect())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Kronecker product, `self` providing the most significant index.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut data = vec![0.0; rows * cols];
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                for j in 0..other.rows {
                    let out_row = (i * other.rows + j) * cols + l * other.cols;
                    for (m, b) in other.row(j).iter().enumerate() {
                        data[out_row + m] = a * b;
                    }
                }
            }
        }
        Matrix { rows, cols, data }
    }

    fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn check_nonnegative(&self, matrix: &'static str) -> Result<()> {
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.get(r, c);
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::NegativeEntry { matrix, row: r, col: c });
                }
            }
        }
        Ok(())
    }
}

/// A discrete memoryless channel `W(y|x)`; rows are inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    w: Matrix,
}

impl ChannelSpec {
    /// Validates entries in `[0, 1]` and rows summing to one within [`PROB_TOL`].
    /// Rows that fail are rejected, never renormalized.
    pub fn new(w: Matrix) -> Result<Self> {
        w.check_nonnegative("W")?;
        for x in 0..w.rows() {
            for (y, &v) in w.row(x).iter().enumerate() {
                if v > 1.0 {
                    return Err(Error::ProbabilityAboveOne { row: x, col: y });
                }
            }
            let sum: f64 = w.row(x).iter().sum();
            if math::abs(sum - 1.0) > PROB_TOL {
                return Err(Error::RowNotStochastic { row: x, sum });
            }
        }
        Ok(ChannelSpec { w })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        ChannelSpec::new(Matrix::from_rows(rows)?)
    }

    /// Binary symmetric channel with crossover `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        ChannelSpec::from_rows(&[&[1.0 - p, p], &[p, 1.0 - p]])
    }

    #[inline]
    pub fn input_size(&self) -> usize {
        self.w.rows()
    }

    #[inline]
    pub fn output_size(&self) -> usize {
        self.w.cols()
    }

    /// `W(y|x)`.
    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.w.get(x, y)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.w
    }

    /// Output law `P_Y(y) = Σ_x P(x) W(y|x)`.
    pub fn output_dist(&self, p: &InputDist) -> Vec<f64> {
        let mut out = vec![0.0; self.output_size()];
        for (x, &px) in p.as_slice().iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            for (y, o) in out.iter_mut().enumerate() {
                *o += px * self.prob(x, y);
            }
        }
        out
    }
}

/// A nonnegative decoding metric `q(x, y)`, stored normalized to max entry 1.
///
/// The factor removed by normalization is kept in [`MetricSpec::scale`]; the
/// stochastic decoder and every information density are invariant to it.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    q: Matrix,
    scale: f64,
}

impl MetricSpec {
    pub fn new(q: Matrix) -> Result<Self> {
        q.check_nonnegative("q")?;
        let scale = q.max();
        if !(scale > 0.0) {
            return Err(Error::EmptyMetric);
        }
        Ok(MetricSpec {
            q: q.map(|v| v / scale),
            scale,
        })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        MetricSpec::new(Matrix::from_rows(rows)?)
    }

    /// Metric `q(x, y) = BSC(p)(y|x)`.
    pub fn bsc(p: f64) -> Result<Self> {
        MetricSpec::from_rows(&[&[1.0 - p, p], &[p, 1.0 - p]])
    }

    /// The matched metric `q = W`.
    pub fn matched(channel: &ChannelSpec) -> Self {
        MetricSpec::new(channel.matrix().clone()).expect("a stochastic matrix has a positive entry")
    }

    #[inline]
    pub fn input_size(&self) -> usize {
        self.q.rows()
    }

    #[inline]
    pub fn output_size(&self) -> usize {
        self.q.cols()
    }

    /// Normalized value, in `[0, 1]`.
    #[inline]
    pub fn value(&self, x: usize, y: usize) -> f64 {
        self.q.get(x, y)
    }

    /// Value on the scale the metric was supplied in.
    #[inline]
    pub fn raw(&self, x: usize, y: usize) -> f64 {
        self.q.get(x, y) * self.scale
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn matrix(&self) -> &Matrix {
        &self.q
    }
}

/// Entrywise power `q^alpha`, renormalized. Zeros stay zeros.
pub fn tilt_metric(metric: &MetricSpec, alpha: f64) -> Result<MetricSpec> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    let q = metric.q.map(|v| if v == 0.0 { 0.0 } else { math::powf(v, alpha) });
    let mut tilted = MetricSpec::new(q)?;
    tilted.scale *= math::powf(metric.scale, alpha);
    Ok(tilted)
}

/// Indicator of the support of `W`.
pub fn erasures_only_metric(channel: &ChannelSpec) -> MetricSpec {
    MetricSpec::new(channel.matrix().map(|v| if v > 0.0 { 1.0 } else { 0.0 }))
        .expect("every row of a stochastic matrix has a positive entry")
}

/// A probability vector over an input alphabet (possibly a k-letter one).
#[derive(Debug, Clone, PartialEq)]
pub struct InputDist {
    p: Vec<f64>,
}

impl InputDist {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if p.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidDistribution("entries must be finite and nonnegative"));
        }
        let sum: f64 = p.iter().sum();
        if math::abs(sum - 1.0) > PROB_TOL {
            return Err(Error::InvalidDistribution("entries must sum to 1"));
        }
        Ok(InputDist { p })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyDistribution);
        }
        Ok(InputDist {
            p: vec![1.0 / size as f64; size],
        })
    }

    /// Renormalizes a nonnegative weight vector. Used by optimizers whose
    /// iterates may drift from the simplex by rounding.
    pub fn from_weights(w: &[f64]) -> Result<Self> {
        let clean: Vec<f64> = w.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
        let sum: f64 = clean.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::InvalidDistribution("weights must have positive finite sum"));
        }
        Ok(InputDist {
            p: clean.into_iter().map(|v| v / sum).collect(),
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize) -> f64 {
        self.p[x]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn support_size(&self) -> usize {
        self.p.iter().filter(|&&v| v > 0.0).count()
    }

    /// The k-fold product distribution, big-endian indexed.
    pub fn product(&self, k: usize) -> InputDist {
        let mut out = vec![1.0];
        for _ in 0..k {
            out = out
                .iter()
                .flat_map(|&a| self.p.iter().map(move |&b| a * b))
                .collect();
        }
        InputDist { p: out }
    }
}

/// A validated channel-metric pair, possibly the k-letter product of a
/// single-letter pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemPair {
    channel: ChannelSpec,
    metric: MetricSpec,
    k: usize,
    q_star: f64,
}

/// Checks that the metric is positive wherever the channel is, and returns the
/// pair with `q_star = min { q(x,y) : W(y|x) > 0 }` cached.
pub fn validate_pair(channel: ChannelSpec, metric: MetricSpec) -> Result<ProblemPair> {
    if channel.input_size() != metric.input_size() || channel.output_size() != metric.output_size() {
        return Err(Error::DimensionMismatch("channel and metric shapes differ"));
    }
    let mut q_star = f64::INFINITY;
    for x in 0..channel.input_size() {
        for y in 0..channel.output_size() {
            if channel.prob(x, y) > 0.0 {
                let q = metric.value(x, y);
                if q == 0.0 {
                    return Err(Error::MetricZeroOnSupport { x, y });
                }
                q_star = q_star.min(q);
            }
        }
    }
    Ok(ProblemPair {
        channel,
        metric,
        k: 1,
        q_star,
    })
}

impl ProblemPair {
    pub fn channel(&self) -> &ChannelSpec {
        &self.channel
    }

    pub fn metric(&self) -> &MetricSpec {
        &self.metric
    }

    /// Number of single letters per super-letter.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Minimum of the normalized metric over the support of `W`; in `(0, 1]`.
    pub fn q_star(&self) -> f64 {
        self.q_star
    }

    /// [`ProblemPair::q_star`] on the metric's original scale.
    pub fn raw_q_star(&self) -> f64 {
        self.q_star * self.metric.scale
    }

    pub fn input_size(&self) -> usize {
        self.channel.input_size()
    }

    pub fn output_size(&self) -> usize {
        self.channel.output_size()
    }

    /// Same channel, another metric (revalidated).
    pub fn with_metric(&self, metric: MetricSpec) -> Result<ProblemPair> {
        let mut pair = validate_pair(self.channel.clone(), metric)?;
        pair.k = self.k;
        Ok(pair)
    }

    /// Same pair, metric tilted by `alpha`.
    pub fn tilted(&self, alpha: f64) -> Result<ProblemPair> {
        self.with_metric(tilt_metric(&self.metric, alpha)?)
    }
}

/// The `k`-fold product of a pair: `W^k(y^k|x^k) = Π W(y_i|x_i)` and likewise
/// for the metric. Extending a k0-letter pair yields a `k0 * k`-letter pair.
pub fn product_extend(pair: &ProblemPair, k: usize, budget: &Budget) -> Result<ProblemPair> {
    if k == 0 {
        return Err(Error::InvalidArgument("product order must be at least 1"));
    }
    let ix = pair.input_size() as u128;
    let iy = pair.output_size() as u128;
    let cells = (0..k).try_fold(1u128, |acc, _| acc.checked_mul(ix * iy)).unwrap_or(u128::MAX);
    budget.check("product extension cells", cells, budget.cells as u128)?;

    let mut w = pair.channel.w.clone();
    let mut q = pair.metric.q.clone();
    for _ in 1..k {
        w = w.kron(&pair.channel.w);
        q = q.kron(&pair.metric.q);
    }
    Ok(ProblemPair {
        channel: ChannelSpec { w },
        metric: MetricSpec {
            q,
            scale: math::powf(pair.metric.scale, k as f64),
        },
        k: pair.k * k,
        q_star: math::powf(pair.q_star, k as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsc_pair(p: f64, pp: f64) -> ProblemPair {
        validate_pair(ChannelSpec::bsc(p).unwrap(), MetricSpec::bsc(pp).unwrap()).unwrap()
    }

    fn z_channel() -> ChannelSpec {
        ChannelSpec::from_rows(&[&[1.0, 0.0], &[0.3, 0.7]]).unwrap()
    }

    #[test]
    fn validate_bsc_pair() {
        let pair = bsc_pair(0.1, 0.05);
        assert!((pair.raw_q_star() - 0.05).abs() < 1e-15);
        assert!((pair.q_star() - 0.05 / 0.95).abs() < 1e-15);
        assert!((pair.metric().scale() - 0.95).abs() < 1e-15);
    }

    #[test]
    fn zero_metric_on_support_rejected() {
        let q = MetricSpec::from_rows(&[&[0.95, 0.0], &[0.05, 0.95]]).unwrap();
        let err = validate_pair(ChannelSpec::bsc(0.1).unwrap(), q).unwrap_err();
        assert_eq!(err, Error::MetricZeroOnSupport { x: 0, y: 1 });
    }

    #[test]
    fn zero_metric_off_support_accepted() {
        let q = MetricSpec::from_rows(&[&[1.0, 0.0], &[1.0, 1.0]]).unwrap();
        let pair = validate_pair(z_channel(), q).unwrap();
        assert_eq!(pair.q_star(), 1.0);
    }

    #[test]
    fn row_not_stochastic() {
        let err = ChannelSpec::from_rows(&[&[0.9, 0.09], &[0.1, 0.9]]).unwrap_err();
        assert!(matches!(err, Error::RowNotStochastic { row: 0, .. }));
        // 1e-13 off is inside tolerance
        assert!(ChannelSpec::from_rows(&[&[0.9 + 1e-13, 0.1], &[0.1, 0.9]]).is_ok());
    }

    #[test]
    fn negative_entries_rejected() {
        assert!(matches!(
            ChannelSpec::from_rows(&[&[1.1, -0.1], &[0.1, 0.9]]).unwrap_err(),
            Error::NegativeEntry { .. }
        ));
        assert!(matches!(
            MetricSpec::from_rows(&[&[1.0, -0.1]]).unwrap_err(),
            Error::NegativeEntry { .. }
        ));
        assert!(matches!(
            MetricSpec::from_rows(&[&[f64::NAN, 1.0]]).unwrap_err(),
            Error::NegativeEntry { .. }
        ));
    }

    #[test]
    fn shape_mismatch() {
        let q = MetricSpec::from_rows(&[&[1.0, 0.5, 0.2], &[0.5, 1.0, 0.2]]).unwrap();
        assert!(matches!(
            validate_pair(ChannelSpec::bsc(0.1).unwrap(), q),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn product_values() {
        let pair = bsc_pair(0.1, 0.05);
        let ext = product_extend(&pair, 2, &Budget::default()).unwrap();
        assert_eq!(ext.k(), 2);
        assert_eq!(ext.input_size(), 4);
        assert!((ext.channel().prob(0, 0) - 0.81).abs() < 1e-15);
        // (0,0) -> (0,1) is index 1
        assert!((ext.metric().raw(0, 1) - 0.95 * 0.05).abs() < 1e-15);
        assert!((ext.raw_q_star() - 0.0025).abs() < 1e-15);
    }

    #[test]
    fn product_identity_and_budget() {
        let pair = bsc_pair(0.1, 0.05);
        assert_eq!(product_extend(&pair, 1, &Budget::default()).unwrap(), pair);
        let tiny = Budget {
            cells: 100,
            ..Budget::default()
        };
        assert!(matches!(
            product_extend(&pair, 4, &tiny),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn product_is_associative() {
        let w = ChannelSpec::from_rows(&[&[0.7, 0.2, 0.1], &[0.1, 0.6, 0.3]]).unwrap();
        let q = MetricSpec::from_rows(&[&[0.5, 0.3, 0.2], &[0.2, 0.9, 0.4]]).unwrap();
        let pair = validate_pair(w, q).unwrap();
        let b = Budget::default();
        let a = product_extend(&product_extend(&pair, 2, &b).unwrap(), 2, &b).unwrap();
        let c = product_extend(&pair, 4, &b).unwrap();
        assert_eq!(a.k(), 4);
        for (u, v) in a.channel().matrix().as_slice().iter().zip(c.channel().matrix().as_slice()) {
            assert!((u - v).abs() < 1e-12);
        }
        for (u, v) in a.metric().matrix().as_slice().iter().zip(c.metric().matrix().as_slice()) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn tilting() {
        let q = MetricSpec::bsc(0.05).unwrap();
        assert_eq!(tilt_metric(&q, 1.0).unwrap(), q);
        let sq = tilt_metric(&q, 2.0).unwrap();
        assert!((sq.raw(0, 0) - 0.9025).abs() < 1e-15);
        assert!((sq.raw(0, 1) - 0.0025).abs() < 1e-15);
        let back = tilt_metric(&sq, 0.5).unwrap();
        for (u, v) in back.matrix().as_slice().iter().zip(q.matrix().as_slice()) {
            assert!((u - v).abs() < 1e-15);
        }
        assert_eq!(tilt_metric(&q, 0.0).unwrap_err(), Error::NonPositiveAlpha(0.0));
        assert!(tilt_metric(&q, -1.0).is_err());
    }

    #[test]
    fn erasures_only() {
        let eo = erasures_only_metric(&ChannelSpec::bsc(0.1).unwrap());
        assert!(eo.matrix().as_slice().iter().all(|&v| v == 1.0));
        let eo = erasures_only_metric(&z_channel());
        assert_eq!(eo.matrix().as_slice(), &[1.0, 0.0, 1.0, 1.0]);
        let pair = validate_pair(z_channel(), eo).unwrap();
        assert_eq!(pair.q_star(), 1.0);
        let id = ChannelSpec::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert_eq!(erasures_only_metric(&id).matrix().as_slice(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn input_dist_validation() {
        assert_eq!(InputDist::new(vec![]).unwrap_err(), Error::EmptyDistribution);
        assert!(InputDist::new(vec![0.5, 0.6]).is_err());
        assert!(InputDist::new(vec![1.5, -0.5]).is_err());
        let p = InputDist::new(vec![0.25, 0.75]).unwrap();
        let p2 = p.product(2);
        assert_eq!(p2.as_slice(), &[0.0625, 0.1875, 0.1875, 0.5625]);
    }
}
