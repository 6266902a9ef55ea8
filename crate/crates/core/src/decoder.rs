//! Codebooks and the error probability of the stochastic likelihood decoder
//! (message `m` is output with probability `q(x(m), y) / Σ_m̄ q(x(m̄), y)`) and
//! of the maximum-metric decoder.
//!
//! Block metrics are products, so all per-codeword scores are accumulated as
//! sums of `ln q` and exponentiated relative to their maximum.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::budget::Budget;
use crate::channel::{validate_pair, ChannelSpec, InputDist, MetricSpec, ProblemPair};
use crate::density::{check_dist, check_symbol};
use crate::error::{Error, Result};
use crate::math::{exp, ln, log_sum_exp, sqrt};
use crate::spectrum::{LawTag, Pmf, SpectrumPmf};

/// Relative tolerance for max-metric ties and for merging linear-domain
/// metric sums in [`ensemble_exact_error`].
const REL_TIE_TOL: f64 = 1e-12;
/// Log-domain tolerance for the `>=` comparison in [`pairwise_phi`].
pub const PHI_TIE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodebookKind {
    Iid,
    ConstantComposition,
    Explicit,
}

impl CodebookKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CodebookKind::Iid => "iid",
            CodebookKind::ConstantComposition => "constant_composition",
            CodebookKind::Explicit => "explicit",
        }
    }
}

/// Random-coding ensemble a codebook is drawn from.
#[derive(Debug, Clone, PartialEq)]
pub enum Ensemble {
    Iid(InputDist),
    ConstantComposition(InputDist),
}

/// `M` codewords of length `n`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    n: usize,
    m: usize,
    alphabet: usize,
    words: Vec<usize>,
    seed: Option<u64>,
    kind: CodebookKind,
}

impl Codebook {
    pub fn new(n: usize, alphabet: usize, words: Vec<Vec<usize>>) -> Result<Codebook> {
        if words.is_empty() {
            return Err(Error::InvalidArgument("a codebook needs at least one codeword"));
        }
        let mut flat = Vec::with_capacity(words.len() * n);
        for w in &words {
            if w.len() != n {
                return Err(Error::DimensionMismatch("codeword length differs from n"));
            }
            for &s in w {
                check_symbol(s, alphabet)?;
            }
            flat.extend_from_slice(w);
        }
        Ok(Codebook {
            n,
            m: words.len(),
            alphabet,
            words: flat,
            seed: None,
            kind: CodebookKind::Explicit,
        })
    }

    /// Rebuilds a codebook from its serialized parts.
    pub fn from_parts(
        n: usize,
        m: usize,
        alphabet: usize,
        words: Vec<usize>,
        seed: Option<u64>,
        kind: CodebookKind,
    ) -> Result<Codebook> {
        if m == 0 {
            return Err(Error::InvalidArgument("a codebook needs at least one codeword"));
        }
        if words.len() != n * m {
            return Err(Error::DimensionMismatch("word array is not M * n long"));
        }
        for &s in &words {
            check_symbol(s, alphabet)?;
        }
        Ok(Codebook {
            n,
            m,
            alphabet,
            words,
            seed,
            kind,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn word(&self, m: usize) -> &[usize] {
        &self.words[m * self.n..(m + 1) * self.n]
    }

    pub fn words(&self) -> &[usize] {
        &self.words
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn kind(&self) -> CodebookKind {
        self.kind
    }

    /// `(1/n) ln M` nats; zero for `n = 0`.
    pub fn rate(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            ln(self.m as f64) / self.n as f64
        }
    }
}

/// Symbol counts of a constant-composition type: `floor(n p)` plus the
/// largest-remainder rounding, ties broken towards the lower symbol index.
pub fn composition_counts(p: &InputDist, n: usize) -> Vec<usize> {
    let targets: Vec<f64> = p.as_slice().iter().map(|&v| v * n as f64).collect();
    let mut counts: Vec<usize> = targets.iter().map(|&t| libm::floor(t) as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    // stable sort keeps lower indices first among equal remainders
    order.sort_by(|&a, &b| {
        let ra = targets[a] - counts[a] as f64;
        let rb = targets[b] - counts[b] as f64;
        rb.total_cmp(&ra)
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

#[inline]
fn sample_categorical(weights: &[f64], total: f64, u: f64) -> usize {
    let target = u * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = i;
            if target < acc {
                return i;
            }
        }
    }
    last
}

/// Draws `M` codewords of length `n`. The same arguments always give the
/// same codebook.
pub fn gen_codebook(ensemble: &Ensemble, n: usize, m: usize, seed: u64) -> Result<Codebook> {
    if m == 0 {
        return Err(Error::InvalidArgument("a codebook needs at least one codeword"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (p, kind) = match ensemble {
        Ensemble::Iid(p) => (p, CodebookKind::Iid),
        Ensemble::ConstantComposition(p) => (p, CodebookKind::ConstantComposition),
    };
    if p.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let mut words = Vec::with_capacity(n * m);
    match ensemble {
        Ensemble::Iid(p) => {
            for _ in 0..n * m {
                let u: f64 = rng.random();
                words.push(sample_categorical(p.as_slice(), 1.0, u));
            }
        }
        Ensemble::ConstantComposition(p) => {
            let counts = composition_counts(p, n);
            let base: Vec<usize> = counts
                .iter()
                .enumerate()
                .flat_map(|(s, &c)| core::iter::repeat_n(s, c))
                .collect();
            for _ in 0..m {
                let mut w = base.clone();
                w.shuffle(&mut rng);
                words.extend_from_slice(&w);
            }
        }
    }
    Ok(Codebook {
        n,
        m,
        alphabet: p.len(),
        words,
        seed: Some(seed),
        kind,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodingRule {
    Stochastic,
    MaxMetric,
}

impl DecodingRule {
    pub fn as_str(self) -> &'static str {
        match self {
            DecodingRule::Stochastic => "stochastic",
            DecodingRule::MaxMetric => "max_metric",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderKind {
    pub rule: DecodingRule,
    pub metric: MetricSpec,
}

impl DecoderKind {
    pub fn stochastic(metric: MetricSpec) -> DecoderKind {
        DecoderKind {
            rule: DecodingRule::Stochastic,
            metric,
        }
    }

    pub fn max_metric(metric: MetricSpec) -> DecoderKind {
        DecoderKind {
            rule: DecodingRule::MaxMetric,
            metric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    pub pe: f64,
    pub stderr: f64,
    pub trials: u64,
    pub method: Method,
}

/// Log tables shared by the enumerating and sampling paths.
struct Tables {
    ny: usize,
    log_w: Vec<f64>,
    log_q: Vec<f64>,
}

impl Tables {
    fn new(cb: &Codebook, channel: &ChannelSpec, metric: &MetricSpec) -> Result<Tables> {
        validate_pair(channel.clone(), metric.clone())?;
        if cb.alphabet() != channel.input_size() {
            return Err(Error::DimensionMismatch("codebook alphabet does not match the channel"));
        }
        let lg = |v: f64| if v > 0.0 { ln(v) } else { f64::NEG_INFINITY };
        Ok(Tables {
            ny: channel.output_size(),
            log_w: channel.matrix().as_slice().iter().map(|&v| lg(v)).collect(),
            log_q: metric.matrix().as_slice().iter().map(|&v| lg(v)).collect(),
        })
    }

    #[inline]
    fn word_scores(&self, word: &[usize], ys: &[usize]) -> (f64, f64) {
        let mut lw = 0.0;
        let mut lq = 0.0;
        for (&x, &y) in word.iter().zip(ys) {
            lw += self.log_w[x * self.ny + y];
            lq += self.log_q[x * self.ny + y];
        }
        (lw, lq)
    }
}

/// Visits every sequence of `alphabet^n` in big-endian order.
fn for_each_sequence(alphabet: usize, n: usize, mut f: impl FnMut(&[usize])) {
    let mut seq = vec![0usize; n];
    loop {
        f(&seq);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            seq[i] += 1;
            if seq[i] < alphabet {
                break;
            }
            seq[i] = 0;
        }
    }
}

fn enumeration_size(cb: &Codebook, ny: usize) -> u128 {
    let mut total = cb.m() as u128;
    for _ in 0..cb.n() {
        total = total.saturating_mul(ny as u128);
    }
    total
}

/// Stochastic-decoder posterior over messages for the received `ys`.
pub fn posterior(cb: &Codebook, metric: &MetricSpec, ys: &[usize]) -> Result<Vec<f64>> {
    if ys.len() != cb.n() {
        return Err(Error::DimensionMismatch("received sequence length differs from n"));
    }
    let ny = metric.output_size();
    for &y in ys {
        check_symbol(y, ny)?;
    }
    let scores: Vec<f64> = (0..cb.m())
        .map(|m| {
            cb.word(m)
                .iter()
                .zip(ys)
                .map(|(&x, &y)| {
                    let v = metric.value(x, y);
                    if v > 0.0 {
                        ln(v)
                    } else {
                        f64::NEG_INFINITY
                    }
                })
                .sum()
        })
        .collect();
    let lse = log_sum_exp(scores.iter().copied());
    if lse == f64::NEG_INFINITY {
        return Err(Error::DenominatorZero { y: ys.first().copied().unwrap_or(0) });
    }
    Ok(scores.iter().map(|&s| exp(s - lse)).collect())
}

/// Exact probability of correct decoding, `Σ_m (1/M) Σ_y W(y|x_m) P(m|y)`.
pub fn exact_correct_prob(cb: &Codebook, channel: &ChannelSpec, dec: &DecoderKind, budget: &Budget) -> Result<f64> {
    let t = Tables::new(cb, channel, &dec.metric)?;
    budget.check_enumeration(enumeration_size(cb, t.ny))?;
    let m_count = cb.m();
    let mut lw = vec![0.0; m_count];
    let mut lq = vec![0.0; m_count];
    let mut correct = 0.0;
    for_each_sequence(t.ny, cb.n(), |ys| {
        for m in 0..m_count {
            let (w, q) = t.word_scores(cb.word(m), ys);
            lw[m] = w;
            lq[m] = q;
        }
        let max_q = lq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max_q == f64::NEG_INFINITY {
            return;
        }
        match dec.rule {
            DecodingRule::Stochastic => {
                let rel: Vec<f64> = lq.iter().map(|&v| exp(v - max_q)).collect();
                let total: f64 = rel.iter().sum();
                for m in 0..m_count {
                    if lw[m] > f64::NEG_INFINITY {
                        correct += exp(lw[m]) * rel[m] / total;
                    }
                }
            }
            DecodingRule::MaxMetric => {
                let winners: Vec<usize> = (0..m_count).filter(|&m| is_tie(lq[m], max_q)).collect();
                let share = 1.0 / winners.len() as f64;
                for &m in &winners {
                    if lw[m] > f64::NEG_INFINITY {
                        correct += exp(lw[m]) * share;
                    }
                }
            }
        }
    });
    Ok(correct / m_count as f64)
}

#[inline]
fn is_tie(v: f64, max: f64) -> bool {
    max - v <= REL_TIE_TOL * (1.0 + libm::fabs(max))
}

/// Exact average error probability by enumeration over `(m, y^n)`.
/// Max-metric ties are split uniformly among the tied codewords.
pub fn exact_error(cb: &Codebook, channel: &ChannelSpec, dec: &DecoderKind, budget: &Budget) -> Result<ErrorEstimate> {
    let pc = exact_correct_prob(cb, channel, dec, budget)?;
    Ok(ErrorEstimate {
        pe: (1.0 - pc).clamp(0.0, 1.0),
        stderr: 0.0,
        trials: 0,
        method: Method::Exact,
    })
}

/// Prepared state for Monte Carlo trials against one codebook.
pub struct MonteCarlo<'a> {
    cb: &'a Codebook,
    rule: DecodingRule,
    tables: Tables,
    /// Cumulative-free row weights of `W` for sampling outputs.
    channel: &'a ChannelSpec,
    seed: u64,
}

impl<'a> MonteCarlo<'a> {
    pub fn new(cb: &'a Codebook, channel: &'a ChannelSpec, dec: &DecoderKind, seed: u64) -> Result<MonteCarlo<'a>> {
        Ok(MonteCarlo {
            cb,
            rule: dec.rule,
            tables: Tables::new(cb, channel, &dec.metric)?,
            channel,
            seed,
        })
    }

    /// Runs trial `index`; `true` on a decoding error. The trial's generator
    /// is derived from the master seed and the index alone.
    pub fn trial(&self, index: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let cb = self.cb;
        let sent = rng.random_range(0..cb.m());
        let ys: Vec<usize> = cb
            .word(sent)
            .iter()
            .map(|&x| {
                let u: f64 = rng.random();
                sample_categorical(self.channel.matrix().row(x), 1.0, u)
            })
            .collect();
        let lq: Vec<f64> = (0..cb.m()).map(|m| self.tables.word_scores(cb.word(m), &ys).1).collect();
        let max_q = lq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let decoded = match self.rule {
            DecodingRule::Stochastic => {
                let rel: Vec<f64> = lq.iter().map(|&v| exp(v - max_q)).collect();
                let total: f64 = rel.iter().sum();
                let u: f64 = rng.random();
                sample_categorical(&rel, total, u)
            }
            DecodingRule::MaxMetric => {
                let winners: Vec<usize> = (0..cb.m()).filter(|&m| is_tie(lq[m], max_q)).collect();
                winners[rng.random_range(0..winners.len())]
            }
        };
        decoded != sent
    }

    pub fn estimate(errors: u64, trials: u64) -> ErrorEstimate {
        let pe = if trials == 0 { 0.0 } else { errors as f64 / trials as f64 };
        ErrorEstimate {
            pe,
            stderr: if trials == 0 { 0.0 } else { sqrt(pe * (1.0 - pe) / trials as f64) },
            trials,
            method: Method::MonteCarlo,
        }
    }
}

/// Monte Carlo error estimate over `trials` independent transmissions.
pub fn mc_error(cb: &Codebook, channel: &ChannelSpec, dec: &DecoderKind, trials: u64, seed: u64) -> Result<ErrorEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1"));
    }
    let mc = MonteCarlo::new(cb, channel, dec, seed)?;
    let errors = (0..trials).filter(|&t| mc.trial(t)).count() as u64;
    Ok(MonteCarlo::estimate(errors, trials))
}

/// `Φ = P[q(X̄^n, y^n) >= q(x^n, y^n)]` with `X̄^n ~ p` i.i.d.; ties count.
pub fn pairwise_phi(pair: &ProblemPair, p: &InputDist, xs: &[usize], ys: &[usize], budget: &Budget) -> Result<f64> {
    check_dist(pair, p)?;
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch("sequences differ in length"));
    }
    let q = pair.metric();
    let mut threshold = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        check_symbol(x, pair.input_size())?;
        check_symbol(y, pair.output_size())?;
        let v = q.value(x, y);
        if v == 0.0 {
            return Ok(1.0);
        }
        threshold += ln(v);
    }
    // sub-probability law: competitors with a zero metric letter never tie or win
    let mut law = Pmf::point(0.0);
    for &y in ys {
        let letter = Pmf::from_pairs(
            (0..pair.input_size())
                .filter(|&xb| q.value(xb, y) > 0.0)
                .map(|xb| (ln(q.value(xb, y)), p.get(xb))),
        )?;
        law = law.convolve(&letter, budget)?;
    }
    Ok(law
        .atoms()
        .iter()
        .filter(|a| a.value >= threshold - PHI_TIE_TOL)
        .map(|a| a.prob)
        .sum())
}

/// Law of `Z_n = (1/n) i_q(X^n, Y^n)` under `P^U W^n`, where the density is
/// taken with respect to the codebook distribution:
/// `n Z_n = ln q(x_m, y) - ln((1/M) Σ_m̄ q(x_m̄, y))`.
pub fn codebook_spectrum(cb: &Codebook, channel: &ChannelSpec, metric: &MetricSpec, budget: &Budget) -> Result<SpectrumPmf> {
    let t = Tables::new(cb, channel, metric)?;
    budget.check_enumeration(enumeration_size(cb, t.ny))?;
    if cb.n() == 0 {
        return Err(Error::InvalidArgument("block length must be at least 1"));
    }
    let m_count = cb.m();
    let ln_m = ln(m_count as f64);
    let inv_n = 1.0 / cb.n() as f64;
    let mut pairs = Vec::new();
    let mut lw = vec![0.0; m_count];
    let mut lq = vec![0.0; m_count];
    for_each_sequence(t.ny, cb.n(), |ys| {
        for m in 0..m_count {
            let (w, q) = t.word_scores(cb.word(m), ys);
            lw[m] = w;
            lq[m] = q;
        }
        let lse = log_sum_exp(lq.iter().copied());
        for m in 0..m_count {
            if lw[m] > f64::NEG_INFINITY {
                pairs.push(((lq[m] - lse + ln_m) * inv_n, exp(lw[m]) / m_count as f64));
            }
        }
    });
    let pmf = Pmf::from_pairs(pairs)?;
    budget.check("spectrum atoms", pmf.len() as u128, budget.atoms as u128)?;
    Ok(SpectrumPmf::new(pmf, cb.n(), LawTag::Codebook))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcIdentity {
    /// Probability of correct decoding by direct enumeration.
    pub lhs: f64,
    /// `E[e^{n (Z_n - R_n)}]` under the codebook law.
    pub rhs: f64,
    pub max_abs_diff: f64,
}

/// Compares the probability of correct decoding with `E[e^{n (Z_n - R_n)}]`.
pub fn pc_identity_check(cb: &Codebook, channel: &ChannelSpec, metric: &MetricSpec, budget: &Budget) -> Result<PcIdentity> {
    let lhs = exact_correct_prob(cb, channel, &DecoderKind::stochastic(metric.clone()), budget)?;
    let spectrum = codebook_spectrum(cb, channel, metric, budget)?;
    let n = cb.n() as f64;
    let r = cb.rate();
    let rhs = spectrum.expect(|z| exp(n * (z - r)));
    Ok(PcIdentity {
        lhs,
        rhs,
        max_abs_diff: libm::fabs(lhs - rhs),
    })
}

/// Linear-domain convolution with relative merging: atoms within
/// `REL_TIE_TOL` relative distance are combined.
fn convolve_linear(a: &[(f64, f64)], b: &[(f64, f64)], budget: &Budget) -> Result<Vec<(f64, f64)>> {
    let mut raw: Vec<(f64, f64)> = Vec::with_capacity(a.len() * b.len());
    for &(va, pa) in a {
        for &(vb, pb) in b {
            raw.push((va + vb, pa * pb));
        }
    }
    raw.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (v, p) in raw {
        match out.last_mut() {
            Some(last) if v - last.0 <= REL_TIE_TOL * last.0 => last.1 += p,
            _ => out.push((v, p)),
        }
    }
    budget.check("spectrum atoms", out.len() as u128, budget.atoms as u128)?;
    Ok(out)
}

/// Exact error probability of the stochastic decoder averaged over the
/// i.i.d. random-coding ensemble `X_m ~ p^n`, `M` codewords.
///
/// For each output sequence the law of the competitors' metric sum is built
/// exactly (per output type, since the block metric is a product), then
/// `E[q(X_1, y) / (q(X_1, y) + Σ_{m>=2} q(X_m, y))]` is summed over the law of
/// the transmitted codeword.
pub fn ensemble_exact_error(pair: &ProblemPair, p: &InputDist, n: usize, m: usize, budget: &Budget) -> Result<ErrorEstimate> {
    check_dist(pair, p)?;
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("n and M must be at least 1"));
    }
    let nx = pair.input_size();
    let ny = pair.output_size();
    let mut work = 1u128;
    for _ in 0..n {
        work = work.saturating_mul((nx * ny) as u128);
    }
    budget.check_enumeration(work)?;
    if m == 1 {
        return Ok(ErrorEstimate {
            pe: 0.0,
            stderr: 0.0,
            trials: 0,
            method: Method::Exact,
        });
    }
    let q = pair.metric();
    let w = pair.channel();

    // law of the competitors' sum, keyed by the output type
    let mut cache: BTreeMap<Vec<usize>, Vec<(f64, f64)>> = BTreeMap::new();
    let mut correct = 0.0;
    let mut failure: Option<Error> = None;
    for_each_sequence(ny, n, |ys| {
        if failure.is_some() {
            return;
        }
        let mut counts = vec![0usize; ny];
        for &y in ys {
            counts[y] += 1;
        }
        if !cache.contains_key(&counts) {
            match competitor_sum_law(pair, p, &counts, m - 1, budget) {
                Ok(law) => {
                    cache.insert(counts.clone(), law);
                }
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            }
        }
        let sum_law = &cache[&counts];
        // group transmitted codewords by their metric value
        let mut groups = Vec::new();
        for_each_sequence(nx, n, |xs| {
            let mut weight = 1.0;
            let mut lq = 0.0;
            for (&x, &y) in xs.iter().zip(ys) {
                weight *= p.get(x) * w.prob(x, y);
                let v = q.value(x, y);
                lq += if v > 0.0 { ln(v) } else { f64::NEG_INFINITY };
            }
            if weight > 0.0 {
                groups.push((lq, weight));
            }
        });
        let Ok(grouped) = Pmf::from_pairs(groups) else {
            failure = Some(Error::InvalidArgument("metric vanishes on the channel support"));
            return;
        };
        for atom in grouped.atoms() {
            let own = exp(atom.value);
            let e: f64 = sum_law.iter().map(|&(s, ps)| ps * own / (own + s)).sum();
            correct += atom.prob * e;
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(ErrorEstimate {
        pe: (1.0 - correct).clamp(0.0, 1.0),
        stderr: 0.0,
        trials: 0,
        method: Method::Exact,
    })
}

/// Law of `Σ_{j=1}^{copies} q(X̄_j, y)` for an output of the given type.
fn competitor_sum_law(
    pair: &ProblemPair,
    p: &InputDist,
    counts: &[usize],
    copies: usize,
    budget: &Budget,
) -> Result<Vec<(f64, f64)>> {
    let q = pair.metric();
    let mut log_law = Pmf::point(0.0);
    for (y, &c) in counts.iter().enumerate() {
        let letter = Pmf::from_pairs(
            (0..pair.input_size())
                .filter(|&x| q.value(x, y) > 0.0)
                .map(|x| (ln(q.value(x, y)), p.get(x))),
        )?;
        for _ in 0..c {
            log_law = log_law.convolve(&letter, budget)?;
        }
    }
    let alive = log_law.total();
    let mut single: Vec<(f64, f64)> = log_law.atoms().iter().map(|a| (exp(a.value), a.prob)).collect();
    if alive < 1.0 {
        single.insert(0, (0.0, 1.0 - alive));
    }
    let mut acc = vec![(0.0, 1.0)];
    for _ in 0..copies {
        acc = convolve_linear(&acc, &single, budget)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::validate_pair;

    fn full_binary() -> Codebook {
        Codebook::new(1, 2, vec![vec![0], vec![1]]).unwrap()
    }

    fn bsc(p: f64) -> ChannelSpec {
        ChannelSpec::bsc(p).unwrap()
    }

    #[test]
    fn codebook_determinism() {
        let e = Ensemble::Iid(InputDist::uniform(2).unwrap());
        let a = gen_codebook(&e, 5, 7, 42).unwrap();
        let b = gen_codebook(&e, 5, 7, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.words(), gen_codebook(&e, 5, 7, 43).unwrap().words());
        assert!((a.rate() - libm::log(7.0) / 5.0).abs() < 1e-15);
    }

    #[test]
    fn constant_composition_counts() {
        let p = InputDist::new(vec![0.3, 0.7]).unwrap();
        let cb = gen_codebook(&Ensemble::ConstantComposition(p), 10, 20, 1).unwrap();
        for m in 0..cb.m() {
            assert_eq!(cb.word(m).iter().filter(|&&s| s == 0).count(), 3);
        }
        let thirds = InputDist::new(vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert_eq!(composition_counts(&thirds, 4), vec![2, 1, 1]);
        assert_eq!(composition_counts(&thirds, 5), vec![2, 2, 1]);
    }

    #[test]
    fn iid_frequencies() {
        let cb = gen_codebook(&Ensemble::Iid(InputDist::uniform(2).unwrap()), 4, 10_000, 9).unwrap();
        let ones = cb.words().iter().filter(|&&s| s == 1).count() as f64;
        let total = 40_000.0;
        let sigma = libm::sqrt(total * 0.25);
        assert!((ones - total / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn bad_codebooks() {
        assert!(gen_codebook(&Ensemble::Iid(InputDist::uniform(2).unwrap()), 3, 0, 0).is_err());
        assert!(Codebook::new(2, 2, vec![vec![0, 2]]).is_err());
        assert!(Codebook::new(2, 2, vec![vec![0]]).is_err());
    }

    #[test]
    fn exact_errors_full_binary() {
        let w = bsc(0.1);
        let q = MetricSpec::matched(&w);
        let b = Budget::default();
        let sto = exact_error(&full_binary(), &w, &DecoderKind::stochastic(q.clone()), &b).unwrap();
        assert!((sto.pe - 0.18).abs() < 1e-15);
        let mm = exact_error(&full_binary(), &w, &DecoderKind::max_metric(q), &b).unwrap();
        assert!((mm.pe - 0.1).abs() < 1e-15);
    }

    #[test]
    fn single_codeword_never_errs() {
        let w = bsc(0.3);
        let cb = Codebook::new(3, 2, vec![vec![0, 1, 1]]).unwrap();
        let q = MetricSpec::bsc(0.1).unwrap();
        let b = Budget::default();
        assert!(exact_error(&cb, &w, &DecoderKind::stochastic(q.clone()), &b).unwrap().pe.abs() < 1e-15);
        assert_eq!(mc_error(&cb, &w, &DecoderKind::stochastic(q), 500, 3).unwrap().pe, 0.0);
    }

    #[test]
    fn ties_split() {
        // identical codewords: max-metric guesses, correct half the time
        let cb = Codebook::new(2, 2, vec![vec![0, 1], vec![0, 1]]).unwrap();
        let w = bsc(0.2);
        let e = exact_error(&cb, &w, &DecoderKind::max_metric(MetricSpec::matched(&w)), &Budget::default()).unwrap();
        assert!((e.pe - 0.5).abs() < 1e-15);
    }

    #[test]
    fn posterior_normalized_and_scale_free() {
        let cb = gen_codebook(&Ensemble::Iid(InputDist::uniform(2).unwrap()), 4, 6, 5).unwrap();
        let rows: [&[f64]; 2] = [&[0.8, 0.3], &[0.25, 0.9]];
        let q = MetricSpec::from_rows(&rows).unwrap();
        for_each_sequence(2, 4, |ys| {
            let post = posterior(&cb, &q, ys).unwrap();
            assert!((post.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for c in [0.5, 2.0] {
                let scaled: Vec<&[f64]> = rows.to_vec();
                let m = crate::channel::Matrix::from_rows(&scaled).unwrap().map(|v| v * c);
                let other = posterior(&cb, &MetricSpec::new(m).unwrap(), ys).unwrap();
                assert_eq!(post, other);
            }
            // direct formula on the raw scale
            let raw: Vec<f64> = (0..cb.m())
                .map(|m| cb.word(m).iter().zip(ys).map(|(&x, &y)| rows[x][y]).product())
                .collect();
            let total: f64 = raw.iter().sum();
            for (a, r) in post.iter().zip(&raw) {
                assert!((a - r / total).abs() < 1e-14);
            }
        });
    }

    #[test]
    fn mc_reproducible() {
        let w = bsc(0.1);
        let dec = DecoderKind::stochastic(MetricSpec::matched(&w));
        let a = mc_error(&full_binary(), &w, &dec, 2000, 11).unwrap();
        let b = mc_error(&full_binary(), &w, &dec, 2000, 11).unwrap();
        assert_eq!(a, b);
        assert!(mc_error(&full_binary(), &w, &dec, 0, 11).is_err());
    }

    #[test]
    fn phi_examples() {
        let w = bsc(0.1);
        let pair = validate_pair(w, MetricSpec::bsc(0.05).unwrap()).unwrap();
        let u = InputDist::uniform(2).unwrap();
        let b = Budget::default();
        let phi = pairwise_phi(&pair, &u, &[0], &[0], &b).unwrap();
        assert!((phi - 0.5).abs() < 1e-15);
        let iq = crate::density::sequence_density(&pair, &u, &[0], &[0]).unwrap();
        assert!((libm::exp(-iq) - 0.526315789473684).abs() < 1e-12);
        // row minimum: every competitor ties or wins
        assert!((pairwise_phi(&pair, &u, &[1], &[0], &b).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(pairwise_phi(&pair, &u, &[], &[], &b).unwrap(), 1.0);
    }

    #[test]
    fn codebook_spectrum_full_binary() {
        let w = bsc(0.1);
        let s = codebook_spectrum(&full_binary(), &w, &MetricSpec::matched(&w), &Budget::default()).unwrap();
        assert_eq!(s.law(), LawTag::Codebook);
        assert_eq!(s.atoms().len(), 2);
        assert!((s.atoms()[0].value - libm::log(0.2)).abs() < 1e-12);
        assert!((s.atoms()[0].prob - 0.1).abs() < 1e-15);
    }

    #[test]
    fn pc_identity_small() {
        let w = bsc(0.1);
        let r = pc_identity_check(&full_binary(), &w, &MetricSpec::matched(&w), &Budget::default()).unwrap();
        assert!((r.lhs - 0.82).abs() < 1e-15);
        assert!(r.max_abs_diff < 1e-12);
        let one = Codebook::new(2, 2, vec![vec![1, 0]]).unwrap();
        let r = pc_identity_check(&one, &w, &MetricSpec::matched(&w), &Budget::default()).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-15 && (r.rhs - 1.0).abs() < 1e-15);
    }

    #[test]
    fn enumeration_budget() {
        let cb = gen_codebook(&Ensemble::Iid(InputDist::uniform(2).unwrap()), 10, 4, 0).unwrap();
        let w = bsc(0.1);
        let tiny = Budget {
            enumeration: 100,
            ..Budget::default()
        };
        assert!(matches!(
            exact_error(&cb, &w, &DecoderKind::stochastic(MetricSpec::matched(&w)), &tiny),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn metric_must_fit_channel() {
        let w = bsc(0.1);
        let q = MetricSpec::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(
            exact_error(&full_binary(), &w, &DecoderKind::stochastic(q), &Budget::default()),
            Err(Error::MetricZeroOnSupport { .. })
        ));
    }

    /// Brute-force ensemble average over every codebook of `M` words in `X^n`.
    fn brute_ensemble(pair: &ProblemPair, p: &InputDist, n: usize, m: usize) -> f64 {
        let nx = pair.input_size();
        let words: usize = (0..n).fold(1, |a, _| a * nx);
        let mut total = 0.0;
        let mut idx = vec![0usize; m];
        loop {
            let cw: Vec<Vec<usize>> = idx
                .iter()
                .map(|&i| (0..n).map(|j| (i / nx.pow((n - 1 - j) as u32)) % nx).collect())
                .collect();
            let prob: f64 = cw.iter().flat_map(|w| w.iter()).map(|&x| p.get(x)).product();
            let cb = Codebook::new(n, nx, cw).unwrap();
            let dec = DecoderKind::stochastic(pair.metric().clone());
            total += prob * exact_error(&cb, pair.channel(), &dec, &Budget::default()).unwrap().pe;
            let mut k = m;
            loop {
                if k == 0 {
                    return total;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < words {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    #[test]
    fn ensemble_matches_brute_force() {
        let w = ChannelSpec::from_rows(&[&[0.8, 0.2], &[0.3, 0.7]]).unwrap();
        let q = MetricSpec::from_rows(&[&[0.6, 0.5], &[0.2, 0.9]]).unwrap();
        let pair = validate_pair(w, q).unwrap();
        let p = InputDist::new(vec![0.4, 0.6]).unwrap();
        for (n, m) in [(1, 2), (2, 2), (2, 3), (3, 2)] {
            let exact = ensemble_exact_error(&pair, &p, n, m, &Budget::default()).unwrap().pe;
            let brute = brute_ensemble(&pair, &p, n, m);
            assert!((exact - brute).abs() < 1e-12, "n={n} m={m}: {exact} vs {brute}");
        }
    }
}
