//! Finite-n achievability (Feinstein type, RCU type) and converse (Verdú-Han
//! type) bounds on the error probability of the stochastic likelihood decoder,
//! plus the sandwich harness that checks simulated codebooks against them.
//!
//! Values are reported raw. A bound outside `[0, 1]` is flagged `vacuous`
//! instead of being clipped.

use alloc::vec::Vec;

use crate::budget::Budget;
use crate::channel::{ChannelSpec, InputDist, MetricSpec, ProblemPair};
use crate::decoder::{codebook_spectrum, ensemble_exact_error, exact_error, gen_codebook, mc_error, Codebook, DecoderKind, Ensemble};
use crate::density::{check_dist, tilted_density_table};
use crate::error::{Error, Result};
use crate::math::{exp, ln, powf, sqrt};
use crate::spectrum::{LawTag, SpectrumPmf};

/// Slack allowed when comparing an exact error probability with a bound.
pub const SANDWICH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Feinstein,
    RcuS,
    VerduHan,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Feinstein => "feinstein",
            BoundKind::RcuS => "rcu_s",
            BoundKind::VerduHan => "verdu_han",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub n: usize,
    /// Number of messages; real-valued so that `R = ln(M)/n` can be any rate.
    pub m: f64,
    pub gamma: Option<f64>,
    pub s: Option<f64>,
    pub value: f64,
    pub vacuous: bool,
    pub law: LawTag,
}

impl BoundReport {
    fn new(kind: BoundKind, n: usize, m: f64, gamma: Option<f64>, s: Option<f64>, value: f64, law: LawTag) -> Self {
        BoundReport {
            kind,
            n,
            m,
            gamma,
            s,
            value,
            vacuous: !(0.0..=1.0).contains(&value),
            law,
        }
    }
}

fn check_common(n: usize, m: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("block length must be at least 1"));
    }
    if !(m >= 1.0) || !m.is_finite() {
        return Err(Error::InvalidArgument("M must be a finite number at least 1"));
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument("gamma must be positive"));
    }
    Ok(())
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidArgument("s must lie in (0, 1]"));
    }
    Ok(())
}

/// Spectrum of the s-tilted density `(1/n) Σ [s ln q - ln E_P[q^s]]` under
/// `P^n W^n`.
pub fn tilted_spectrum(pair: &ProblemPair, p: &InputDist, n: usize, s: f64, budget: &Budget) -> Result<SpectrumPmf> {
    check_s(s)?;
    let table = tilted_density_table(pair, p, s, None)?;
    SpectrumPmf::from_letter_law(&table.letter_law(), n, LawTag::InputProduct, budget)
}

/// `P[Z_n(s) <= R - ln(s)/n + γ] + e^{-nγ}` with `R = ln(M)/n`.
pub fn feinstein_bound(
    pair: &ProblemPair,
    p: &InputDist,
    n: usize,
    m: f64,
    gamma: f64,
    s: Option<f64>,
    budget: &Budget,
) -> Result<BoundReport> {
    check_common(n, m)?;
    check_gamma(gamma)?;
    let s = s.unwrap_or(1.0);
    let spectrum = tilted_spectrum(pair, p, n, s, budget)?;
    Ok(feinstein_from_spectrum(&spectrum, m, gamma, s))
}

fn feinstein_from_spectrum(spectrum: &SpectrumPmf, m: f64, gamma: f64, s: f64) -> BoundReport {
    let n = spectrum.n();
    let nf = n as f64;
    let threshold = ln(m) / nf - ln(s) / nf + gamma;
    let value = spectrum.tail_leq(threshold) + exp(-nf * gamma);
    BoundReport::new(BoundKind::Feinstein, n, m, Some(gamma), Some(s), value, LawTag::InputProduct)
}

/// `E[min{1, ((M-1)/s) e^{-n Z_n(s)}}]` under `P^n W^n`, exact over the atoms
/// of the tilted spectrum.
pub fn rcu_s_bound(pair: &ProblemPair, p: &InputDist, n: usize, m: f64, s: f64, budget: &Budget) -> Result<BoundReport> {
    check_common(n, m)?;
    let spectrum = tilted_spectrum(pair, p, n, s, budget)?;
    Ok(rcu_from_spectrum(&spectrum, m, s))
}

fn rcu_from_spectrum(spectrum: &SpectrumPmf, m: f64, s: f64) -> BoundReport {
    let nf = spectrum.n() as f64;
    let log_factor = if m > 1.0 { ln(m - 1.0) - ln(s) } else { f64::NEG_INFINITY };
    let value = spectrum.expect(|z| {
        let e = log_factor - nf * z;
        if e >= 0.0 {
            1.0
        } else {
            exp(e)
        }
    });
    BoundReport::new(BoundKind::RcuS, spectrum.n(), m, None, Some(s), value, LawTag::InputProduct)
}

/// `P[Z_n <= R - γ] - e^{-nγ}` with `Z_n` built under the uniform law on the
/// codebook's codewords.
pub fn verdu_han_bound(cb: &Codebook, channel: &ChannelSpec, metric: &MetricSpec, gamma: f64, budget: &Budget) -> Result<BoundReport> {
    check_gamma(gamma)?;
    check_common(cb.n(), cb.m() as f64)?;
    let spectrum = codebook_spectrum(cb, channel, metric, budget)?;
    Ok(verdu_han_from_spectrum(&spectrum, cb.rate(), cb.m() as f64, gamma))
}

fn verdu_han_from_spectrum(spectrum: &SpectrumPmf, rate: f64, m: f64, gamma: f64) -> BoundReport {
    let n = spectrum.n();
    let value = spectrum.tail_leq(rate - gamma) - exp(-(n as f64) * gamma);
    BoundReport::new(BoundKind::VerduHan, n, m, Some(gamma), None, value, LawTag::Codebook)
}

/// `count` values spaced geometrically from `1/(2n)` to `1`.
pub fn gamma_grid(n: usize, count: usize) -> Vec<f64> {
    let lo = 1.0 / (2.0 * n.max(1) as f64);
    match count {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let ratio = powf(1.0 / lo, 1.0 / (count - 1) as f64);
            (0..count)
                .map(|i| if i + 1 == count { 1.0 } else { lo * powf(ratio, i as f64) })
                .collect()
        }
    }
}

/// One row of the finite-n threshold-rate comparison across tilts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltRateRow {
    pub s: f64,
    /// Mean of the per-letter tilted density.
    pub tilted_mean: f64,
    /// Largest `R` with `feinstein_bound <= eps`, or `None` when
    /// `e^{-nγ} >= eps` leaves no room for the tail term.
    pub rate: Option<f64>,
}

/// For each `s`, the largest rate the Feinstein-type bound certifies at error
/// level `eps`: `sup { R : P[Z_n(s) <= R - ln(s)/n + γ] <= eps - e^{-nγ} }`.
pub fn tilt_rate_table(
    pair: &ProblemPair,
    p: &InputDist,
    n: usize,
    eps: f64,
    gamma: f64,
    s_grid: &[f64],
    budget: &Budget,
) -> Result<Vec<TiltRateRow>> {
    check_common(n, 1.0)?;
    check_gamma(gamma)?;
    let nf = n as f64;
    let room = eps - exp(-nf * gamma);
    s_grid
        .iter()
        .map(|&s| {
            check_s(s)?;
            let table = tilted_density_table(pair, p, s, None)?;
            let spectrum = SpectrumPmf::from_letter_law(&table.letter_law(), n, LawTag::InputProduct, budget)?;
            let rate = (room > 0.0).then(|| spectrum.quantile(room) + ln(s) / nf - gamma);
            Ok(TiltRateRow {
                s,
                tilted_mean: table.mean(),
                rate,
            })
        })
        .collect()
}

/// Grids and trial counts for one sandwich configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichConfig {
    pub n: usize,
    pub m: usize,
    pub seeds: Vec<u64>,
    pub gammas: Vec<f64>,
    pub s_grid: Vec<f64>,
    /// Monte Carlo trials per codebook; zero skips simulation.
    pub mc_trials: u64,
}

/// Achievability bounds over the grids, shared by every codebook of a
/// configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct AchievabilityTable {
    /// Per γ: the tilt minimizing the Feinstein bound and that minimum.
    pub feinstein: Vec<(f64, f64, f64)>,
    /// Minimum RCU value over the s grid and its argmin.
    pub rcu: f64,
    pub rcu_s: f64,
    /// RCU at `s = 1` (appended to the grid when absent).
    pub rcu_at_one: f64,
}

impl AchievabilityTable {
    pub fn min_bound(&self) -> f64 {
        self.feinstein.iter().map(|f| f.2).fold(self.rcu, f64::min)
    }
}

pub fn achievability_table(pair: &ProblemPair, p: &InputDist, cfg: &SandwichConfig, budget: &Budget) -> Result<AchievabilityTable> {
    check_dist(pair, p)?;
    check_common(cfg.n, cfg.m as f64)?;
    let mut s_grid = cfg.s_grid.clone();
    if !s_grid.contains(&1.0) {
        s_grid.push(1.0);
    }
    let m = cfg.m as f64;
    let mut spectra = Vec::with_capacity(s_grid.len());
    for &s in &s_grid {
        spectra.push((s, tilted_spectrum(pair, p, cfg.n, s, budget)?));
    }
    let mut rcu = f64::INFINITY;
    let mut rcu_s = 1.0;
    let mut rcu_at_one = f64::NAN;
    for (s, sp) in &spectra {
        let v = rcu_from_spectrum(sp, m, *s).value;
        if v < rcu {
            rcu = v;
            rcu_s = *s;
        }
        if *s == 1.0 {
            rcu_at_one = v;
        }
    }
    let mut feinstein = Vec::with_capacity(cfg.gammas.len());
    for &g in &cfg.gammas {
        check_gamma(g)?;
        let mut best = (g, 1.0, f64::INFINITY);
        for (s, sp) in &spectra {
            let v = feinstein_from_spectrum(sp, m, g, *s).value;
            if v < best.2 {
                best = (g, *s, v);
            }
        }
        feinstein.push(best);
    }
    Ok(AchievabilityTable {
        feinstein,
        rcu,
        rcu_s,
        rcu_at_one,
    })
}

/// Exact and simulated error of one seeded i.i.d. codebook with its
/// converse bound at every γ.
#[derive(Debug, Clone, PartialEq)]
pub struct CodebookCell {
    pub seed: u64,
    pub pe_exact: f64,
    pub pe_mc: Option<f64>,
    pub stderr: Option<f64>,
    pub verdu_han: Vec<f64>,
}

/// Seed for the Monte Carlo trials of the codebook drawn with `seed`, kept
/// apart from the generator that drew the codebook.
pub fn mc_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03)
}

pub fn codebook_cell(pair: &ProblemPair, p: &InputDist, cfg: &SandwichConfig, seed: u64, budget: &Budget) -> Result<CodebookCell> {
    let cb = gen_codebook(&Ensemble::Iid(p.clone()), cfg.n, cfg.m, seed)?;
    let dec = DecoderKind::stochastic(pair.metric().clone());
    let pe_exact = exact_error(&cb, pair.channel(), &dec, budget)?.pe;
    let (pe_mc, stderr) = if cfg.mc_trials > 0 {
        let e = mc_error(&cb, pair.channel(), &dec, cfg.mc_trials, mc_seed(seed))?;
        (Some(e.pe), Some(e.stderr))
    } else {
        (None, None)
    };
    let spectrum = codebook_spectrum(&cb, pair.channel(), pair.metric(), budget)?;
    let verdu_han = cfg
        .gammas
        .iter()
        .map(|&g| verdu_han_from_spectrum(&spectrum, cb.rate(), cfg.m as f64, g).value)
        .collect();
    Ok(CodebookCell {
        seed,
        pe_exact,
        pe_mc,
        stderr,
        verdu_han,
    })
}

/// One CSV row: a codebook at one γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichRow {
    pub n: usize,
    pub m: usize,
    pub gamma: f64,
    /// Tilt minimizing the Feinstein bound at this γ.
    pub s: f64,
    pub seed: u64,
    pub pe_exact: f64,
    pub pe_mc: Option<f64>,
    pub stderr: Option<f64>,
    pub feinstein: f64,
    /// Minimum RCU value over the s grid.
    pub rcu: f64,
    pub verdu_han: f64,
    pub verdict_a: bool,
    pub verdict_b: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichSummary {
    pub n: usize,
    pub m: usize,
    pub codebooks: usize,
    /// Sample mean of the exact errors over the seeded codebooks and its
    /// standard error.
    pub mean_pe: f64,
    pub mean_stderr: f64,
    pub min_achievability: f64,
    pub rcu_at_one: f64,
    /// Exact i.i.d.-ensemble average error, when it fits the budget.
    pub ensemble_pe: Option<f64>,
    /// `mean_pe <= min_achievability + 4 * mean_stderr`.
    pub verdict_a: bool,
    /// Every codebook's exact error is at least its converse bound.
    pub verdict_b: bool,
    /// `ensemble_pe <= rcu_at_one + 1e-12` (true when not computed).
    pub ensemble_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub rows: Vec<SandwichRow>,
    pub summary: SandwichSummary,
}

/// Combines per-codebook cells into the report. Rows are ordered by seed,
/// then γ, regardless of the order the cells were computed in.
pub fn assemble_sandwich(
    cfg: &SandwichConfig,
    ach: &AchievabilityTable,
    mut cells: Vec<CodebookCell>,
    ensemble_pe: Option<f64>,
) -> SandwichReport {
    cells.sort_by_key(|c| c.seed);
    let count = cells.len();
    let mean_pe = if count == 0 { 0.0 } else { cells.iter().map(|c| c.pe_exact).sum::<f64>() / count as f64 };
    let mean_stderr = if count < 2 {
        0.0
    } else {
        let var = cells.iter().map(|c| (c.pe_exact - mean_pe) * (c.pe_exact - mean_pe)).sum::<f64>() / (count - 1) as f64;
        sqrt(var / count as f64)
    };
    let min_achievability = ach.min_bound();
    let verdict_a = mean_pe <= min_achievability + 4.0 * mean_stderr + SANDWICH_TOL;

    let mut rows = Vec::with_capacity(count * cfg.gammas.len());
    let mut all_b = true;
    for cell in &cells {
        for (gi, &(gamma, s, feinstein)) in ach.feinstein.iter().enumerate() {
            let vh = cell.verdu_han[gi];
            let verdict_b = cell.pe_exact >= vh - SANDWICH_TOL;
            all_b &= verdict_b;
            rows.push(SandwichRow {
                n: cfg.n,
                m: cfg.m,
                gamma,
                s,
                seed: cell.seed,
                pe_exact: cell.pe_exact,
                pe_mc: cell.pe_mc,
                stderr: cell.stderr,
                feinstein,
                rcu: ach.rcu,
                verdu_han: vh,
                verdict_a,
                verdict_b,
            });
        }
    }
    let ensemble_ok = ensemble_pe.is_none_or(|e| e <= ach.rcu_at_one + SANDWICH_TOL);
    SandwichReport {
        rows,
        summary: SandwichSummary {
            n: cfg.n,
            m: cfg.m,
            codebooks: count,
            mean_pe,
            mean_stderr,
            min_achievability,
            rcu_at_one: ach.rcu_at_one,
            ensemble_pe,
            verdict_a,
            verdict_b: all_b,
            ensemble_ok,
        },
    }
}

/// The exact ensemble average, or `None` when it would exceed the budget.
pub fn ensemble_average(pair: &ProblemPair, p: &InputDist, cfg: &SandwichConfig, budget: &Budget) -> Result<Option<f64>> {
    match ensemble_exact_error(pair, p, cfg.n, cfg.m, budget) {
        Ok(e) => Ok(Some(e.pe)),
        Err(Error::BudgetExceeded { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Sequential sandwich run over every seed of the configuration.
pub fn sandwich_report(pair: &ProblemPair, p: &InputDist, cfg: &SandwichConfig, budget: &Budget) -> Result<SandwichReport> {
    let ach = achievability_table(pair, p, cfg, budget)?;
    let cells = cfg
        .seeds
        .iter()
        .map(|&seed| codebook_cell(pair, p, cfg, seed, budget))
        .collect::<Result<Vec<_>>>()?;
    let ensemble = ensemble_average(pair, p, cfg, budget)?;
    Ok(assemble_sandwich(cfg, &ach, cells, ensemble))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::validate_pair;
    use alloc::vec;

    fn matched() -> ProblemPair {
        let w = ChannelSpec::bsc(0.1).unwrap();
        let q = MetricSpec::matched(&w);
        validate_pair(w, q).unwrap()
    }

    fn mismatched() -> ProblemPair {
        validate_pair(ChannelSpec::bsc(0.1).unwrap(), MetricSpec::bsc(0.05).unwrap()).unwrap()
    }

    fn u() -> InputDist {
        InputDist::uniform(2).unwrap()
    }

    /// `ln C(n, k)` by summing logs.
    fn ln_binom(n: usize, k: usize) -> f64 {
        (1..=k).map(|i| libm::log((n - k + i) as f64) - libm::log(i as f64)).sum()
    }

    #[test]
    fn feinstein_small() {
        let b = feinstein_bound(&matched(), &u(), 2, 2.0, 0.05, None, &Budget::default()).unwrap();
        assert!((b.value - (0.19 + libm::exp(-0.1))).abs() < 1e-12);
        assert!((b.value - 1.094837).abs() < 1e-6);
        assert!(b.vacuous);
    }

    #[test]
    fn feinstein_n50_binomial_oracle() {
        // Z_50 = (1/50)[(50-k) ln 1.8 + k ln 0.2] with k ~ Bin(50, 0.1)
        let n = 50;
        let r = 0.1;
        let gamma = 0.05;
        let thr = r + gamma;
        let mut tail = 0.0;
        for k in 0..=n {
            let z = ((n - k) as f64 * libm::log(1.8) + k as f64 * libm::log(0.2)) / n as f64;
            if z <= thr {
                tail += libm::exp(ln_binom(n, k) + k as f64 * libm::log(0.1) + (n - k) as f64 * libm::log(0.9));
            }
        }
        let expect = tail + libm::exp(-(n as f64) * gamma);
        let b = feinstein_bound(&matched(), &u(), n, libm::exp(5.0), gamma, None, &Budget::default()).unwrap();
        assert!((b.value - expect).abs() < 1e-12);
        assert!((b.value - 0.106623).abs() < 1e-6);
    }

    #[test]
    fn feinstein_large_gamma() {
        let b = feinstein_bound(&mismatched(), &u(), 3, 2.0, 50.0, Some(0.5), &Budget::default()).unwrap();
        assert!((b.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rcu_examples() {
        let b = rcu_s_bound(&matched(), &u(), 1, 2.0, 1.0, &Budget::default()).unwrap();
        assert!((b.value - 0.6).abs() < 1e-15);
        let one = rcu_s_bound(&matched(), &u(), 4, 1.0, 0.7, &Budget::default()).unwrap();
        assert_eq!(one.value, 0.0);
        let scan: f64 = [0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&s| rcu_s_bound(&matched(), &u(), 1, 2.0, s, &Budget::default()).unwrap().value)
            .fold(f64::INFINITY, f64::min);
        assert!(scan <= b.value);
    }

    #[test]
    fn verdu_han_example() {
        let cb = Codebook::new(1, 2, vec![vec![0], vec![1]]).unwrap();
        let w = ChannelSpec::bsc(0.1).unwrap();
        let b = verdu_han_bound(&cb, &w, &MetricSpec::matched(&w), 0.5, &Budget::default()).unwrap();
        assert!((b.value - (0.1 - libm::exp(-0.5))).abs() < 1e-15);
        assert!((b.value + 0.506531).abs() < 1e-6);
        assert!(b.vacuous && b.law == LawTag::Codebook);
    }

    #[test]
    fn rcu_below_feinstein_and_monotone_in_m() {
        let pair = mismatched();
        let b = Budget::default();
        for n in [1, 3, 6] {
            for &s in &[0.3, 0.75, 1.0] {
                let mut prev = 0.0;
                for m in [1.0, 2.0, 4.0, 8.0, 30.0] {
                    let rcu = rcu_s_bound(&pair, &u(), n, m, s, &b).unwrap().value;
                    for g in gamma_grid(n, 6) {
                        let f = feinstein_bound(&pair, &u(), n, m, g, Some(s), &b).unwrap().value;
                        assert!(rcu <= f + 1e-12, "n={n} s={s} m={m} g={g}");
                    }
                    let f = feinstein_bound(&pair, &u(), n, m, 0.1, Some(s), &b).unwrap().value;
                    assert!(f >= prev);
                    prev = f;
                }
            }
        }
    }

    #[test]
    fn gamma_grid_shape() {
        let g = gamma_grid(4, 5);
        assert_eq!(g.len(), 5);
        assert!((g[0] - 0.125).abs() < 1e-15 && g[4] == 1.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!((g[1] / g[0] - g[2] / g[1]).abs() < 1e-12);
        assert_eq!(gamma_grid(3, 1), vec![1.0 / 6.0]);
    }

    #[test]
    fn bad_arguments() {
        let b = Budget::default();
        assert!(feinstein_bound(&matched(), &u(), 2, 2.0, 0.0, None, &b).is_err());
        assert!(feinstein_bound(&matched(), &u(), 2, 2.0, 0.1, Some(1.5), &b).is_err());
        assert!(rcu_s_bound(&matched(), &u(), 0, 2.0, 1.0, &b).is_err());
        assert!(rcu_s_bound(&matched(), &u(), 2, 0.5, 1.0, &b).is_err());
    }

    #[test]
    fn tilt_table_is_computed() {
        let grid = [0.25, 0.5, 0.75, 1.0];
        let rows = tilt_rate_table(&mismatched(), &u(), 40, 0.3, 0.05, &grid, &Budget::default()).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.rate.is_some()));
        // certified rate can never exceed what the bound's own tail allows
        for r in &rows {
            let f = feinstein_bound(&mismatched(), &u(), 40, libm::exp(40.0 * (r.rate.unwrap() - 1e-9)), 0.05, Some(r.s), &Budget::default()).unwrap();
            assert!(f.value <= 0.3 + 1e-12);
        }
    }

    #[test]
    fn sandwich_small() {
        for pair in [matched(), mismatched()] {
            let cfg = SandwichConfig {
                n: 4,
                m: 4,
                seeds: (0..10).collect(),
                gammas: gamma_grid(4, 4),
                s_grid: vec![0.5, 1.0],
                mc_trials: 200,
            };
            let rep = sandwich_report(&pair, &u(), &cfg, &Budget::default()).unwrap();
            assert_eq!(rep.rows.len(), 40);
            assert!(rep.summary.verdict_a && rep.summary.verdict_b && rep.summary.ensemble_ok);
            assert!(rep.summary.ensemble_pe.unwrap() <= rep.summary.rcu_at_one + 1e-12);
        }
    }

    #[test]
    fn sandwich_single_message() {
        let cfg = SandwichConfig {
            n: 3,
            m: 1,
            seeds: vec![5, 1],
            gammas: vec![0.2],
            s_grid: vec![1.0],
            mc_trials: 50,
        };
        let rep = sandwich_report(&mismatched(), &u(), &cfg, &Budget::default()).unwrap();
        assert!(rep.rows.iter().all(|r| r.pe_exact == 0.0 && r.verdict_a && r.verdict_b));
        assert_eq!(rep.rows[0].seed, 1);
        assert_eq!(rep.summary.ensemble_pe, Some(0.0));
    }
}
