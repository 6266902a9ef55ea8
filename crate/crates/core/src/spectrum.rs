//! Exact laws of sums of i.i.d. discrete random variables.
//!
//! A [`Pmf`] is a sorted list of atoms. Convolution is a streaming k-way merge of
//! the shifted copies of the left operand, so memory stays proportional to the
//! output. Atoms whose values lie within [`MERGE_TOL`] of a cluster's first
//! value are merged into it.

use alloc::vec::Vec;

use crate::budget::Budget;
use crate::error::{Error, Result};

/// Atoms closer than this (in value) are merged.
pub const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub prob: f64,
}

/// Probability mass function with strictly increasing, merged atom values.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    atoms: Vec<Atom>,
}

/// Appends to a sorted output, merging into the last cluster when close.
struct Merger {
    atoms: Vec<Atom>,
}

impl Merger {
    fn with_capacity(n: usize) -> Self {
        Merger {
            atoms: Vec::with_capacity(n),
        }
    }

    #[inline]
    fn push(&mut self, value: f64, prob: f64) {
        if prob == 0.0 {
            return;
        }
        match self.atoms.last_mut() {
            Some(last) if value - last.value <= MERGE_TOL => last.prob += prob,
            _ => self.atoms.push(Atom { value, prob }),
        }
    }
}

impl Pmf {
    /// Builds a PMF from unsorted `(value, prob)` pairs. Zero-probability atoms
    /// are dropped; values must be finite.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Pmf> {
        let mut raw: Vec<(f64, f64)> = pairs.into_iter().filter(|&(_, p)| p > 0.0).collect();
        if raw.iter().any(|(v, _)| !v.is_finite()) {
            return Err(Error::InvalidArgument("atom values must be finite"));
        }
        if raw.iter().any(|(_, p)| !p.is_finite()) {
            return Err(Error::InvalidArgument("atom probabilities must be finite"));
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merger = Merger::with_capacity(raw.len());
        for (v, p) in raw {
            merger.push(v, p);
        }
        Ok(Pmf {
            atoms: merger.atoms,
        })
    }

    /// Point mass at `value`.
    pub fn point(value: f64) -> Pmf {
        Pmf {
            atoms: alloc::vec![Atom { value, prob: 1.0 }],
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|a| a.prob).sum()
    }

    /// Law of `A + B` for independent `A ~ self`, `B ~ other`.
    pub fn convolve(&self, other: &Pmf, budget: &Budget) -> Result<Pmf> {
        let (long, short) = if self.len() >= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        // heads[j] indexes into `long` for the copy shifted by short[j]
        let mut heads: Vec<usize> = alloc::vec![0; short.len()];
        let mut merger = Merger::with_capacity(long.len() + short.len());
        loop {
            let mut best: Option<(usize, f64)> = None;
            for (j, &h) in heads.iter().enumerate() {
                if h < long.len() {
                    let v = long.atoms[h].value + short.atoms[j].value;
                    if best.is_none_or(|(_, bv)| v < bv) {
                        best = Some((j, v));
                    }
                }
            }
            let Some((j, v)) = best else { break };
            merger.push(v, long.atoms[heads[j]].prob * short.atoms[j].prob);
            heads[j] += 1;
            if merger.atoms.len() > budget.atoms {
                return Err(Error::BudgetExceeded {
                    what: "spectrum atoms",
                    needed: merger.atoms.len() as u128,
                    limit: budget.atoms as u128,
                });
            }
        }
        Ok(Pmf {
            atoms: merger.atoms,
        })
    }

    /// Law of the sum of `n` independent copies.
    pub fn iid_sum(&self, n: usize, budget: &Budget) -> Result<Pmf> {
        let mut acc = Pmf::point(0.0);
        for _ in 0..n {
            acc = acc.convolve(self, budget)?;
        }
        Ok(acc)
    }

    /// Multiplies every value by `c > 0` (order preserving).
    pub fn scaled(mut self, c: f64) -> Pmf {
        debug_assert!(c > 0.0);
        for a in &mut self.atoms {
            a.value *= c;
        }
        self
    }
}

/// Which joint law generated a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawTag {
    /// `(X^n, Y^n) ~ P_X^n W^n`, i.i.d. inputs.
    InputProduct,
    /// `(X^n, Y^n) ~ P^U W^n`, uniform over the codewords of a codebook.
    Codebook,
}

impl LawTag {
    pub fn as_str(self) -> &'static str {
        match self {
            LawTag::InputProduct => "input_product",
            LawTag::Codebook => "codebook",
        }
    }
}

/// Exact law of the normalized information density `Z_n` at block length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPmf {
    pmf: Pmf,
    n: usize,
    law: LawTag,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumQuery {
    /// `P[Z_n <= alpha]`.
    TailLeq(f64),
    /// `sup { alpha : P[Z_n <= alpha] <= eps }`, i.e. the smallest atom at
    /// which the CDF strictly exceeds `eps`.
    Quantile(f64),
    Mean,
    SecondMoment,
}

impl SpectrumPmf {
    /// `pmf` holds values of `Z_n` (already divided by `n`).
    pub fn new(pmf: Pmf, n: usize, law: LawTag) -> SpectrumPmf {
        SpectrumPmf { pmf, n, law }
    }

    /// Builds the spectrum of `(1/n) Σ V_i` for `V_i` i.i.d. with the given
    /// per-letter law.
    pub fn from_letter_law(letter: &Pmf, n: usize, law: LawTag, budget: &Budget) -> Result<SpectrumPmf> {
        if n == 0 {
            return Err(Error::InvalidArgument("block length must be at least 1"));
        }
        let sum = letter.iid_sum(n, budget)?;
        Ok(SpectrumPmf::new(sum.scaled(1.0 / n as f64), n, law))
    }

    pub fn atoms(&self) -> &[Atom] {
        self.pmf.atoms()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn law(&self) -> LawTag {
        self.law
    }

    pub fn query(&self, query: SpectrumQuery) -> f64 {
        match query {
            SpectrumQuery::TailLeq(alpha) => self.tail_leq(alpha),
            SpectrumQuery::Quantile(eps) => self.quantile(eps),
            SpectrumQuery::Mean => self.mean(),
            SpectrumQuery::SecondMoment => self.second_moment(),
        }
    }

    pub fn tail_leq(&self, alpha: f64) -> f64 {
        self.atoms()
            .iter()
            .take_while(|a| a.value <= alpha)
            .map(|a| a.prob)
            .sum()
    }

    /// `P[Z_n >= alpha]`.
    pub fn tail_geq(&self, alpha: f64) -> f64 {
        self.atoms()
            .iter()
            .filter(|a| a.value >= alpha)
            .map(|a| a.prob)
            .sum()
    }

    pub fn quantile(&self, eps: f64) -> f64 {
        let mut cdf = 0.0;
        for a in self.atoms() {
            cdf += a.prob;
            if cdf > eps {
                return a.value;
            }
        }
        // rounding left the total just below 1 and eps above it
        self.atoms().last().map_or(f64::NAN, |a| a.value)
    }

    pub fn mean(&self) -> f64 {
        self.atoms().iter().map(|a| a.prob * a.value).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.atoms().iter().map(|a| a.prob * a.value * a.value).sum()
    }

    /// `E[f(Z_n)]`.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms().iter().map(|a| a.prob * f(a.value)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_point() -> Pmf {
        Pmf::from_pairs([(libm::log(1.8), 0.9), (libm::log(0.2), 0.1)]).unwrap()
    }

    #[test]
    fn merge_and_sort() {
        let p = Pmf::from_pairs([(1.0, 0.25), (0.0, 0.5), (1.0 + 1e-14, 0.25), (3.0, 0.0)]).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.atoms()[0], Atom { value: 0.0, prob: 0.5 });
        assert_eq!(p.atoms()[1].prob, 0.5);
    }

    #[test]
    fn binomial_weights() {
        let s = SpectrumPmf::from_letter_law(&two_point(), 3, LawTag::InputProduct, &Budget::default()).unwrap();
        let probs: vec::Vec<f64> = s.atoms().iter().rev().map(|a| a.prob).collect();
        let expect = [0.729, 0.243, 0.027, 0.001];
        assert_eq!(probs.len(), 4);
        for (p, e) in probs.iter().zip(expect) {
            assert!((p - e).abs() < 1e-15);
        }
    }

    #[test]
    fn queries_on_n2() {
        let s = SpectrumPmf::from_letter_law(&two_point(), 2, LawTag::InputProduct, &Budget::default()).unwrap();
        assert!((s.tail_leq(0.0) - 0.19).abs() < 1e-15);
        assert!((s.quantile(0.1) - (-0.510825623765991)).abs() < 1e-12);
        assert!((s.quantile(0.0) - libm::log(0.2)).abs() < 1e-12);
        assert!((s.quantile(0.5) - libm::log(1.8)).abs() < 1e-12);
    }

    #[test]
    fn budget_enforced() {
        let letter = Pmf::from_pairs([(0.0, 0.5), (1.0, 0.25), (core::f64::consts::PI, 0.25)]).unwrap();
        let tiny = Budget {
            atoms: 10,
            ..Budget::default()
        };
        assert!(matches!(
            letter.iid_sum(10, &tiny),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn rejects_bad_atoms() {
        assert!(Pmf::from_pairs([(f64::NEG_INFINITY, 0.5)]).is_err());
        assert!(SpectrumPmf::from_letter_law(&two_point(), 0, LawTag::InputProduct, &Budget::default()).is_err());
    }
}
