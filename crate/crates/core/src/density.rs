//! Mismatched information densities
//! `i_q(x, y) = log q(x, y) - log Σ_x̄ P(x̄) q(x̄, y)`
//! and the exact finite-n checks built on their spectra.

use alloc::vec;
use alloc::vec::Vec;

use crate::budget::Budget;
use crate::channel::{InputDist, ProblemPair};
use crate::error::{Error, Result};
use crate::math::{exp, ln, log_sum_exp};
use crate::spectrum::{LawTag, Pmf, SpectrumPmf};

/// Per-letter density values together with the joint law `P(x) W(y|x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable {
    input_size: usize,
    output_size: usize,
    /// `None` where the value is undefined (zero metric, or an output whose
    /// metric average vanishes); such cells carry no joint mass.
    values: Vec<Option<f64>>,
    joint: Vec<f64>,
}

impl DensityTable {
    pub fn value(&self, x: usize, y: usize) -> Option<f64> {
        self.values[x * self.output_size + y]
    }

    pub fn joint(&self, x: usize, y: usize) -> f64 {
        self.joint[x * self.output_size + y]
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    /// Law of `i_q(X, Y)` under `P W`.
    pub fn letter_law(&self) -> Pmf {
        let pairs = self
            .values
            .iter()
            .zip(&self.joint)
            .filter(|(_, &j)| j > 0.0)
            .map(|(v, &j)| (v.expect("cells with joint mass have defined values"), j));
        Pmf::from_pairs(pairs).expect("density values are finite")
    }

    /// `E[i_q(X, Y)]` under `P W`.
    pub fn mean(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.joint)
            .filter(|(_, &j)| j > 0.0)
            .map(|(v, &j)| j * v.unwrap_or(0.0))
            .sum()
    }

    /// Sum of per-letter values along a pair of sequences.
    pub fn sequence_density(&self, xs: &[usize], ys: &[usize]) -> Result<f64> {
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch("sequences differ in length"));
        }
        let mut total = 0.0;
        for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
            check_symbol(x, self.input_size)?;
            check_symbol(y, self.output_size)?;
            total += self.value(x, y).ok_or(Error::ImpossiblePair { position: i })?;
        }
        Ok(total)
    }
}

pub(crate) fn check_symbol(symbol: usize, size: usize) -> Result<()> {
    if symbol >= size {
        Err(Error::SymbolOutOfRange { symbol, size })
    } else {
        Ok(())
    }
}

pub(crate) fn check_dist(pair: &ProblemPair, p: &InputDist) -> Result<()> {
    if p.len() != pair.input_size() {
        Err(Error::DimensionMismatch("input distribution does not match the input alphabet"))
    } else {
        Ok(())
    }
}

/// The table of `i_q` values for input distribution `p`.
pub fn density_table(pair: &ProblemPair, p: &InputDist) -> Result<DensityTable> {
    tilted_density_table(pair, p, 1.0, None)
}

/// Density of the tilted, offset metric `q^s e^{a(x)}`:
/// `s log q(x,y) + a(x) - log Σ_x̄ P(x̄) q(x̄,y)^s e^{a(x̄)}`.
pub fn tilted_density_table(
    pair: &ProblemPair,
    p: &InputDist,
    s: f64,
    offsets: Option<&[f64]>,
) -> Result<DensityTable> {
    check_dist(pair, p)?;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidArgument("tilt s must be positive"));
    }
    let nx = pair.input_size();
    let ny = pair.output_size();
    if let Some(a) = offsets {
        if a.len() != nx || a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("offsets must be finite, one per input"));
        }
    }
    let offset = |x: usize| offsets.map_or(0.0, |a| a[x]);
    let w = pair.channel();
    let q = pair.metric();
    let py = w.output_dist(p);

    // log of the tilted metric, -inf where q = 0
    let log_f = |x: usize, y: usize| {
        let v = q.value(x, y);
        if v > 0.0 {
            s * ln(v) + offset(x)
        } else {
            f64::NEG_INFINITY
        }
    };

    let mut values = vec![None; nx * ny];
    let mut joint = vec![0.0; nx * ny];
    for y in 0..ny {
        let terms = (0..nx)
            .filter(|&x| p.get(x) > 0.0)
            .map(|x| ln(p.get(x)) + log_f(x, y));
        let log_den = log_sum_exp(terms);
        if log_den == f64::NEG_INFINITY && py[y] > 0.0 {
            return Err(Error::DenominatorZero { y });
        }
        for x in 0..nx {
            joint[x * ny + y] = p.get(x) * w.prob(x, y);
            let lf = log_f(x, y);
            if lf > f64::NEG_INFINITY && log_den > f64::NEG_INFINITY {
                values[x * ny + y] = Some(lf - log_den);
            }
        }
    }
    Ok(DensityTable {
        input_size: nx,
        output_size: ny,
        values,
        joint,
    })
}

/// `i_q(xs, ys)` for the product metric.
pub fn sequence_density(pair: &ProblemPair, p: &InputDist, xs: &[usize], ys: &[usize]) -> Result<f64> {
    density_table(pair, p)?.sequence_density(xs, ys)
}

/// Matched information density `log W(y|x) / P_Y(y)`; `None` off the support of `W`.
pub fn channel_density(pair: &ProblemPair, p: &InputDist) -> Result<Vec<Option<f64>>> {
    check_dist(pair, p)?;
    let w = pair.channel();
    let py = w.output_dist(p);
    let ny = pair.output_size();
    let mut out = vec![None; pair.input_size() * ny];
    for x in 0..pair.input_size() {
        for y in 0..ny {
            if w.prob(x, y) > 0.0 && py[y] > 0.0 {
                out[x * ny + y] = Some(ln(w.prob(x, y)) - ln(py[y]));
            }
        }
    }
    Ok(out)
}

/// Exact law of `Z_n = (1/n) Σ i_q(X_i, Y_i)` with `(X_i, Y_i)` i.i.d. `P W`.
pub fn exact_spectrum(pair: &ProblemPair, p: &InputDist, n: usize, budget: &Budget) -> Result<SpectrumPmf> {
    let table = density_table(pair, p)?;
    SpectrumPmf::from_letter_law(&table.letter_law(), n, LawTag::InputProduct, budget)
}

/// Outcome of a finite-n inequality check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `P[(1/n) log L >= eps] <= e^{-n eps}` with
/// `L = (q / W) * (P_Y / E[q(X̄, Y) | Y])`, evaluated exactly.
///
/// `log L` is the difference between the mismatched and the matched density,
/// and `E[L] <= 1`, which is what makes the inequality hold.
pub fn overshoot_check(
    pair: &ProblemPair,
    p: &InputDist,
    n: usize,
    eps: f64,
    budget: &Budget,
) -> Result<CheckOutcome> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive"));
    }
    let mismatched = density_table(pair, p)?;
    let matched = channel_density(pair, p)?;
    let ny = pair.output_size();
    let mut pairs = Vec::new();
    for x in 0..pair.input_size() {
        for y in 0..ny {
            let j = mismatched.joint(x, y);
            if j > 0.0 {
                let iq = mismatched.value(x, y).expect("defined on the joint support");
                let i = matched[x * ny + y].expect("defined on the joint support");
                pairs.push((iq - i, j));
            }
        }
    }
    let letter = Pmf::from_pairs(pairs)?;
    let spectrum = SpectrumPmf::from_letter_law(&letter, n, LawTag::InputProduct, budget)?;
    let lhs = spectrum.tail_geq(eps);
    let rhs = exp(-(n as f64) * eps);
    Ok(CheckOutcome {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}

/// Uniform second-moment constant `2 log² q⋆ + 2 log² (q⋆ / |X|)` for a metric
/// with `q⋆ <= q <= 1` on the support of `W`.
pub fn second_moment_bound(q_star: f64, input_size: usize) -> f64 {
    let a = ln(q_star);
    let b = ln(q_star / input_size as f64);
    2.0 * a * a + 2.0 * b * b
}

/// `E[Z_n²]` against [`second_moment_bound`] with the pair's normalized `q⋆`.
///
/// The constant is derived for uniform inputs (it lower-bounds the metric
/// average by `q⋆ / |X|`); for other inputs the flag may legitimately be false.
pub fn ui_bound_check(pair: &ProblemPair, p: &InputDist, n: usize, budget: &Budget) -> Result<CheckOutcome> {
    let moment = exact_spectrum(pair, p, n, budget)?.second_moment();
    let bound = second_moment_bound(pair.q_star(), pair.input_size());
    Ok(CheckOutcome {
        lhs: moment,
        rhs: bound,
        holds: moment <= bound + 1e-12,
    })
}
