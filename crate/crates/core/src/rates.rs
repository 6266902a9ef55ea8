//! k-letter GMI and LM achievable rates.
//!
//! For a (possibly k-letter) pair and input law `P`, the objective is
//!
//! ```text
//! (1/k) E[ log( q(X,Y)^s e^{a(X)} / Σ_x̄ P(x̄) q(x̄,Y)^s e^{a(x̄)} ) ]
//! ```
//!
//! under `P W`. GMI restricts to `a ≡ 0`; the `s = 1, a ≡ 0` restriction is the
//! mean mismatched information density. For fixed `P` the objective is jointly
//! concave in `(s, a)`: a linear term minus a log-sum-exp of affine functions.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::budget::Budget;
use crate::channel::{ChannelSpec, InputDist, ProblemPair};
use crate::density::{check_dist, tilted_density_table};
use crate::error::{Error, Result};
use crate::math::{abs, binary_entropy, exp, ln, log_sum_exp, sqrt};

/// Smallest tilt considered; the objective degenerates as `s -> 0`.
pub const S_MIN: f64 = 1e-9;
/// Gradient-norm threshold of the LM ascent.
pub const LM_GRAD_TOL: f64 = 1e-9;
/// Iteration cap of the LM ascent.
pub const LM_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateStatus {
    Exact,
    Converged,
    BudgetHit,
}

impl RateStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RateStatus::Exact => "exact",
            RateStatus::Converged => "converged",
            RateStatus::BudgetHit => "budget_hit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMode {
    /// Optimize `s`, `a ≡ 0`.
    Gmi,
    /// Optimize `s` and the offsets `a`.
    Lm,
    /// `s = 1`, `a ≡ 0`.
    S1,
}

impl RateMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RateMode::Gmi => "gmi",
            RateMode::Lm => "lm",
            RateMode::S1 => "s1",
        }
    }
}

/// A rate in nats per channel use with the parameters that attain it.
#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub value: f64,
    pub k: usize,
    pub s: f64,
    /// Offsets over the (k-letter) input alphabet; all zero outside LM mode.
    pub a: Vec<f64>,
    pub p: InputDist,
    pub status: RateStatus,
}

/// Exact objective value by enumeration over the k-letter joint law.
pub fn rate_objective(pair: &ProblemPair, p: &InputDist, s: f64, a: Option<&[f64]>) -> Result<f64> {
    Ok(tilted_density_table(pair, p, s, a)?.mean() / pair.k() as f64)
}

/// Precomputed quantities for repeated objective/gradient evaluation at fixed
/// `P`.
struct Objective<'a> {
    pair: &'a ProblemPair,
    p: &'a [f64],
    py: Vec<f64>,
    /// `ln q`, `-inf` where `q = 0`.
    log_q: Vec<f64>,
    /// `Σ_{x,y} P(x) W(y|x) ln q(x,y)`.
    mean_log_q: f64,
    inv_k: f64,
}

struct Eval {
    value: f64,
    grad_s: f64,
    grad_a: Vec<f64>,
}

impl<'a> Objective<'a> {
    fn new(pair: &'a ProblemPair, p: &'a InputDist) -> Objective<'a> {
        let ny = pair.output_size();
        let nx = pair.input_size();
        let log_q: Vec<f64> = pair
            .metric()
            .matrix()
            .as_slice()
            .iter()
            .map(|&v| if v > 0.0 { ln(v) } else { f64::NEG_INFINITY })
            .collect();
        let mut mean_log_q = 0.0;
        for x in 0..nx {
            for y in 0..ny {
                let j = p.get(x) * pair.channel().prob(x, y);
                if j > 0.0 {
                    mean_log_q += j * log_q[x * ny + y];
                }
            }
        }
        Objective {
            pair,
            p: p.as_slice(),
            py: pair.channel().output_dist(p),
            log_q,
            mean_log_q,
            inv_k: 1.0 / pair.k() as f64,
        }
    }

    fn ny(&self) -> usize {
        self.pair.output_size()
    }

    fn log_den(&self, y: usize, s: f64, a: &[f64]) -> f64 {
        let ny = self.ny();
        log_sum_exp(
            (0..self.p.len())
                .filter(|&x| self.p[x] > 0.0)
                .map(move |x| ln(self.p[x]) + s * self.log_q[x * ny + y] + a[x]),
        )
    }

    fn value(&self, s: f64, a: &[f64]) -> f64 {
        let lin: f64 = s * self.mean_log_q + self.p.iter().zip(a).map(|(p, a)| p * a).sum::<f64>();
        let den: f64 = (0..self.ny())
            .filter(|&y| self.py[y] > 0.0)
            .map(|y| self.py[y] * self.log_den(y, s, a))
            .sum();
        (lin - den) * self.inv_k
    }

    fn eval(&self, s: f64, a: &[f64]) -> Eval {
        let ny = self.ny();
        let nx = self.p.len();
        let mut den = 0.0;
        let mut grad_s = self.mean_log_q;
        let mut grad_a: Vec<f64> = self.p.to_vec();
        for y in 0..ny {
            if self.py[y] == 0.0 {
                continue;
            }
            let ld = self.log_den(y, s, a);
            den += self.py[y] * ld;
            for x in 0..nx {
                let lq = self.log_q[x * ny + y];
                if self.p[x] == 0.0 || lq == f64::NEG_INFINITY {
                    continue;
                }
                let mu = exp(ln(self.p[x]) + s * lq + a[x] - ld);
                grad_s -= self.py[y] * mu * lq;
                grad_a[x] -= self.py[y] * mu;
            }
        }
        let lin: f64 = s * self.mean_log_q + self.p.iter().zip(a).map(|(p, a)| p * a).sum::<f64>();
        for g in &mut grad_a {
            *g *= self.inv_k;
        }
        Eval {
            value: (lin - den) * self.inv_k,
            grad_s: grad_s * self.inv_k,
            grad_a,
        }
    }
}

/// Golden-section maximization of a concave function on `[lo, hi]`; returns
/// the best of the final bracket point and both endpoints.
fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for x in [lo, hi, c, d] {
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

fn gmi_inner(obj: &Objective<'_>) -> (f64, f64) {
    let zeros = vec![0.0; obj.p.len()];
    golden_max(|s| obj.value(s, &zeros), S_MIN, 1.0, 1e-12)
}

/// Last input with positive probability; its offset is pinned to zero.
fn anchor(p: &[f64]) -> usize {
    p.iter().rposition(|&v| v > 0.0).unwrap_or(0)
}

/// Projected gradient ascent over `(s, a)` from a starting point, with
/// Barzilai-Borwein steps and Armijo backtracking. `s` is kept in
/// `[S_MIN, 1]`; offsets of zero-probability inputs and of the anchor stay 0.
fn lm_ascent(obj: &Objective<'_>, s0: f64, a0: &[f64], max_iter: usize) -> (f64, Vec<f64>, f64, RateStatus) {
    let nx = obj.p.len();
    let anchor = anchor(obj.p);
    let free: Vec<bool> = (0..nx).map(|x| obj.p[x] > 0.0 && x != anchor).collect();
    let mut s = s0.clamp(S_MIN, 1.0);
    let mut a: Vec<f64> = a0
        .iter()
        .enumerate()
        .map(|(x, &v)| if free[x] { v - a0[anchor] } else { 0.0 })
        .collect();
    let mut cur = obj.eval(s, &a);
    let mut step = 1.0;

    let projected = |s: f64, e: &Eval| -> (f64, Vec<f64>) {
        let gs = if (s >= 1.0 && e.grad_s > 0.0) || (s <= S_MIN && e.grad_s < 0.0) {
            0.0
        } else {
            e.grad_s
        };
        let ga = (0..nx).map(|x| if free[x] { e.grad_a[x] } else { 0.0 }).collect();
        (gs, ga)
    };

    for _ in 0..max_iter {
        let (gs, ga) = projected(s, &cur);
        let norm = sqrt(gs * gs + ga.iter().map(|g| g * g).sum::<f64>());
        if norm < LM_GRAD_TOL {
            return (s, a, cur.value, RateStatus::Converged);
        }
        let mut accepted = None;
        let mut t = step;
        while t > 1e-30 {
            let s_new = (s + t * gs).clamp(S_MIN, 1.0);
            let a_new: Vec<f64> = (0..nx).map(|x| a[x] + t * ga[x]).collect();
            let ds = s_new - s;
            let lin: f64 = ds * gs + (0..nx).map(|x| (a_new[x] - a[x]) * ga[x]).sum::<f64>();
            let next = obj.eval(s_new, &a_new);
            if next.value >= cur.value + 1e-4 * lin {
                accepted = Some((s_new, a_new, next));
                break;
            }
            t *= 0.5;
        }
        let Some((s_new, a_new, next)) = accepted else {
            // no ascent direction left at working precision
            return (s, a, cur.value, RateStatus::Converged);
        };
        // Barzilai-Borwein: |<Δx, Δx> / <Δx, Δg>|
        let dx_s = s_new - s;
        let dg_s = next.grad_s - cur.grad_s;
        let mut xx = dx_s * dx_s;
        let mut xg = dx_s * dg_s;
        for x in 0..nx {
            if free[x] {
                let dx = a_new[x] - a[x];
                xx += dx * dx;
                xg += dx * (next.grad_a[x] - cur.grad_a[x]);
            }
        }
        step = if xg != 0.0 { abs(xx / xg).clamp(1e-10, 1e10) } else { 1.0 };
        s = s_new;
        a = a_new;
        cur = next;
    }
    (s, a, cur.value, RateStatus::BudgetHit)
}

/// Optimizes the tilt (and for LM the offsets) at a fixed input law.
pub fn optimize_params(pair: &ProblemPair, p: &InputDist, mode: RateMode) -> Result<RateResult> {
    check_dist(pair, p)?;
    let obj = Objective::new(pair, p);
    let zeros = vec![0.0; p.len()];
    let (value, s, a, status) = match mode {
        RateMode::S1 => (obj.value(1.0, &zeros), 1.0, zeros, RateStatus::Exact),
        RateMode::Gmi => {
            let (s, v) = gmi_inner(&obj);
            (v, s, zeros, RateStatus::Converged)
        }
        RateMode::Lm => {
            let (s0, v0) = gmi_inner(&obj);
            let (s, a, v, status) = lm_ascent(&obj, s0, &zeros, LM_MAX_ITER);
            if v >= v0 {
                (v, s, a, status)
            } else {
                (v0, s0, zeros, status)
            }
        }
    };
    Ok(RateResult {
        value,
        k: pair.k(),
        s,
        a,
        p: p.clone(),
        status,
    })
}

/// Settings of the multistart search over input laws.
#[derive(Debug, Clone)]
pub struct InputSearch {
    /// Random starting points in addition to the uniform law and the vertices.
    pub restarts: usize,
    pub seed: u64,
    /// Further starting points, e.g. products of a lower-order optimum.
    pub extra_starts: Vec<InputDist>,
    /// Outer iteration cap per start.
    pub max_iter: usize,
    /// Grid step of the deterministic cross-check on alphabets of size <= 3;
    /// `None` disables it.
    pub grid_step: Option<f64>,
}

impl Default for InputSearch {
    fn default() -> Self {
        InputSearch {
            restarts: 8,
            seed: 0,
            extra_starts: Vec::new(),
            max_iter: 2000,
            grid_step: Some(1e-3),
        }
    }
}

/// Inner optimum at `p` plus the envelope gradient with respect to `p`.
struct InnerEval {
    value: f64,
    s: f64,
    a: Vec<f64>,
    grad_p: Vec<f64>,
    status: RateStatus,
}

fn inner_eval(pair: &ProblemPair, p: &InputDist, mode: RateMode, warm: Option<(f64, &[f64])>) -> InnerEval {
    let obj = Objective::new(pair, p);
    let nx = p.len();
    let zeros = vec![0.0; nx];
    let (value, s, a, status) = match mode {
        RateMode::S1 => (obj.value(1.0, &zeros), 1.0, zeros, RateStatus::Converged),
        RateMode::Gmi => {
            let (s, v) = gmi_inner(&obj);
            (v, s, zeros, RateStatus::Converged)
        }
        RateMode::Lm => {
            let (s0, v0) = gmi_inner(&obj);
            let mut best = {
                let (s, a, v, st) = lm_ascent(&obj, s0, &zeros, 5_000);
                (v, s, a, st)
            };
            if let Some((ws, wa)) = warm {
                let (s, a, v, st) = lm_ascent(&obj, ws, wa, 5_000);
                if v > best.0 {
                    best = (v, s, a, st);
                }
            }
            if best.0 < v0 {
                (v0, s0, zeros, RateStatus::Converged)
            } else {
                best
            }
        }
    };

    // d/dP(x) of (1/k)[Σ P W (s lq + a) - Σ_y P_Y ln D_y], D_y = Σ P f
    let ny = pair.output_size();
    let w = pair.channel();
    let py = &obj.py;
    let floor = ln(f64::MIN_POSITIVE);
    let log_d: Vec<f64> = (0..ny).map(|y| obj.log_den(y, s, &a).max(floor)).collect();
    let mut grad_p = vec![0.0; nx];
    for (x, g) in grad_p.iter_mut().enumerate() {
        let mut acc = 0.0;
        for y in 0..ny {
            let lq = obj.log_q[x * ny + y];
            let wxy = w.prob(x, y);
            if wxy > 0.0 {
                acc += wxy * (s * lq + a[x] - log_d[y]);
            }
            if py[y] > 0.0 && lq > f64::NEG_INFINITY {
                acc -= py[y] * exp(s * lq + a[x] - log_d[y]);
            }
        }
        *g = acc * obj.inv_k;
    }
    InnerEval {
        value,
        s,
        a,
        grad_p,
        status,
    }
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn ascend_input(pair: &ProblemPair, mode: RateMode, start: &InputDist, max_iter: usize) -> Result<RateResult> {
    let mut p = start.clone();
    let mut cur = inner_eval(pair, &p, mode, None);
    let mut step = 1.0;
    let mut status = RateStatus::BudgetHit;
    for _ in 0..max_iter {
        // projected-gradient mapping as stationarity measure
        let probe: Vec<f64> = p.as_slice().iter().zip(&cur.grad_p).map(|(x, g)| x + g).collect();
        let mapped = project_simplex(&probe);
        let gap = mapped
            .iter()
            .zip(p.as_slice())
            .map(|(a, b)| abs(a - b))
            .fold(0.0, f64::max);
        if gap < 1e-10 {
            status = RateStatus::Converged;
            break;
        }
        let mut t = step;
        let mut accepted = None;
        while t > 1e-16 {
            let trial: Vec<f64> = p.as_slice().iter().zip(&cur.grad_p).map(|(x, g)| x + t * g).collect();
            let cand = InputDist::from_weights(&project_simplex(&trial))?;
            let lin: f64 = cand
                .as_slice()
                .iter()
                .zip(p.as_slice())
                .zip(&cur.grad_p)
                .map(|((c, x), g)| (c - x) * g)
                .sum();
            let next = inner_eval(pair, &cand, mode, Some((cur.s, &cur.a)));
            if next.value >= cur.value + 1e-4 * lin && next.value >= cur.value {
                accepted = Some((cand, next));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, next)) = accepted else {
            status = RateStatus::Converged;
            break;
        };
        step = (t * 2.0).min(1e6);
        let improvement = next.value - cur.value;
        p = cand;
        cur = next;
        if improvement < 1e-15 {
            status = RateStatus::Converged;
            break;
        }
    }
    if cur.status == RateStatus::BudgetHit {
        status = RateStatus::BudgetHit;
    }
    Ok(RateResult {
        value: cur.value,
        k: pair.k(),
        s: cur.s,
        a: cur.a,
        p,
        status,
    })
}

fn random_simplex_point(rng: &mut ChaCha8Rng, n: usize) -> InputDist {
    // normalized exponentials are uniform on the simplex
    let w: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.random::<f64>();
            -ln(1.0 - u)
        })
        .collect();
    InputDist::from_weights(&w).unwrap_or_else(|_| InputDist::uniform(n).expect("n >= 1"))
}

/// Starting points of the multistart search, in evaluation order: uniform,
/// each vertex, the seeded random points, then `extra_starts`.
pub fn starting_points(pair: &ProblemPair, search: &InputSearch) -> Result<Vec<InputDist>> {
    let n = pair.input_size();
    let mut starts = vec![InputDist::uniform(n)?];
    for v in 0..n {
        let mut e = vec![0.0; n];
        e[v] = 1.0;
        starts.push(InputDist::new(e)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    for _ in 0..search.restarts {
        starts.push(random_simplex_point(&mut rng, n));
    }
    for extra in &search.extra_starts {
        if extra.len() != n {
            return Err(Error::DimensionMismatch("extra start does not match the input alphabet"));
        }
        starts.push(extra.clone());
    }
    Ok(starts)
}

/// Runs the input ascent from one starting point.
pub fn optimize_from(pair: &ProblemPair, mode: RateMode, start: &InputDist, max_iter: usize) -> Result<RateResult> {
    check_dist(pair, start)?;
    ascend_input(pair, mode, start, max_iter)
}

/// Deterministic argmax over restart results: highest value, earliest index on ties.
pub fn best_of(results: Vec<RateResult>) -> Option<RateResult> {
    results.into_iter().fold(None, |best: Option<RateResult>, r| match best {
        Some(b) if b.value >= r.value => Some(b),
        _ => Some(r),
    })
}

/// Grid points of the simplex of dimension `n - 1` with the given step.
fn simplex_grid(n: usize, step: f64) -> Vec<Vec<f64>> {
    let m = libm::round(1.0 / step) as usize;
    let mut out = Vec::new();
    match n {
        1 => out.push(vec![1.0]),
        2 => {
            for i in 0..=m {
                let a = i as f64 / m as f64;
                out.push(vec![a, 1.0 - a]);
            }
        }
        3 => {
            for i in 0..=m {
                for j in 0..=(m - i) {
                    let a = i as f64 / m as f64;
                    let b = j as f64 / m as f64;
                    out.push(vec![a, b, ((m - i - j) as f64) / m as f64]);
                }
            }
        }
        _ => {}
    }
    out
}

/// Value of the mode's inner problem at `p`.
fn mode_value(pair: &ProblemPair, p: &InputDist, mode: RateMode) -> f64 {
    let obj = Objective::new(pair, p);
    let zeros = vec![0.0; p.len()];
    match mode {
        RateMode::S1 => obj.value(1.0, &zeros),
        RateMode::Gmi | RateMode::Lm => gmi_inner(&obj).1,
    }
}

/// Best grid point for alphabets of size <= 3 (GMI value used as the grid
/// score in LM mode), re-polished by the ascent.
pub fn grid_cross_check(pair: &ProblemPair, mode: RateMode, step: f64, max_iter: usize) -> Result<Option<RateResult>> {
    if pair.input_size() > 3 || !(step > 0.0) || step > 1.0 {
        return Ok(None);
    }
    let mut best: Option<(f64, InputDist)> = None;
    for w in simplex_grid(pair.input_size(), step) {
        let p = InputDist::from_weights(&w)?;
        let v = mode_value(pair, &p, mode);
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, p));
        }
    }
    match best {
        Some((_, p)) => Ok(Some(ascend_input(pair, mode, &p, max_iter)?)),
        None => Ok(None),
    }
}

/// Multistart projected-gradient ascent over the input simplex. The result is
/// the best point found; it carries no global-optimality certificate.
pub fn optimize_input(pair: &ProblemPair, mode: RateMode, search: &InputSearch, budget: &Budget) -> Result<RateResult> {
    budget.check("input alphabet", pair.input_size() as u128, budget.simplex as u128)?;
    let starts = starting_points(pair, search)?;
    let mut results = Vec::with_capacity(starts.len() + 1);
    for start in &starts {
        results.push(ascend_input(pair, mode, start, search.max_iter)?);
    }
    if let Some(step) = search.grid_step {
        if let Some(r) = grid_cross_check(pair, mode, step, search.max_iter)? {
            results.push(r);
        }
    }
    Ok(best_of(results).expect("at least one start"))
}

/// `I(P; W)` in nats.
pub fn mutual_information(channel: &ChannelSpec, p: &InputDist) -> Result<f64> {
    if p.len() != channel.input_size() {
        return Err(Error::DimensionMismatch("input distribution does not match the channel"));
    }
    let py = channel.output_dist(p);
    let mut total = 0.0;
    for x in 0..channel.input_size() {
        for (y, &py_y) in py.iter().enumerate() {
            let j = p.get(x) * channel.prob(x, y);
            if j > 0.0 {
                total += j * (ln(channel.prob(x, y)) - ln(py_y));
            }
        }
    }
    Ok(total)
}

/// Matched capacity by Blahut-Arimoto alternating maximization, stopped when
/// the upper and lower capacity estimates agree to 1e-10.
pub fn matched_capacity(channel: &ChannelSpec) -> Result<RateResult> {
    const TOL: f64 = 1e-10;
    const MAX_ITER: usize = 1_000_000;
    let nx = channel.input_size();
    let mut p = vec![1.0 / nx as f64; nx];
    let mut status = RateStatus::BudgetHit;
    let mut divergences = vec![0.0; nx];
    for _ in 0..MAX_ITER {
        let dist = InputDist::from_weights(&p)?;
        let py = channel.output_dist(&dist);
        for (x, d) in divergences.iter_mut().enumerate() {
            *d = (0..channel.output_size())
                .filter(|&y| channel.prob(x, y) > 0.0)
                .map(|y| channel.prob(x, y) * (ln(channel.prob(x, y)) - ln(py[y])))
                .sum();
        }
        let lower = log_sum_exp(
            (0..nx)
                .filter(|&x| p[x] > 0.0)
                .map(|x| ln(p[x]) + divergences[x]),
        );
        let upper = divergences.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if upper - lower < TOL {
            status = RateStatus::Converged;
            break;
        }
        for x in 0..nx {
            p[x] *= exp(divergences[x] - lower);
        }
    }
    let p = InputDist::from_weights(&p)?;
    let value = mutual_information(channel, &p)?.max(0.0);
    Ok(RateResult {
        value,
        k: 1,
        s: 1.0,
        a: vec![0.0; nx],
        p,
        status,
    })
}

/// Relative-entropy bound on the mismatch capacity gap at order `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapBound {
    pub eta_upper: f64,
    pub k: usize,
    pub p: InputDist,
    pub kl: f64,
}

/// `(1/k) D(P W^k ‖ P̃)` with
/// `P̃(x, y) = P(x) q(x, y) P_Y(y) / Σ_x̄ P(x̄) q(x̄, y)`.
pub fn gap_bound(pair: &ProblemPair, p: &InputDist) -> Result<GapBound> {
    check_dist(pair, p)?;
    let w = pair.channel();
    let q = pair.metric();
    let py = w.output_dist(p);
    let ny = pair.output_size();
    let mut avg_q = vec![0.0; ny];
    for (y, avg) in avg_q.iter_mut().enumerate() {
        *avg = (0..pair.input_size()).map(|x| p.get(x) * q.value(x, y)).sum();
        if py[y] > 0.0 && *avg == 0.0 {
            return Err(Error::DenominatorZero { y });
        }
    }
    let mut kl = 0.0;
    for x in 0..pair.input_size() {
        for y in 0..ny {
            let joint = p.get(x) * w.prob(x, y);
            if joint > 0.0 {
                let tilde = p.get(x) * q.value(x, y) * py[y] / avg_q[y];
                kl += joint * ln(joint / tilde);
            }
        }
    }
    let kl = kl.max(0.0);
    Ok(GapBound {
        eta_upper: kl / pair.k() as f64,
        k: pair.k(),
        p: p.clone(),
        kl,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BscClosedForm {
    /// `log 2 - h(p)` in nats.
    pub capacity: f64,
    /// `log((1-p)/p) / log((1-p')/p')`.
    pub s_star: f64,
}

/// Capacity and optimal GMI tilt when `W = BSC(p)` and `q = BSC(p')`.
pub fn bsc_closed_form(p: f64, p_prime: f64) -> Result<BscClosedForm> {
    if !(p_prime > 0.0 && p_prime <= p && p <= 0.5) {
        return Err(Error::OrderingViolated { p, p_prime });
    }
    let capacity = (core::f64::consts::LN_2 - binary_entropy(p)).max(0.0);
    let s_star = if p == p_prime {
        1.0
    } else {
        ln((1.0 - p) / p) / ln((1.0 - p_prime) / p_prime)
    };
    Ok(BscClosedForm { capacity, s_star })
}
