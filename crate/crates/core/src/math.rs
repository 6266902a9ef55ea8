//! Transcendental functions for `no_std` builds, plus a few reductions used
//! throughout the crate.

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// Binary entropy in nats. `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |t: f64| if t > 0.0 { -t * ln(t) } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// `log Σ exp(v)` over finite entries; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.map(|v| exp(v - max)).sum();
    max + ln(sum)
}

/// Nats to bits.
pub fn nats_to_bits(nats: f64) -> f64 {
    nats / core::f64::consts::LN_2
}
