//! Small numeric helpers shared across modules. Everything here goes
//! through `libm` so results are identical on every platform.

/// `base^exp` by repeated squaring.
pub fn powi(mut base: f64, mut exp: u64) -> f64 {
    let mut acc = 1.0;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        base *= base;
        exp >>= 1;
    }
    acc
}

/// Round half up: `floor(x + 0.5)`.
pub fn round_half_up(x: f64) -> f64 {
    libm::floor(x + 0.5)
}

/// Log-density of `N(mean, var)` at `x`.
pub fn ln_normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * libm::log(2.0 * core::f64::consts::PI * var) - d * d / (2.0 * var)
}

/// `ln(sum(exp(xs)))`, stable for large negative inputs.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let s: f64 = xs.iter().map(|&x| libm::exp(x - max)).sum();
    max + libm::log(s)
}

/// Index of the smallest value of `cost(t)` for `t` in `1..=t_max`; ties go
/// to the smaller `t`.
pub fn argmin_increment(t_max: usize, mut cost: impl FnMut(usize) -> f64) -> usize {
    let mut best_t = 1;
    let mut best = cost(1);
    for t in 2..=t_max {
        let c = cost(t);
        if c < best {
            best = c;
            best_t = t;
        }
    }
    best_t
}
