use alloc::vec::Vec;

use super::CostParams;
use crate::error::{check_open_unit, Result, TansError};
use crate::num::argmin_increment;

/// `Σ_{j=1}^{T-1} (1 - α^{2j})`: expected GLP distortion summed over the
/// `T - 1` skipped indices of an AR(1) interval.
pub fn distortion_sum(alpha: f64, t: usize) -> f64 {
    let a2 = alpha * alpha;
    let mut pw = a2;
    let mut s = 0.0;
    for _ in 1..t {
        s += 1.0 - pw;
        pw *= a2;
    }
    s
}

/// `table[T] = distortion_sum(alpha, T)` for `T` in `0..=t_up`, computed with
/// the same running product so entries match [`distortion_sum`] exactly.
pub fn distortion_table(alpha: f64, t_up: usize) -> Vec<f64> {
    let a2 = alpha * alpha;
    let mut table = Vec::with_capacity(t_up + 1);
    table.push(0.0);
    let mut pw = a2;
    let mut s = 0.0;
    for _ in 1..=t_up {
        table.push(s);
        s += 1.0 - pw;
        pw *= a2;
    }
    table
}

/// `c(S, T) = Σ_{j=1}^{T-1} (1 - α^{2j}) + ρ / T`.
pub fn ar1_state_cost(alpha: f64, t: usize, cost: &CostParams) -> f64 {
    debug_assert!(t >= 1);
    distortion_sum(alpha, t) + cost.rho / t as f64
}

/// Optimal greedy (constant) increment `T*` over `[1, t_up]`.
pub fn ar1_greedy_increment(alpha: f64, cost: &CostParams) -> Result<usize> {
    check_open_unit("alpha", alpha)?;
    let table = distortion_table(alpha, cost.t_up);
    Ok(argmin_increment(cost.t_up, |t| table[t] + cost.rho / t as f64))
}

/// Expected distortion per time step of uniform sampling at `T*`.
pub fn ar1_greedy_distortion(alpha: f64, t_star: usize) -> f64 {
    debug_assert!(t_star >= 1);
    distortion_sum(alpha, t_star) / t_star as f64
}

/// `h(T) = c(T + 1) - c(T) = (1 - α^{2T}) - ρ / (T (T + 1))` on real `T`.
fn cost_increase(alpha: f64, rho: f64, t: f64) -> f64 {
    (1.0 - libm::exp(2.0 * t * libm::log(alpha))) - rho / (t * (t + 1.0))
}

/// Unique root of `h(T)` on `[1, ∞)`, found by bisection. Requires
/// `1 - α² < ρ / 2`, which makes `h(1) < 0`.
pub fn ar1_root(alpha: f64, rho: f64) -> Result<f64> {
    check_open_unit("alpha", alpha)?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(TansError::param("rho", rho, "a positive rate award"));
    }
    let lhs = 1.0 - alpha * alpha;
    if !(lhs < rho / 2.0) {
        return Err(TansError::RootCondition { lhs, rhs: rho / 2.0 });
    }
    let mut lo = 1.0;
    let mut hi = 2.0;
    while cost_increase(alpha, rho, hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cost_increase(alpha, rho, mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
