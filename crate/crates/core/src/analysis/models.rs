use num_bigint::BigUint;

use super::FaceCount;
use crate::combinatorics::cnd;

/// Nearest `f64` to a big integer (to within a few ulps).
pub fn big_to_f64(v: &BigUint) -> f64 {
    v.iter_u64_digits().rev().fold(0.0, |acc, d| acc * 18_446_744_073_709_551_616.0 + d as f64)
}

/// Fraction of faces on the support that survive: `surviving / total`.
pub fn prob_l1(fc: &FaceCount) -> f64 {
    big_to_f64(&fc.surviving) / big_to_f64(&fc.total)
}

/// ℓ1,1 recovers only if every one of the `r` columns is recovered: `pʳ`.
pub fn prob_l11(p: f64, r: u32) -> f64 {
    libm::pow(p, f64::from(r))
}

/// Boosted ℓ1 fails only if all `r` columns fail: `1 − (1 − p)ʳ`.
pub fn prob_boosted(p: f64, r: u32) -> f64 {
    1.0 - libm::pow(1.0 - p, f64::from(r))
}

/// The ReMBo success model together with how it was evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct RemboModel {
    pub probability: f64,
    /// `C(s, r)/2`, the number of distinct patterns `X̄w` can take.
    pub terms: BigUint,
    /// Set when the product reached a factor with `total − 2(i−1) ≤
    /// surviving`, where the model is defined to be 1.
    pub clamped: bool,
}

/// Largest product evaluated term by term; beyond it log-gamma is used,
/// which loses some digits to cancellation (absolute error around 1e-7).
const EXACT_TERMS: u64 = 1_000_000;

/// `1 − Π_{i=1}^{K} [1 − surviving/(total − 2(i−1))]` with `K = C(s, r)/2`:
/// the chance that sampling `K` distinct sign patterns without replacement
/// hits at least one surviving face.
///
/// If a denominator falls to `surviving` or below, every remaining pattern
/// survives and the probability is 1.
pub fn rembo_model(surviving: &BigUint, total: &BigUint, s: u64, r: u64) -> RemboModel {
    let terms = cnd(s, r) / 2u32;
    let surv = big_to_f64(surviving);
    let tot = big_to_f64(total);
    if surviving.bits() == 0 {
        return RemboModel { probability: 0.0, terms, clamped: false };
    }
    if surviving >= total {
        return RemboModel { probability: 1.0, terms, clamped: false };
    }
    // factor i vanishes once total − 2(i−1) ≤ surviving
    let failing_half = (total - surviving) / 2u32;
    if terms > failing_half {
        return RemboModel { probability: 1.0, terms, clamped: true };
    }
    let k = big_to_f64(&terms);
    let fail = if terms <= BigUint::from(EXACT_TERMS) {
        let mut prod = 1.0;
        for i in 0..k as u64 {
            let denom = tot - 2.0 * i as f64;
            prod *= 1.0 - (surv / denom).min(1.0);
        }
        prod
    } else {
        // Π_{j<K} (a − j)/(t − j) with a = (total − surviving)/2, t = total/2
        let a = (tot - surv) / 2.0;
        let t = tot / 2.0;
        let ln = libm::lgamma(a + 1.0) - libm::lgamma(a - k + 1.0) - libm::lgamma(t + 1.0) + libm::lgamma(t - k + 1.0);
        libm::exp(ln)
    };
    RemboModel { probability: (1.0 - fail).clamp(0.0, 1.0), terms, clamped: false }
}

pub fn prob_rembo(surviving: &BigUint, total: &BigUint, s: u64, r: u64) -> f64 {
    rembo_model(surviving, total, s, r).probability
}
