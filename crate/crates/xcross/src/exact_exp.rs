//! Exact conditional first-crossing distribution for exponential inter-arrival
//! times and claims, plus the independent truncated-series oracle.
//!
//! The quadrature kernel keeps every exponential in log space: the Bessel
//! factor enters as the scaled ratio e^{-z} I1(z) / z, recombined with the
//! remaining exponent, which is <= 0 over the whole range by AM-GM. Overflow
//! is impossible by construction.

use crate::crossing::CrossingQuery;
use crate::error::{Error, Result};
use crate::quad::{adaptive, Rule};
use crate::special::bessel_i1_scaled_over_z;

/// Exponential model: T ~ Exp(rate_t), Y ~ Exp(rate_y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpModel {
    pub rate_t: f64,
    pub rate_y: f64,
}

impl ExpModel {
    pub fn new(rate_t: f64, rate_y: f64) -> Result<Self> {
        if !(rate_t > 0.0) || !rate_t.is_finite() || !(rate_y > 0.0) || !rate_y.is_finite() {
            return Err(Error::Domain(format!(
                "exponential rates must be positive and finite, got rate_t = {rate_t}, rate_y = {rate_y}"
            )));
        }
        Ok(Self { rate_t, rate_y })
    }
}

/// Geometric decay rate of the integrand tail, (sqrt(rate_y c) - sqrt(rate_t))^2.
fn tail_rate(m: &ExpModel, c: f64) -> f64 {
    let d = (m.rate_y * c).sqrt() - m.rate_t.sqrt();
    d * d
}

/// Minimal tail rate for which an infinite horizon is truncated numerically.
const GAMMA_MIN: f64 = 1e-6;
const EXACT_TOL: f64 = 1e-10;

/// P{v < tau <= t | T1 = v} for exponential T and Y.
///
/// Finite horizons integrate over [0, t - v] to 1e-10 absolute. An infinite
/// horizon is truncated where the analytic tail bound drops below 1e-13,
/// which requires the decay rate to be bounded away from zero; at and below
/// the critical drift (rate_y c <= rate_t) ruin is certain and the value is
/// exactly 1, while a supercritical drift inside the tiny critical window is
/// rejected as unsupported.
pub fn exact_conditional_exp(q: &CrossingQuery, m: &ExpModel) -> Result<f64> {
    if !(q.c > 0.0) {
        return Err(Error::Domain("the exponential kernel requires c > 0".into()));
    }
    if q.t == q.v {
        return Ok(0.0);
    }
    let (lt, ly, c) = (m.rate_t, m.rate_y, q.c);
    let a = q.v + q.u / c; // (u + cv)/c
    let rate_sum = ly * c + lt;
    let prod = ly * lt * c;

    let horizon = if q.t.is_finite() {
        q.t - q.v
    } else {
        let gamma = tail_rate(m, c);
        if gamma < GAMMA_MIN {
            return if ly * c <= lt {
                // certain ruin at or below the critical drift
                Ok(1.0)
            } else {
                Err(Error::UnsupportedHorizon(format!(
                    "tail rate {gamma:.3e} below {GAMMA_MIN:.0e} at c = {c}"
                )))
            };
        }
        // integrand <= ly lt c A exp(kappa - gamma y); solve for the 1e-13 cut
        let kappa = (a * (ly * c).sqrt() * (lt.sqrt() - (ly * c).sqrt())).max(0.0);
        let ln_pref = (prod * a).max(1.0).ln();
        (kappa + ln_pref + 30.0) / gamma
    };

    // exponent z(y) - (ly c + lt) y - ly c A with z = 2 sqrt(prod (y + A) y);
    // <= 0 everywhere, so exp never overflows
    let integrand = |y: f64| {
        if y <= 0.0 {
            return 2.0 * prod * a * 0.5 * (-ly * c * a).exp();
        }
        let z = 2.0 * (prod * (y + a) * y).sqrt();
        let e = z - rate_sum * y - ly * c * a;
        if e < -745.0 {
            return 0.0;
        }
        2.0 * prod * a * bessel_i1_scaled_over_z(z) * e.exp()
    };

    // the exponent peaks at y* = (A/2)((ly c + lt)/|ly c - lt| - 1)
    let denom = (ly * c - lt).abs();
    let mut hints = vec![horizon / 8.0, horizon / 2.0];
    if denom > 1e-12 {
        let y_star = 0.5 * a * (rate_sum / denom - 1.0);
        for f in [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
            hints.push(y_star * f);
        }
    }
    let r = adaptive(&integrand, 0.0, horizon, EXACT_TOL, Rule::Gk61, &hints, 4000);
    if !r.converged {
        return Err(Error::QuadratureNoConvergence { achieved: r.abs_error, requested: EXACT_TOL });
    }
    Ok(r.value.clamp(0.0, 1.0))
}

/// Truncated-series value with its tail bound.
#[derive(Debug, Clone, Copy)]
pub struct SeriesEval {
    pub value: f64,
    /// Upper bound on the discarded tail (sum over n > n_used).
    pub tail_bound: f64,
    pub n_used: u32,
}

/// The series form of P{v < tau <= t | T1 = v}: Poisson level-crossing weights
/// against Erlang convolution densities, integrated term by term. Finite
/// horizons only; this is the independent oracle for the quadrature kernel.
pub fn exact_conditional_series(q: &CrossingQuery, m: &ExpModel, n_max: u32) -> Result<SeriesEval> {
    if !(q.c > 0.0) {
        return Err(Error::Domain("the exponential series requires c > 0".into()));
    }
    if !q.t.is_finite() {
        return Err(Error::Domain("the series oracle requires a finite horizon".into()));
    }
    if q.t == q.v {
        return Ok(SeriesEval { value: 0.0, tail_bound: 0.0, n_used: 0 });
    }
    let (lt, ly, c) = (m.rate_t, m.rate_y, q.c);
    let (u, v, t) = (q.u, q.v, q.t);
    let u_cv = u + c * v;

    let mut total = 0.0;
    let mut ln_fact_n = 0.0; // ln n!
    let mut ln_fact_nm1 = 0.0; // ln (n-1)!
    let per_term_tol = 1e-13;
    for n in 1..=n_max {
        let nf = f64::from(n);
        ln_fact_n += nf.ln();
        if n >= 2 {
            ln_fact_nm1 += (nf - 1.0).ln();
        }
        // ln of (u+cv)/(u+cz) * Pois_n(ly (u+cz)) * Erlang_n(z - v)
        let ln_term = |z: f64| {
            let s = ly * (u + c * z);
            let w = z - v;
            if w <= 0.0 {
                return f64::NEG_INFINITY;
            }
            u_cv.ln() - (u + c * z).ln() + nf * s.ln() - s - ln_fact_n
                + nf * lt.ln()
                + (nf - 1.0) * w.ln()
                - lt * w
                - ln_fact_nm1
        };
        let f = |z: f64| {
            let l = ln_term(z);
            if l < -745.0 {
                0.0
            } else {
                l.exp()
            }
        };
        // Erlang mass sits near z = v + (n-1)/lt with width sqrt(n)/lt
        let mode = v + (nf - 1.0) / lt;
        let w = nf.sqrt() / lt;
        let mut hints = Vec::with_capacity(8);
        for j in [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0] {
            let z = mode + j * w;
            if z > v && z < t {
                hints.push(z);
            }
        }
        let r = adaptive(&f, v, t, per_term_tol, Rule::Gk15, &hints, 400);
        total += r.value;
    }

    // Chernoff bound on the discarded Poisson mass at the largest level
    let m_hi = ly * (u + c * t);
    let n1 = f64::from(n_max) + 1.0;
    let tail_bound = if n_max == 0 {
        1.0
    } else if n1 <= m_hi {
        1.0 // truncated inside the bulk; bound is vacuous
    } else {
        (n1 * (1.0 + (m_hi / n1).ln()) - m_hi).exp() / (1.0 - m_hi / n1)
    };
    Ok(SeriesEval { value: total, tail_bound, n_used: n_max })
}

/// n_max large enough that the reported tail bound falls below `tol`.
pub fn series_terms_for_tolerance(q: &CrossingQuery, m: &ExpModel, tol: f64) -> u32 {
    let m_hi = m.rate_y * (q.u + q.c * q.t);
    let mut n = (m_hi + 10.0 * m_hi.sqrt() + 20.0) as u32;
    loop {
        let n1 = f64::from(n) + 1.0;
        let b = (n1 * (1.0 + (m_hi / n1).ln()) - m_hi).exp() / (1.0 - m_hi / n1);
        if b < tol || n > 2_000_000 {
            return n;
        }
        n += (n / 8).max(8);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_model() -> ExpModel {
        ExpModel::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn empty_window_is_zero() {
        let q = CrossingQuery::new(5.0, 1.5, 2.0, 2.0).unwrap();
        assert_eq!(exact_conditional_exp(&q, &unit_model()).unwrap(), 0.0);
        let s = exact_conditional_series(&q, &unit_model(), 50).unwrap();
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn frozen_reference_values() {
        let q = CrossingQuery::new(5.0, 1.5, 0.3, 20.0).unwrap();
        assert_abs_diff_eq!(
            exact_conditional_exp(&q, &unit_model()).unwrap(),
            0.144_878_948_263_874_77,
            epsilon = 1e-10
        );
        let q = CrossingQuery::new(50.0, 1.2, 0.0, 1000.0).unwrap();
        assert_abs_diff_eq!(
            exact_conditional_exp(&q, &unit_model()).unwrap(),
            2.403_361_407_623_093_2e-4,
            epsilon = 1e-10
        );
        let q = CrossingQuery::new(25.0, 1.0, 0.0, 500.0).unwrap();
        assert_abs_diff_eq!(
            exact_conditional_exp(&q, &unit_model()).unwrap(),
            0.434_901_535_997_789_92,
            epsilon = 1e-9
        );
        let m = ExpModel::new(1.3, 0.7).unwrap();
        let q = CrossingQuery::new(10.0, 0.8, 1.0, 60.0).unwrap();
        assert_abs_diff_eq!(
            exact_conditional_exp(&q, &m).unwrap(),
            0.999_345_402_148_631_45,
            epsilon = 1e-9
        );
    }

    #[test]
    fn infinite_horizon() {
        // supercritical: truncation against a frozen long-horizon value
        let q = CrossingQuery::new(20.0, 1.6, 0.0, f64::INFINITY).unwrap();
        assert_abs_diff_eq!(
            exact_conditional_exp(&q, &unit_model()).unwrap(),
            5.530_823_089_942_111_4e-4,
            epsilon = 1e-10
        );
        // subcritical: certain ruin, reachable through quadrature as well
        let q = CrossingQuery::new(20.0, 0.7, 0.0, f64::INFINITY).unwrap();
        let p = exact_conditional_exp(&q, &unit_model()).unwrap();
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-7);
        // exactly critical: certain ruin by the closed branch
        let q = CrossingQuery::new(20.0, 1.0, 0.0, f64::INFINITY).unwrap();
        assert_eq!(exact_conditional_exp(&q, &unit_model()).unwrap(), 1.0);
        // supercritical inside the critical window: honest refusal
        let c = (1.0 + 0.5 * GAMMA_MIN.sqrt()).powi(2);
        let q = CrossingQuery::new(20.0, c, 0.0, f64::INFINITY).unwrap();
        assert!(matches!(
            exact_conditional_exp(&q, &unit_model()),
            Err(Error::UnsupportedHorizon(_))
        ));
    }

    #[test]
    fn series_matches_quadrature() {
        let q = CrossingQuery::new(5.0, 1.5, 0.3, 20.0).unwrap();
        let n = series_terms_for_tolerance(&q, &unit_model(), 1e-12);
        let s = exact_conditional_series(&q, &unit_model(), n).unwrap();
        assert!(s.tail_bound < 1e-12, "tail bound {}", s.tail_bound);
        assert_abs_diff_eq!(s.value, 0.144_878_948_263_874_77, epsilon = 1e-10);
        let e = exact_conditional_exp(&q, &unit_model()).unwrap();
        assert_abs_diff_eq!(s.value, e, epsilon = 1e-10);
    }

    #[test]
    fn series_reports_vacuous_tail_when_truncated_early() {
        let q = CrossingQuery::new(5.0, 1.5, 0.3, 20.0).unwrap();
        let s = exact_conditional_series(&q, &unit_model(), 10).unwrap();
        assert!(s.tail_bound > 1e-6);
    }

    #[test]
    fn monotone_in_horizon_and_level() {
        let m = unit_model();
        let mut last = 0.0;
        for t in [5.0, 10.0, 20.0, 50.0, 100.0] {
            let q = CrossingQuery::new(12.0, 1.1, 0.0, t).unwrap();
            let p = exact_conditional_exp(&q, &m).unwrap();
            assert!(p >= last - 1e-12);
            last = p;
        }
        let mut last = 1.0;
        for u in [5.0, 10.0, 20.0, 40.0] {
            let q = CrossingQuery::new(u, 1.1, 0.0, 50.0).unwrap();
            let p = exact_conditional_exp(&q, &m).unwrap();
            assert!(p <= last + 1e-12);
            last = p;
        }
    }
}
