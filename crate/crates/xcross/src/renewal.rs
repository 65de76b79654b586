//! Model inputs and derived constants of the compound renewal process.
//!
//! Holds the moments of the inter-arrival time T and claim size Y, the
//! distribution kinds used to generate them, the constants (M, D^2, B1..B4,
//! K_F, K_S) entering the crossing approximation, and the fundamental identity
//! kernels used as property tests.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Distribution of one model ingredient (T or Y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistSpec {
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64 },
    Deterministic { value: f64 },
}

impl DistSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DistSpec::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            DistSpec::Gamma { shape, rate } => shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite(),
            DistSpec::Deterministic { value } => value > 0.0 && value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("distribution parameters must be positive and finite: {self:?}")))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DistSpec::Exponential { rate } => 1.0 / rate,
            DistSpec::Gamma { shape, rate } => shape / rate,
            DistSpec::Deterministic { value } => value,
        }
    }

    /// Survival function P{X > x}, closed form per kind.
    pub(crate) fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        match *self {
            DistSpec::Exponential { rate } => (-rate * x).exp(),
            DistSpec::Gamma { shape, rate } => crate::special::reg_gamma_q(shape, rate * x),
            DistSpec::Deterministic { value } => {
                if x < value {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Density; `None` for the point mass.
    pub(crate) fn pdf(&self, x: f64) -> Option<f64> {
        if x < 0.0 {
            return Some(0.0);
        }
        match *self {
            DistSpec::Exponential { rate } => Some(rate * (-rate * x).exp()),
            DistSpec::Gamma { shape, rate } => {
                if x == 0.0 {
                    return Some(if shape < 1.0 { f64::INFINITY } else if shape == 1.0 { rate } else { 0.0 });
                }
                let ln = shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - crate::special::ln_gamma(shape);
                Some(ln.exp())
            }
            DistSpec::Deterministic { .. } => None,
        }
    }
}

/// Central and raw moments of one positive random variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub var: f64,
    /// Third central moment E(X - EX)^3.
    pub mu3: f64,
    /// Raw fourth moment E(X^4).
    pub raw4: f64,
}

/// Closed-form moments of a `DistSpec`.
pub fn moments_of(spec: &DistSpec) -> Result<Moments> {
    spec.validate()?;
    Ok(match *spec {
        DistSpec::Exponential { rate } => Moments {
            mean: 1.0 / rate,
            var: 1.0 / (rate * rate),
            mu3: 2.0 / rate.powi(3),
            raw4: 24.0 / rate.powi(4),
        },
        DistSpec::Gamma { shape, rate } => Moments {
            mean: shape / rate,
            var: shape / (rate * rate),
            mu3: 2.0 * shape / rate.powi(3),
            raw4: shape * (shape + 1.0) * (shape + 2.0) * (shape + 3.0) / rate.powi(4),
        },
        DistSpec::Deterministic { value } => Moments {
            mean: value,
            var: 0.0,
            mu3: 0.0,
            raw4: value.powi(4),
        },
    })
}

/// Moments of T and Y together; the input of `derive_constants`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub e_t: f64,
    pub var_t: f64,
    pub mu3_t: f64,
    pub e_t4: f64,
    pub e_y: f64,
    pub var_y: f64,
    pub mu3_y: f64,
    pub e_y4: f64,
    /// Raw second moment E(Y^2); kept explicitly for the consistency check.
    pub e_y2: f64,
}

impl MomentSet {
    pub fn from_moments(t: Moments, y: Moments) -> Result<Self> {
        let ms = Self {
            e_t: t.mean,
            var_t: t.var,
            mu3_t: t.mu3,
            e_t4: t.raw4,
            e_y: y.mean,
            var_y: y.var,
            mu3_y: y.mu3,
            e_y4: y.raw4,
            e_y2: y.var + y.mean * y.mean,
        };
        ms.validate()?;
        Ok(ms)
    }

    pub fn from_specs(t: &DistSpec, y: &DistSpec) -> Result<Self> {
        Self::from_moments(moments_of(t)?, moments_of(y)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_t > 0.0) || !(self.e_y > 0.0) {
            return Err(Error::Domain("means of T and Y must be positive".into()));
        }
        if self.var_t < 0.0 || self.var_y < 0.0 {
            return Err(Error::Domain("variances must be nonnegative".into()));
        }
        let e_y2 = self.var_y + self.e_y * self.e_y;
        if (self.e_y2 - e_y2).abs() > 1e-9 * e_y2.max(1.0) {
            return Err(Error::Domain(format!(
                "inconsistent raw second moment of Y: e_y2 = {}, var_y + e_y^2 = {e_y2}",
                self.e_y2
            )));
        }
        // E(X^4) >= (E X^2)^2 by Cauchy-Schwarz
        let e_t2 = self.var_t + self.e_t * self.e_t;
        if !self.e_t4.is_finite() || !self.e_y4.is_finite() {
            return Err(Error::Domain("fourth moments must be finite".into()));
        }
        if self.e_t4 < e_t2 * e_t2 * (1.0 - 1e-9) || self.e_y4 < e_y2 * e_y2 * (1.0 - 1e-9) {
            return Err(Error::Domain("fourth moments below the Cauchy-Schwarz floor".into()));
        }
        Ok(())
    }
}

/// Constants of the approximation at a given drift rate c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// Drift rate the K-constants were derived at.
    pub c: f64,
    /// M = E T / E Y.
    pub m: f64,
    /// D^2 = ((E T)^2 D Y + (E Y)^2 D T) / (E Y)^3.
    pub d2: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub k_f: f64,
    pub k_s: f64,
}

impl DerivedConstants {
    /// Critical drift rate c_S = 1/M.
    pub fn c_star(&self) -> f64 {
        1.0 / self.m
    }

    /// Constants given directly (M, D^2 and optionally K_F/K_S), for
    /// configurations parameterized without an underlying distribution.
    /// Missing K-constants are NaN; only the I-integrals are then usable.
    pub fn from_overrides(c: f64, m: f64, d2: f64, k_f: Option<f64>, k_s: Option<f64>) -> Result<Self> {
        if !(m > 0.0) || !(d2 > 0.0) {
            return Err(Error::Domain(format!("overrides need m > 0 and d2 > 0, got m = {m}, d2 = {d2}")));
        }
        if !(c >= 0.0) {
            return Err(Error::Domain(format!("drift rate must be nonnegative, got {c}")));
        }
        Ok(Self {
            c,
            m,
            d2,
            b1: f64::NAN,
            b2: f64::NAN,
            b3: f64::NAN,
            b4: f64::NAN,
            k_f: k_f.unwrap_or(f64::NAN),
            k_s: k_s.unwrap_or(f64::NAN),
        })
    }
}

/// mu3/var with the degenerate 0/0 case (point mass) resolved to 0.
fn skew_ratio(mu3: f64, var: f64) -> Result<f64> {
    if var == 0.0 {
        if mu3 == 0.0 {
            Ok(0.0)
        } else {
            Err(Error::Domain("third central moment nonzero with zero variance".into()))
        }
    } else {
        Ok(mu3 / var)
    }
}

/// All derived constants at drift rate c.
pub fn derive_constants(ms: &MomentSet, c: f64) -> Result<DerivedConstants> {
    ms.validate()?;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Domain(format!("drift rate must be positive and finite, got {c}")));
    }
    let (et, ey) = (ms.e_t, ms.e_y);
    let (dt, dy) = (ms.var_t, ms.var_y);
    let b1 = et * et * dy + ey * ey * dt;
    let d2 = b1 / ey.powi(3);
    if d2 <= 0.0 {
        return Err(Error::DegenerateModel);
    }
    let m = et / ey;
    let k_f = skew_ratio(ms.mu3_t, dt)? / (2.0 * c * d2) * ((et * et * dy) / (d2 * ey.powi(3)) - 1.0)
        - skew_ratio(ms.mu3_y, dy)? * et / (2.0 * c * d2 * ey) * (dt / (d2 * ey) - 1.0)
        + et / (2.0 * c * d2);
    let k_s = ms.mu3_t / (6.0 * c * d2 * d2 * ey) - et.powi(3) * ms.mu3_y / (6.0 * c * d2 * d2 * ey.powi(4))
        + et * dy / (2.0 * c * d2 * ey * ey);
    Ok(DerivedConstants {
        c,
        m,
        d2,
        b1,
        b2: ey * dt,
        b3: et * dy,
        b4: dy * dt,
        k_f,
        k_s,
    })
}

/// Kernels of the fundamental identities.
#[derive(Debug, Clone, Copy)]
struct IdentityKernels {
    ey: f64,
    et: f64,
    dy: f64,
    dt: f64,
    b1: f64,
    b2: f64,
    b3: f64,
    b4: f64,
}

impl IdentityKernels {
    fn y_n(&self, n: f64, a: f64) -> f64 {
        (a - n * self.ey) / (n * self.dy).sqrt()
    }
    fn t_n(&self, n: f64, b: f64) -> f64 {
        (b - n * self.et) / (n * self.dt).sqrt()
    }
    fn delta_n(&self, n: f64, a: f64, b: f64) -> f64 {
        (b * self.ey - a * self.et) / (self.b1 * n).sqrt()
    }
    fn lambda_n(&self, n: f64, a: f64, b: f64) -> f64 {
        (self.b1 * n - (self.b2 * a + self.b3 * b)) / (self.b1 * self.b4 * n).sqrt()
    }
}

/// Absolute residuals of the fundamental identities at (n, a, b).
///
/// Returned in order:
/// 0. Y_n^2(a) + T_n^2(b) - Delta_n^2 - Lambda_n^2
/// 1. Lambda_{n+1} - Lambda_n - sqrt(B1/(B4 n)) - Lambda_{n+1} (1 - sqrt(1 + 1/n))
/// 2. 1 - a/(n EY) - sqrt(B4/(B1 n)) Lambda_n - B3/(EY sqrt(B1 n)) Delta_n
/// 3. 1 - sqrt(a/(n EY)) - [same bracket] / (1 + sqrt(a/(n EY)))
/// 4. 1 - b/(n ET) - (sqrt(B4) Lambda_n - B2/ET Delta_n) / sqrt(B1 n)
///
/// All five are mathematically zero for every admissible input.
pub fn fundamental_identity_residuals(ms: &MomentSet, n: u32, a: f64, b: f64) -> Result<[f64; 5]> {
    if ms.var_t <= 0.0 || ms.var_y <= 0.0 {
        return Err(Error::DegenerateModel);
    }
    if n == 0 {
        return Err(Error::Domain("identity kernels require n >= 1".into()));
    }
    let k = IdentityKernels {
        ey: ms.e_y,
        et: ms.e_t,
        dy: ms.var_y,
        dt: ms.var_t,
        b1: ms.e_t * ms.e_t * ms.var_y + ms.e_y * ms.e_y * ms.var_t,
        b2: ms.e_y * ms.var_t,
        b3: ms.e_t * ms.var_y,
        b4: ms.var_y * ms.var_t,
    };
    let nf = f64::from(n);
    let (yv, tv) = (k.y_n(nf, a), k.t_n(nf, b));
    let (dv, lv) = (k.delta_n(nf, a, b), k.lambda_n(nf, a, b));

    let r0 = (yv * yv + tv * tv - dv * dv - lv * lv).abs();

    let l_next = k.lambda_n(nf + 1.0, a, b);
    let r1 = (l_next - lv - (k.b1 / (k.b4 * nf)).sqrt() - l_next * (1.0 - (1.0 + 1.0 / nf).sqrt())).abs();

    let bracket = (k.b4 / (k.b1 * nf)).sqrt() * lv + k.b3 / (k.ey * (k.b1 * nf).sqrt()) * dv;
    let r2 = (1.0 - a / (nf * k.ey) - bracket).abs();

    let root = (a / (nf * k.ey)).sqrt();
    let r3 = (1.0 - root - bracket / (1.0 + root)).abs();

    let r4 = (1.0 - b / (nf * k.et) - (k.b4.sqrt() * lv - k.b2 / k.et * dv) / (k.b1 * nf).sqrt()).abs();

    Ok([r0, r1, r2, r3, r4])
}
