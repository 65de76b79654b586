//! The first-crossing approximation pipeline: elementary components E_0..E_3,
//! the integrals I_M, I_F, I_S in closed form, their assembly into the
//! conditional approximation, and the unconditional probability through the
//! first-jump decomposition.
//!
//! Closed forms are the all-c > 0 normal rewrites: two standard normal c.d.f.
//! terms (the second fused with a large exponential) plus a Gaussian boundary
//! term. Every quadrature runs in the substituted variable y = 1/(1+x), where
//! the integrands become GIG-shaped kernels on (0, 1] and an infinite horizon
//! needs no truncation.

use crate::error::{Error, Result};
use crate::exact_exp::{exact_conditional_exp, ExpModel};
use crate::quad::{adaptive, Rule};
use crate::renewal::{derive_constants, DerivedConstants, DistSpec, MomentSet};
use crate::special::{exp_phi, std_normal_cdf};

/// Relative half-width of the drift window around c_star inside which the
/// singular-prefactor closed form of E_0 is replaced by quadrature.
pub const EPS_BRANCH: f64 = 1e-4;

/// One conditional first-crossing evaluation: level u, drift c, conditioning
/// time v of the first arrival, horizon t (may be `f64::INFINITY`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingQuery {
    pub u: f64,
    pub c: f64,
    pub v: f64,
    pub t: f64,
}

impl CrossingQuery {
    pub fn new(u: f64, c: f64, v: f64, t: f64) -> Result<Self> {
        if !(u > 0.0) || !u.is_finite() {
            return Err(Error::Domain(format!("level u must be positive and finite, got {u}")));
        }
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::Domain(format!("drift rate c must be nonnegative and finite, got {c}")));
        }
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("conditioning time v must be nonnegative and finite, got {v}")));
        }
        if !(t >= v) {
            return Err(Error::Domain(format!("horizon t must satisfy t >= v, got t = {t}, v = {v}")));
        }
        Ok(Self { u, c, v, t })
    }

    fn is_empty(&self) -> bool {
        self.t == self.v
    }

    /// Upper endpoint of the shifted integration variable, X = 1 + c(t-v)/(u+cv).
    fn upper_x(&self) -> f64 {
        if self.t.is_infinite() {
            f64::INFINITY
        } else {
            1.0 + self.c * (self.t - self.v) / (self.u + self.c * self.v)
        }
    }
}

/// Reparameterization shared by all closed forms.
#[derive(Debug, Clone, Copy)]
struct Geometry {
    lam: f64,
    omc: f64,
    /// The large exponent 2 lam (1 - cM).
    s: f64,
}

impl Geometry {
    fn new(q: &CrossingQuery, consts: &DerivedConstants) -> Result<Self> {
        if !(q.c > 0.0) {
            return Err(Error::Domain("closed crossing forms require c > 0".into()));
        }
        if !(consts.d2 > 0.0) {
            return Err(Error::DegenerateModel);
        }
        let lam = (q.u + q.c * q.v) / (q.c * q.c * consts.d2);
        let omc = 1.0 - q.c * consts.m;
        Ok(Self { lam, omc, s: 2.0 * lam * omc })
    }

    fn phi_a(&self, x: f64) -> f64 {
        if x.is_infinite() {
            return match self.omc.partial_cmp(&0.0).expect("omc finite") {
                std::cmp::Ordering::Greater => 1.0,
                std::cmp::Ordering::Equal => 0.5,
                std::cmp::Ordering::Less => 0.0,
            };
        }
        std_normal_cdf((self.lam / x).sqrt() * (x * self.omc - 1.0))
    }

    fn ephi_b(&self, x: f64) -> f64 {
        if x.is_infinite() {
            return match self.omc.partial_cmp(&0.0).expect("omc finite") {
                std::cmp::Ordering::Greater => 0.0,
                std::cmp::Ordering::Equal => 0.5,
                std::cmp::Ordering::Less => self.s.exp(),
            };
        }
        exp_phi(self.s, -(self.lam / x).sqrt() * (x * self.omc + 1.0))
    }

    /// Gaussian boundary kernel exp{-(lam/2x)(x(1-cM) - 1)^2}; 0 at x = inf.
    fn gauss(&self, x: f64) -> f64 {
        if x.is_infinite() {
            return 0.0;
        }
        let d = x * self.omc - 1.0;
        (-(self.lam / (2.0 * x)) * d * d).exp()
    }
}

fn diff(f: impl Fn(f64) -> f64, upper: f64) -> f64 {
    f(upper) - f(1.0)
}

/// How a closed elementary component was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElemMethod {
    ClosedForm,
    /// Inside the branch window around c_star the E_0 prefactor 1/(1-cM)
    /// amplifies round-off; the value is taken from quadrature instead.
    QuadratureFallback,
}

#[derive(Debug, Clone, Copy)]
pub struct ElemEval {
    pub value: f64,
    pub method: ElemMethod,
}

/// Quadrature value with the achieved absolute-error estimate.
#[derive(Debug, Clone, Copy)]
pub struct QuadEval {
    pub value: f64,
    pub abs_error: f64,
}

const ELEM_TOL: f64 = 1e-11;

/// Integration hints in the y = 1/(1+x) variable.
fn y_hints(lam: f64, omc: f64, y_lo: f64) -> Vec<f64> {
    let mut pts = vec![0.01, 0.1, 0.25, 0.5, 0.75];
    let peak = omc.abs().clamp(1e-12, 1.0);
    for j in -10..=4i32 {
        pts.push(peak * 2f64.powi(j));
    }
    if y_lo > 0.0 {
        for j in 1..=6i32 {
            pts.push(y_lo * (1.0 + 2f64.powi(j) / 64.0));
        }
    }
    // width of the Laplace peak when it is interior
    if omc > 0.0 {
        let w = (omc / lam.max(1e-300)).sqrt();
        for j in [-4.0, -2.0, -1.0, 1.0, 2.0, 4.0] {
            pts.push(omc + j * w);
        }
    }
    pts.retain(|&y| y > y_lo && y < 1.0);
    pts
}

/// Generic quadrature of `w(y) y^{-3/2} exp{-lam (omc - y)^2 / (2y)}` scaled
/// by sqrt(lam/2pi), over y in (y_lo, 1]. This is the image of the defining
/// x-space integrals under y = 1/(1+x).
fn crossing_quad(
    q: &CrossingQuery,
    consts: &DerivedConstants,
    weight: impl Fn(f64) -> f64,
    tol: f64,
) -> Result<QuadEval> {
    let g = Geometry::new(q, consts)?;
    let y_lo = if q.t.is_infinite() { 0.0 } else { 1.0 / q.upper_x() };
    let norm = (g.lam / (2.0 * std::f64::consts::PI)).sqrt();
    let f = |y: f64| {
        if y <= 0.0 || y > 1.0 {
            return 0.0;
        }
        let d = g.omc - y;
        let e = -g.lam * d * d / (2.0 * y);
        if e < -745.0 {
            return 0.0;
        }
        norm * weight(y) * y.powf(-1.5) * e.exp()
    };
    let hints = y_hints(g.lam, g.omc, y_lo);
    let r = adaptive(&f, y_lo, 1.0, tol, Rule::Gk61, &hints, 8000);
    if !r.converged {
        return Err(Error::QuadratureNoConvergence { achieved: r.abs_error, requested: tol });
    }
    Ok(QuadEval { value: r.value, abs_error: r.abs_error })
}

/// Elementary component E_k by adaptive quadrature of its defining integral.
pub fn elementary_component_quadrature(k: u32, q: &CrossingQuery, consts: &DerivedConstants) -> Result<QuadEval> {
    if q.is_empty() {
        return Ok(QuadEval { value: 0.0, abs_error: 0.0 });
    }
    if !(q.c > 0.0) {
        return Err(Error::Domain("elementary components require c > 0".into()));
    }
    if q.t.is_infinite() && k == 0 {
        let g = Geometry::new(q, consts)?;
        if g.omc == 0.0 {
            return Err(Error::Domain("E_0 diverges at c = c_star with t = inf".into()));
        }
    }
    crossing_quad(q, consts, |y| y.powi(k as i32), ELEM_TOL)
}

/// Elementary component E_k (k <= 3) in closed form.
///
/// E_0 inside the branch window |1 - cM| < EPS_BRANCH falls back to quadrature
/// for finite horizons (reported through `method`); E_1..E_3 use expanded
/// all-c forms that stay regular across c_star.
pub fn elementary_component_closed(k: u32, q: &CrossingQuery, consts: &DerivedConstants) -> Result<ElemEval> {
    if k > 3 {
        return Err(Error::UnsupportedOrder {
            order: f64::from(k),
            detail: "closed elementary components exist for k in 0..=3",
        });
    }
    if q.is_empty() {
        return Ok(ElemEval { value: 0.0, method: ElemMethod::ClosedForm });
    }
    let g = Geometry::new(q, consts)?;
    let x_up = q.upper_x();
    let value = match k {
        0 => {
            if g.omc.abs() < EPS_BRANCH {
                if q.t.is_finite() {
                    let quad = crossing_quad(q, consts, |_y| 1.0, ELEM_TOL)?;
                    return Ok(ElemEval { value: quad.value, method: ElemMethod::QuadratureFallback });
                }
                if g.omc == 0.0 {
                    // genuine divergence of E_0 at the branch point with t = inf
                    return Ok(ElemEval { value: f64::INFINITY, method: ElemMethod::ClosedForm });
                }
            }
            diff(|x| (g.phi_a(x) - g.ephi_b(x)) / g.omc, x_up)
        }
        1 => diff(|x| g.phi_a(x) + g.ephi_b(x), x_up),
        2 => {
            let c_phi = g.omc + 1.0 / g.lam;
            let c_exp = (g.lam * g.omc - 1.0) / g.lam;
            let c_g = (2.0 / (std::f64::consts::PI * g.lam)).sqrt();
            diff(
                |x| c_phi * g.phi_a(x) - c_exp * g.ephi_b(x) + c_g * g.gauss(x) / x.sqrt(),
                x_up,
            )
        }
        _ => {
            let c_phi = g.omc * g.omc + 3.0 * g.omc / g.lam + 3.0 / (g.lam * g.lam);
            let c_exp = g.omc * g.omc - 3.0 * g.omc / g.lam + 3.0 / (g.lam * g.lam);
            let c_g = std::f64::consts::SQRT_2 / (std::f64::consts::PI.sqrt() * g.lam.powf(1.5));
            diff(
                |x| {
                    let gauss_poly = if x.is_infinite() { 0.0 } else { (g.lam + 3.0 * x) / x.powf(1.5) };
                    c_phi * g.phi_a(x) + c_exp * g.ephi_b(x) + c_g * gauss_poly * g.gauss(x)
                },
                x_up,
            )
        }
    };
    Ok(ElemEval { value, method: ElemMethod::ClosedForm })
}

/// I_M in closed form; supports the c = 0 and c = c_star limits.
pub fn integral_m(q: &CrossingQuery, consts: &DerivedConstants) -> Result<f64> {
    if q.is_empty() {
        return Ok(0.0);
    }
    let d = consts.d2.sqrt();
    if q.c == 0.0 {
        // c -> 0 limit: the integrand mass concentrates while the range shrinks
        let root_u = q.u.sqrt();
        if q.t.is_infinite() {
            return Ok(std_normal_cdf(consts.m / d * root_u));
        }
        return Ok(std_normal_cdf((q.t - q.v - consts.m * q.u) / (d * root_u))
            - std_normal_cdf(-consts.m / d * root_u));
    }
    let g = Geometry::new(q, consts)?;
    Ok(diff(|x| g.phi_a(x) + g.ephi_b(x), q.upper_x()))
}

/// I_F in closed form.
pub fn integral_f(q: &CrossingQuery, consts: &DerivedConstants) -> Result<f64> {
    if q.is_empty() {
        return Ok(0.0);
    }
    let g = Geometry::new(q, consts)?;
    let c_g = (2.0 / (std::f64::consts::PI * g.lam)).sqrt();
    Ok(diff(
        |x| -(g.phi_a(x) + g.ephi_b(x)) / g.lam + 2.0 * g.omc * g.ephi_b(x) - c_g * g.gauss(x) / x.sqrt(),
        q.upper_x(),
    ))
}

/// I_S in closed form.
pub fn integral_s(q: &CrossingQuery, consts: &DerivedConstants) -> Result<f64> {
    if q.is_empty() {
        return Ok(0.0);
    }
    let g = Geometry::new(q, consts)?;
    let c_g = (2.0 / (std::f64::consts::PI * g.lam)).sqrt();
    let c_exp = 2.0 * g.omc * (3.0 - 4.0 * g.lam * g.omc);
    Ok(diff(
        |x| {
            let gauss_poly = if x.is_infinite() {
                0.0
            } else {
                (3.0 * (1.0 - g.lam * g.omc) * x + g.lam) / x.powf(1.5)
            };
            -3.0 * (g.phi_a(x) + g.ephi_b(x)) / g.lam + c_exp * g.ephi_b(x) - c_g * gauss_poly * g.gauss(x)
        },
        q.upper_x(),
    ))
}

/// I_F by quadrature of its defining integral (oracle path).
pub fn integral_f_quadrature(q: &CrossingQuery, consts: &DerivedConstants) -> Result<QuadEval> {
    if q.is_empty() {
        return Ok(QuadEval { value: 0.0, abs_error: 0.0 });
    }
    let g = Geometry::new(q, consts)?;
    crossing_quad(q, consts, |y| (g.omc - y) * y, ELEM_TOL)
}

/// I_S by quadrature of its defining integral (oracle path).
pub fn integral_s_quadrature(q: &CrossingQuery, consts: &DerivedConstants) -> Result<QuadEval> {
    if q.is_empty() {
        return Ok(QuadEval { value: 0.0, abs_error: 0.0 });
    }
    let g = Geometry::new(q, consts)?;
    let r = crossing_quad(q, consts, |y| (g.omc - y).powi(3), ELEM_TOL / g.lam.max(1.0))?;
    Ok(QuadEval { value: g.lam * r.value, abs_error: g.lam * r.abs_error })
}

/// The conditional approximation I_M + K_F I_F + K_S I_S, unclamped.
///
/// The raw value may leave [0, 1] slightly; use
/// [`approx_conditional_clamped`] for display.
pub fn approx_conditional(q: &CrossingQuery, consts: &DerivedConstants) -> Result<f64> {
    if (consts.c - q.c).abs() > 1e-12 * q.c.abs().max(1.0) {
        return Err(Error::Domain(format!(
            "constants were derived at c = {}, query has c = {}",
            consts.c, q.c
        )));
    }
    if !(consts.k_f.is_finite() && consts.k_s.is_finite()) {
        return Err(Error::Domain("K_F and K_S are required for the assembled approximation".into()));
    }
    if q.is_empty() {
        return Ok(0.0);
    }
    let im = integral_m(q, consts)?;
    let iff = integral_f(q, consts)?;
    let is = integral_s(q, consts)?;
    Ok(im + consts.k_f * iff + consts.k_s * is)
}

pub fn approx_conditional_clamped(q: &CrossingQuery, consts: &DerivedConstants) -> Result<f64> {
    Ok(approx_conditional(q, consts)?.clamp(0.0, 1.0))
}

/// Which kernel supplies the conditional term of the first-jump decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionalKernel {
    /// The closed-form approximation (any model with finite fourth moments).
    Approx,
    /// The exact formula; requires exponential T and Y.
    ExactExponential,
}

/// Model block for the unconditional ruin probability.
#[derive(Debug, Clone, Copy)]
pub struct RuinModel {
    pub t_spec: DistSpec,
    pub y_spec: DistSpec,
    /// Law of the first inter-arrival interval; defaults to the law of T.
    pub first_arrival: Option<DistSpec>,
}

impl RuinModel {
    pub fn exponential_rates(&self) -> Option<ExpModel> {
        match (self.t_spec, self.y_spec) {
            (DistSpec::Exponential { rate: rt }, DistSpec::Exponential { rate: ry }) => {
                ExpModel::new(rt, ry).ok()
            }
            _ => None,
        }
    }
}

/// P{tau <= t}: first-jump decomposition with the chosen conditional kernel.
pub fn prob_ruin(u: f64, c: f64, t: f64, model: &RuinModel, kernel: ConditionalKernel) -> Result<f64> {
    if !(u > 0.0) || !(c > 0.0) || !c.is_finite() {
        return Err(Error::Domain(format!("prob_ruin requires u > 0 and c > 0, got u = {u}, c = {c}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("prob_ruin requires a finite positive horizon, got {t}")));
    }
    model.t_spec.validate()?;
    model.y_spec.validate()?;
    if let Some(fa) = &model.first_arrival {
        fa.validate()?;
    }

    let conditional: Box<dyn Fn(f64) -> Result<f64>> = match kernel {
        ConditionalKernel::Approx => {
            let ms = MomentSet::from_specs(&model.t_spec, &model.y_spec)?;
            let dc = derive_constants(&ms, c)?;
            Box::new(move |v: f64| {
                let q = CrossingQuery::new(u, c, v, t)?;
                approx_conditional_clamped(&q, &dc)
            })
        }
        ConditionalKernel::ExactExponential => {
            let em = model.exponential_rates().ok_or_else(|| {
                Error::InvalidConfig("the exact conditional kernel requires exponential T and Y".into())
            })?;
            Box::new(move |v: f64| {
                let q = CrossingQuery::new(u, c, v, t)?;
                exact_conditional_exp(&q, &em)
            })
        }
    };

    let first_arrival = model.first_arrival.unwrap_or(model.t_spec);
    let y_spec = model.y_spec;

    if let DistSpec::Deterministic { value: a } = first_arrival {
        if a > t {
            return Ok(0.0);
        }
        let p = y_spec.survival(u + c * a) + conditional(a)?;
        return Ok(p.clamp(0.0, 1.0));
    }

    let integrand = |v: f64| -> f64 {
        let dens = first_arrival.pdf(v).expect("point mass handled above");
        if dens == 0.0 {
            return 0.0;
        }
        let cond = conditional(v).unwrap_or(0.0);
        dens * (y_spec.survival(u + c * v) + cond)
    };
    // split where u + cv doubles, and around the first-arrival mean
    let mut hints: Vec<f64> = (1..12)
        .map(|j| (2f64.powi(j) - 1.0) * u / c)
        .take_while(|&x| x < t)
        .collect();
    let mean = first_arrival.mean();
    for f in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
        let x = mean * f;
        if x < t {
            hints.push(x);
        }
    }
    let r = adaptive(&integrand, 0.0, t, 1e-8, Rule::Gk61, &hints, 600);
    if !r.converged {
        return Err(Error::QuadratureNoConvergence { achieved: r.abs_error, requested: 1e-8 });
    }
    Ok(r.value.clamp(0.0, 1.0))
}
