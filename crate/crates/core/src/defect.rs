//! The semigroup defect of the Mittag-Leffler kernel.
//!
//! The exponential satisfies `e^{λ(t+s)} = e^{λt} e^{λs}`; the fractional
//! kernel does not, and the gap is
//!
//! ```text
//! E_α(λ(t+s)^α) = E_α(λt^α) E_α(λs^α) − ΔE_α(t, s)
//! ΔE_α(t, s)    = ∫_0^t τ^{α-1} E_{α,α}(λτ^α) F(t − τ) dτ
//! F(r)          = ∫_0^s (r + s − σ)^{−α} / Γ(1−α) · d/dσ E_α(λσ^α) dσ
//! ```
//!
//! Both integrals have algebraic endpoint singularities: `σ^{α-1}` and
//! `τ^{α-1}` at the lower ends, `(s − σ)^{−α}` at the upper end of the inner
//! integral when `r = 0`, and the matching `r^{1−α}` behaviour of `F` near
//! `τ = t`. They are integrated with [`crate::quadrature`]'s graded end pieces.
//! At `α = 1` the defect vanishes identically and no quadrature is done.

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadratureConfig, Scheme};
use crate::specfun::{recip_gamma, DiscountSpec, Kernel};

fn check_times(t: f64, s: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("s must be non-negative, got {s}")));
    }
    Ok(())
}

/// Inner integral `F` for a fixed `s`, with the kernel-derivative factor
/// evaluated once at the fixed nodes of the Gauss-Legendre rule.
struct InnerIntegral {
    alpha: f64,
    s: f64,
    scale: f64,
    /// (s − σ, weight · dE/dσ) per node
    nodes: Vec<(f64, f64)>,
}

impl InnerIntegral {
    fn new(kernel: &mut Kernel, s: f64, q: &QuadratureConfig) -> Result<Self> {
        let alpha = kernel.spec().alpha();
        let rule = quadrature::singular_rule(s, Some(alpha), Some(1.0 - alpha), q)?;
        let mut nodes = Vec::with_capacity(rule.len());
        for n in rule {
            nodes.push((n.right, n.weight * kernel.derivative(n.left)?));
        }
        Ok(InnerIntegral {
            alpha,
            s,
            scale: recip_gamma(1.0 - alpha),
            nodes,
        })
    }

    fn eval(&self, r: f64) -> f64 {
        if self.s == 0.0 {
            return 0.0;
        }
        let a = self.alpha;
        let sum: f64 = self.nodes.iter().map(|&(rem, w)| w * (r + rem).powf(-a)).sum();
        self.scale * sum
    }
}

fn inner_adaptive(kernel: &mut Kernel, r: f64, s: f64, q: &QuadratureConfig) -> Result<f64> {
    let a = kernel.spec().alpha();
    let v = quadrature::integrate(s, Some(a), Some(1.0 - a), q, |sigma, rem| {
        Ok((r + rem).powf(-a) * kernel.derivative(sigma)?)
    })?;
    Ok(v * recip_gamma(1.0 - a))
}

fn require_fractional(spec: &DiscountSpec) -> Result<()> {
    if spec.is_classical() {
        return Err(Error::Domain(
            "inner defect integral needs alpha < 1 (Gamma(1 - alpha) has a pole at alpha = 1; the defect is zero there)"
                .into(),
        ));
    }
    Ok(())
}

/// `F(t)` for the pair `(t, s)`.
pub fn inner_f(spec: &DiscountSpec, t: f64, s: f64, q: &QuadratureConfig) -> Result<f64> {
    check_times(t, s)?;
    require_fractional(spec)?;
    q.validate()?;
    if s == 0.0 || spec.lambda() == 0.0 {
        return Ok(0.0);
    }
    let mut kernel = Kernel::new(*spec);
    match q.scheme {
        Scheme::GaussLegendre => Ok(InnerIntegral::new(&mut kernel, s, q)?.eval(t)),
        Scheme::AdaptiveSimpson => inner_adaptive(&mut kernel, t, s, q),
    }
}

/// `ΔE_α(t, s)`; zero for `s = 0`, `λ = 0` or `α = 1`.
pub fn delta_ml(spec: &DiscountSpec, t: f64, s: f64, q: &QuadratureConfig) -> Result<f64> {
    check_times(t, s)?;
    q.validate()?;
    if spec.is_classical() || s == 0.0 || spec.lambda() == 0.0 {
        return Ok(0.0);
    }
    let a = spec.alpha();
    let mut kernel = Kernel::new(*spec);
    match q.scheme {
        Scheme::GaussLegendre => {
            let inner = InnerIntegral::new(&mut kernel, s, q)?;
            let mut acc = 0.0;
            for n in quadrature::singular_rule(t, Some(a), Some(1.0 - a), q)? {
                let outer = n.left.powf(a - 1.0) * kernel.wiman(n.left)?;
                acc += n.weight * outer * inner.eval(n.right);
            }
            Ok(acc)
        }
        Scheme::AdaptiveSimpson => {
            let mut inner_kernel = kernel.clone();
            quadrature::integrate(t, Some(a), Some(1.0 - a), q, |tau, r| {
                let outer = tau.powf(a - 1.0) * kernel.wiman(tau)?;
                Ok(outer * inner_adaptive(&mut inner_kernel, r, s, q)?)
            })
        }
    }
}

/// One row of the semigroup identity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupCheck {
    pub t: f64,
    pub s: f64,
    /// `E_α(λt^α) E_α(λs^α)`
    pub product: f64,
    /// `ΔE_α(t, s)`
    pub defect: f64,
    /// `E_α(λ(t+s)^α)`
    pub shifted: f64,
    /// `product − defect − shifted`
    pub residual: f64,
}

pub fn semigroup_check(spec: &DiscountSpec, t: f64, s: f64, q: &QuadratureConfig) -> Result<SemigroupCheck> {
    check_times(t, s)?;
    let mut kernel = Kernel::new(*spec);
    let product = kernel.value(t)? * kernel.value(s)?;
    let shifted = kernel.value(t + s)?;
    let defect = delta_ml(spec, t, s, q)?;
    Ok(SemigroupCheck {
        t,
        s,
        product,
        defect,
        shifted,
        residual: product - defect - shifted,
    })
}

/// `E_α(λt^α) E_α(λs^α) − ΔE_α(t, s) − E_α(λ(t+s)^α)`.
pub fn semigroup_residual(spec: &DiscountSpec, t: f64, s: f64, q: &QuadratureConfig) -> Result<f64> {
    semigroup_check(spec, t, s, q).map(|c| c.residual)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectRow {
    pub s: f64,
    /// `|ΔE_α(t, s)|`
    pub magnitude: f64,
}

/// `|ΔE_α(t, s)|` for each `s`, in the order given.
pub fn small_s_bound(spec: &DiscountSpec, t: f64, s_values: &[f64], q: &QuadratureConfig) -> Result<Vec<DefectRow>> {
    if let Some(bad) = s_values.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return Err(Error::Domain(format!("s values must be positive, got {bad}")));
    }
    s_values
        .iter()
        .map(|&s| {
            Ok(DefectRow {
                s,
                magnitude: delta_ml(spec, t, s, q)?.abs(),
            })
        })
        .collect()
}
