//! Quadrature for integrands with algebraic endpoint singularities.
//!
//! An integral over `[a, b]` whose integrand behaves like `(x-a)^{γ_l - 1}`
//! near `a` and/or `(b-x)^{γ_r - 1}` near `b` is split into up to three
//! pieces. On an end piece of length `d` the substitution
//! `x - a = d · u^p` with `p = grading / γ` turns the singular factor into the
//! polynomial `u^{grading - 1}`, after which plain panels in `u` converge
//! quickly. The middle piece is regular.
//!
//! Integrands receive the distances to both endpoints rather than `x` itself;
//! near an endpoint `b - x` cannot be recovered from `x` without cancellation.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    GaussLegendre,
    AdaptiveSimpson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Panels per piece.
    pub panels: usize,
    pub scheme: Scheme,
    /// Fraction of the interval given to the substituted end pieces.
    pub singularity_split: f64,
    /// `u^{grading-1}` is what a singular end factor becomes after substitution.
    pub grading: u32,
    /// Gauss-Legendre points per panel.
    pub order: usize,
    /// Absolute tolerance per piece for the adaptive scheme.
    pub tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            panels: 8,
            scheme: Scheme::GaussLegendre,
            singularity_split: 0.5,
            grading: 3,
            order: 8,
            tol: 1e-12,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.panels < 4 {
            return Err(Error::Config(format!("panels must be >= 4, got {}", self.panels)));
        }
        if !(self.singularity_split > 0.0 && self.singularity_split < 1.0) {
            return Err(Error::Config(format!(
                "singularity_split must lie in (0, 1), got {}",
                self.singularity_split
            )));
        }
        if self.grading < 2 {
            return Err(Error::Config("grading must be >= 2".into()));
        }
        if self.order < 1 {
            return Err(Error::Config("order must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("tol must be positive".into()));
        }
        Ok(())
    }

    /// Same configuration with twice the panels.
    pub fn refined(&self) -> Self {
        QuadratureConfig {
            panels: 2 * self.panels,
            ..*self
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// A quadrature point described by its distances to both interval ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub left: f64,
    pub right: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    /// `x - a = d u^p`
    Left { d: f64, p: f64 },
    /// `x = a + start + width u`
    Middle { start: f64, width: f64 },
    /// `b - x = d u^p`
    Right { d: f64, p: f64 },
}

impl Piece {
    /// (left distance, right distance, dx/du)
    fn map(&self, len: f64, u: f64) -> (f64, f64, f64) {
        match *self {
            Piece::Left { d, p } => {
                let l = d * u.powf(p);
                (l, len - l, d * p * u.powf(p - 1.0))
            }
            Piece::Middle { start, width } => {
                let l = start + width * u;
                (l, len - l, width)
            }
            Piece::Right { d, p } => {
                let r = d * u.powf(p);
                (len - r, r, d * p * u.powf(p - 1.0))
            }
        }
    }
}

/// Endpoint behaviour of an integrand: `Some(γ)` for a `(distance)^{γ-1}`
/// factor, `None` for a regular end.
pub type EndExponent = Option<f64>;

fn pieces(len: f64, left: EndExponent, right: EndExponent, cfg: &QuadratureConfig) -> Vec<Piece> {
    let both = left.is_some() && right.is_some();
    let d = if both {
        0.5 * cfg.singularity_split * len
    } else {
        cfg.singularity_split * len
    };
    let g = cfg.grading as f64;
    let mut out = Vec::with_capacity(3);
    let mut start = 0.0;
    let mut end = len;
    if let Some(gl) = left {
        out.push(Piece::Left { d, p: g / gl });
        start = d;
    }
    if right.is_some() {
        end = len - d;
    }
    out.push(Piece::Middle {
        start,
        width: end - start,
    });
    if let Some(gr) = right {
        out.push(Piece::Right { d, p: g / gr });
    }
    out
}

fn check_exponent(e: EndExponent) -> Result<()> {
    match e {
        Some(g) if !(g > 0.0 && g.is_finite()) => Err(Error::Domain(format!(
            "endpoint exponent must be positive for an integrable singularity, got {g}"
        ))),
        _ => Ok(()),
    }
}

/// Fixed Gauss-Legendre rule over an interval of length `len`.
pub fn singular_rule(
    len: f64,
    left: EndExponent,
    right: EndExponent,
    cfg: &QuadratureConfig,
) -> Result<Vec<Node>> {
    cfg.validate()?;
    check_exponent(left)?;
    check_exponent(right)?;
    if !(len >= 0.0) {
        return Err(Error::Domain(format!("interval length must be >= 0, got {len}")));
    }
    if len == 0.0 {
        return Ok(Vec::new());
    }
    let (gx, gw) = gauss_legendre(cfg.order);
    let h = 1.0 / cfg.panels as f64;
    let mut nodes = Vec::with_capacity(3 * cfg.panels * cfg.order);
    for piece in pieces(len, left, right, cfg) {
        for k in 0..cfg.panels {
            let mid = (k as f64 + 0.5) * h;
            for (x, w) in gx.iter().zip(&gw) {
                let u = mid + 0.5 * h * x;
                let (l, r, jac) = piece.map(len, u);
                nodes.push(Node {
                    left: l,
                    right: r,
                    weight: 0.5 * h * w * jac,
                });
            }
        }
    }
    Ok(nodes)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson<F>(f: &mut F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::NonConvergence(format!(
            "adaptive Simpson hit its depth limit on [{a}, {b}]"
        )));
    }
    Ok(adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

const SIMPSON_DEPTH: u32 = 40;

/// Integrate `f(left, right)` over an interval of length `len`.
pub fn integrate<F>(
    len: f64,
    left: EndExponent,
    right: EndExponent,
    cfg: &QuadratureConfig,
    mut f: F,
) -> Result<f64>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    match cfg.scheme {
        Scheme::GaussLegendre => {
            let mut acc = 0.0;
            for n in singular_rule(len, left, right, cfg)? {
                acc += n.weight * f(n.left, n.right)?;
            }
            Ok(acc)
        }
        Scheme::AdaptiveSimpson => {
            cfg.validate()?;
            check_exponent(left)?;
            check_exponent(right)?;
            if len == 0.0 {
                return Ok(0.0);
            }
            let mut total = 0.0;
            for piece in pieces(len, left, right, cfg) {
                // the substituted integrand vanishes like u^{grading-1} at a
                // singular end, so a zero Jacobian means a zero contribution
                let mut g = |u: f64| -> Result<f64> {
                    let (l, r, jac) = piece.map(len, u);
                    if jac == 0.0 {
                        Ok(0.0)
                    } else {
                        Ok(jac * f(l, r)?)
                    }
                };
                let h = 1.0 / cfg.panels as f64;
                let tol = cfg.tol / cfg.panels as f64;
                for k in 0..cfg.panels {
                    let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
                    let fa = g(a)?;
                    let fm = g(0.5 * (a + b))?;
                    let fb = g(b)?;
                    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
                    total += adaptive_simpson(&mut g, a, b, fa, fm, fb, whole, tol, SIMPSON_DEPTH)?;
                }
            }
            Ok(total)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - want).abs() < 1e-14, "n={n} deg={deg} got={got} want={want}");
            }
        }
    }

    #[test]
    fn beta_function_integral() {
        // ∫_0^1 x^{a-1} (1-x)^{b-1} dx = B(a, b)
        let (a, b) = (0.3, 0.6);
        let want = crate::specfun::gamma(a).unwrap() * crate::specfun::gamma(b).unwrap()
            / crate::specfun::gamma(a + b).unwrap();
        for scheme in [Scheme::GaussLegendre, Scheme::AdaptiveSimpson] {
            let cfg = QuadratureConfig {
                scheme,
                ..QuadratureConfig::default()
            };
            let got = integrate(1.0, Some(a), Some(b), &cfg, |l, r| {
                Ok(l.powf(a - 1.0) * r.powf(b - 1.0))
            })
            .unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-10);
        }
    }

    #[test]
    fn one_sided_singularity() {
        // ∫_0^2 x^{-1/2} cos(x) dx
        let want = 1.8882490336945141; // mpmath quad
        let got = integrate(2.0, Some(0.5), None, &QuadratureConfig::default(), |l, _| {
            Ok(l.powf(-0.5) * l.cos())
        })
        .unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-12);
    }

    #[test]
    fn empty_interval_is_zero() {
        let got = integrate(0.0, Some(0.5), None, &QuadratureConfig::default(), |_, _| Ok(1.0)).unwrap();
        assert_eq!(got, 0.0);
    }

    #[test]
    fn config_validation() {
        let odd = QuadratureConfig {
            panels: 3,
            ..QuadratureConfig::default()
        };
        assert!(odd.validate().is_err());
        let no_middle = QuadratureConfig {
            singularity_split: 1.0,
            ..QuadratureConfig::default()
        };
        assert!(no_middle.validate().is_err());
        assert_eq!(QuadratureConfig::default().refined().panels, 16);
    }
}
