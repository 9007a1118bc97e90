//! Fractional time-derivative machinery for the `∂^{1−α} V / ∂t^{1−α}` term.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::specfun::{gamma, recip_gamma};

/// Order `μ` of a fractional derivative, `0 <= μ < 1`.
///
/// `μ = 0` is the identity operator, which is what the HJB term reduces to
/// in the exponential limit `α = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(mu: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&mu) {
            return Err(Error::Domain(format!("derivative order must satisfy 0 <= mu < 1, got {mu}")));
        }
        Ok(FracOrder(mu))
    }

    /// `μ = 1 − α` for the fractional discount order `α ∈ (0, 1]`.
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        Self::new(1.0 - alpha)
    }

    pub fn mu(self) -> f64 {
        self.0
    }

    pub fn is_identity(self) -> bool {
        self.0 == 0.0
    }
}

/// Trailing samples `(t, v)` on a uniform time grid, capped at `window`.
#[derive(Debug, Clone)]
pub struct HistoryBuffer {
    samples: VecDeque<(f64, f64)>,
    dt: f64,
    window: usize,
}

const SPACING_RTOL: f64 = 1e-9;

impl HistoryBuffer {
    pub fn new(dt: f64, window: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        if window < 1 {
            return Err(Error::Config("window must be >= 1".into()));
        }
        Ok(HistoryBuffer {
            samples: VecDeque::with_capacity(window),
            dt,
            window,
        })
    }

    /// Append a sample one step after the latest; the oldest sample is
    /// dropped once the window is full.
    pub fn push(&mut self, t: f64, v: f64) -> Result<()> {
        if let Some(&(last, _)) = self.samples.back() {
            let gap = t - last;
            if (gap - self.dt).abs() > SPACING_RTOL * self.dt.max(t.abs()) {
                return Err(Error::Domain(format!(
                    "samples must be spaced by dt = {}, got a gap of {gap}",
                    self.dt
                )));
            }
        }
        if self.samples.len() == self.window {
            self.samples.pop_front();
        }
        self.samples.push_back((t, v));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn latest(&self) -> Option<(f64, f64)> {
        self.samples.back().copied()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|&(_, v)| v)
    }
}

/// Precomputed L1 weights for a fixed order, step and maximum history length.
///
/// ```text
/// D^μ g(t_n) ≈ dt^{−μ}/Γ(2−μ) Σ_{k=0}^{n−1} b_k (g_{n−k} − g_{n−k−1}),
/// b_k = (k+1)^{1−μ} − k^{1−μ}
/// ```
#[derive(Debug, Clone)]
pub struct L1Operator {
    order: FracOrder,
    scale: f64,
    weights: Vec<f64>,
}

impl L1Operator {
    pub fn new(order: FracOrder, dt: f64, max_len: usize) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        let mu = order.mu();
        let e = 1.0 - mu;
        let weights = (0..max_len.saturating_sub(1))
            .map(|k| {
                let k = k as f64;
                (k + 1.0).powf(e) - k.powf(e)
            })
            .collect();
        Ok(L1Operator {
            order,
            scale: dt.powf(-mu) * recip_gamma(2.0 - mu),
            weights,
        })
    }

    /// Apply to samples ordered by increasing time; the derivative is taken at
    /// the last one. Samples beyond the operator's length are ignored from the
    /// old end.
    pub fn apply(&self, values: &[f64]) -> Result<f64> {
        if self.order.is_identity() {
            return values.last().copied().ok_or(Error::InsufficientHistory { needed: 1, have: 0 });
        }
        if values.len() < 2 {
            return Err(Error::InsufficientHistory {
                needed: 2,
                have: values.len(),
            });
        }
        let n = (values.len() - 1).min(self.weights.len());
        let last = values.len() - 1;
        let mut acc = 0.0;
        for (k, b) in self.weights[..n].iter().enumerate() {
            acc += b * (values[last - k] - values[last - k - 1]);
        }
        Ok(self.scale * acc)
    }
}

/// L1 approximation of the order-`μ` Caputo-type derivative at the latest
/// sample of `h`. For `μ = 0` this is the latest value.
pub fn l1_frac_deriv(h: &HistoryBuffer, order: FracOrder) -> Result<f64> {
    let values: Vec<f64> = h.values().collect();
    L1Operator::new(order, h.dt(), values.len().max(1))?.apply(&values)
}

/// `A(α) = (1−α)^{α−1} / α^α`, with the continuous value `A(1) = 1`.
pub fn amplitude(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("amplitude needs 0 < alpha <= 1, got {alpha}")));
    }
    if alpha == 1.0 {
        return Ok(1.0);
    }
    Ok((1.0 - alpha).powf(alpha - 1.0) / alpha.powf(alpha))
}

/// First-order surrogate of `D^{1−α} V · dt` over one step:
///
/// ```text
/// α dt^α/Γ(α+1) · v + (1−α) dt^α/Γ(α+1) · (∂V/∂x·f + ∂V/∂t) · dt
/// ```
pub fn composite_expansion_k1(v: f64, dvdx_dot_f: f64, dvdt: f64, dt: f64, alpha: f64) -> Result<f64> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("expansion needs 0 < alpha < 1, got {alpha}")));
    }
    let base = dt.powf(alpha) / gamma(alpha + 1.0)?;
    Ok(alpha * base * v + (1.0 - alpha) * base * (dvdx_dot_f + dvdt) * dt)
}

/// Generalized binomial coefficient `Γ(α+1) / (Γ(k+1) Γ(α−k+1))`.
///
/// Poles of the denominator give zero (reciprocal-Gamma convention).
pub fn binomial_coeff(alpha: f64, k: u32) -> f64 {
    let num = gamma(alpha + 1.0);
    let via_gamma = num.ok().map(|g| g * recip_gamma(k as f64 + 1.0) * recip_gamma(alpha - k as f64 + 1.0));
    match via_gamma {
        Some(v) if v.is_finite() => v,
        // Γ(α+1) itself at a pole or overflow: fall back to the falling product
        _ => (0..k).fold(1.0, |acc, j| acc * (alpha - j as f64) / (j as f64 + 1.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn amplitude_values() {
        assert_relative_eq!(amplitude(0.5).unwrap(), 2.0, max_relative = 1e-15);
        assert_eq!(amplitude(1.0).unwrap(), 1.0);
        assert_relative_eq!(amplitude(1.0 - 1e-8).unwrap(), 1.0, max_relative = 1e-6);
        assert!(amplitude(0.0).is_err());
        assert!(amplitude(1.5).is_err());
    }

    #[test]
    fn identity_order_returns_latest() {
        let mut h = HistoryBuffer::new(0.1, 4).unwrap();
        for (i, v) in [3.0, -1.0, 7.5].iter().enumerate() {
            h.push(i as f64 * 0.1, *v).unwrap();
        }
        assert_eq!(l1_frac_deriv(&h, FracOrder::new(0.0).unwrap()).unwrap(), 7.5);
    }

    #[test]
    fn constant_history_has_zero_derivative() {
        let mut h = HistoryBuffer::new(0.01, 50).unwrap();
        for i in 0..50 {
            h.push(i as f64 * 0.01, 4.2).unwrap();
        }
        for mu in [0.1, 0.5, 0.9] {
            let d = l1_frac_deriv(&h, FracOrder::new(mu).unwrap()).unwrap();
            assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn needs_two_samples() {
        let mut h = HistoryBuffer::new(0.1, 4).unwrap();
        h.push(0.0, 1.0).unwrap();
        assert_eq!(
            l1_frac_deriv(&h, FracOrder::new(0.5).unwrap()),
            Err(Error::InsufficientHistory { needed: 2, have: 1 })
        );
    }

    #[test]
    fn history_window_and_spacing() {
        let mut h = HistoryBuffer::new(0.5, 2).unwrap();
        h.push(0.0, 1.0).unwrap();
        h.push(0.5, 2.0).unwrap();
        h.push(1.0, 3.0).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.values().collect::<Vec<_>>(), vec![2.0, 3.0]);
        assert!(h.push(1.7, 4.0).is_err());
        assert!(HistoryBuffer::new(0.0, 3).is_err());
        assert!(HistoryBuffer::new(0.1, 0).is_err());
    }

    #[test]
    fn frac_order_bounds() {
        assert!(FracOrder::new(1.0).is_err());
        assert!(FracOrder::new(-0.1).is_err());
        assert_eq!(FracOrder::from_alpha(1.0).unwrap().mu(), 0.0);
        assert_relative_eq!(FracOrder::from_alpha(0.3).unwrap().mu(), 0.7);
    }

    #[test]
    fn expansion_examples() {
        assert_eq!(composite_expansion_k1(0.0, 0.0, 0.0, 0.01, 0.5).unwrap(), 0.0);
        let want = 0.05 / gamma(1.5).unwrap();
        assert_relative_eq!(composite_expansion_k1(1.0, 0.0, 0.0, 0.01, 0.5).unwrap(), want, max_relative = 1e-14);
        assert!(composite_expansion_k1(1.0, 0.0, 0.0, 0.0, 0.5).is_err());
        assert!(composite_expansion_k1(1.0, 0.0, 0.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn binomial_examples() {
        assert_relative_eq!(binomial_coeff(0.7, 1), 0.7, max_relative = 1e-14);
        assert_relative_eq!(binomial_coeff(0.3, 0), 1.0, max_relative = 1e-14);
        // 0.5 (0.5 − 1) / 2
        assert_relative_eq!(binomial_coeff(0.5, 2), -0.125, max_relative = 1e-14);
        // integer order: C(2, 3) = 0 at the pole of Γ(α−k+1)
        assert_eq!(binomial_coeff(2.0, 3), 0.0);
        // Γ(α+1) at a pole falls back to the product form
        assert_relative_eq!(binomial_coeff(-1.0, 2), 1.0, max_relative = 1e-14);
    }
}
