use crate::error::{Error, Result};

/// Stationary solution of the discounted scalar LQ problem
/// `ẋ = a x + b u`, `L = (q x² + r u²)/2`, kernel `e^{λt}`.
///
/// Substituting `V = P x²/2` into `−λV = min_u H` gives
/// `(b²/r) P² − (2a+λ) P − q = 0`; the returned `P` is the larger root and
/// `k = −P b / r` is the feedback gain (`u = k x`).
pub fn lqr_oracle(a: f64, b: f64, q: f64, r: f64, lambda: f64) -> Result<(f64, f64)> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("control weight r must be positive, got {r}")));
    }
    if !(q >= 0.0) {
        return Err(Error::Domain(format!("state weight q must be non-negative, got {q}")));
    }
    if b == 0.0 || !b.is_finite() {
        return Err(Error::Domain(format!("input gain b must be non-zero, got {b}")));
    }
    let c = 2.0 * a + lambda;
    let disc = c * c + 4.0 * q * b * b / r;
    if disc < 0.0 {
        return Err(Error::Domain(format!("Riccati discriminant is negative: {disc}")));
    }
    let p = r * (c + disc.sqrt()) / (2.0 * b * b);
    Ok((p, -p * b / r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn undiscounted_unit_problem() {
        assert_eq!(lqr_oracle(0.0, 1.0, 1.0, 1.0, 0.0).unwrap(), (1.0, -1.0));
    }

    #[test]
    fn zero_state_cost_with_stable_drift() {
        let (p, k) = lqr_oracle(-1.0, 1.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(p, 0.0);
        assert_eq!(k, 0.0);
    }

    #[test]
    fn golden_ratio_case() {
        let (p, _) = lqr_oracle(1.0, 1.0, 1.0, 1.0, -1.0).unwrap();
        assert_relative_eq!(p, (1.0 + 5f64.sqrt()) / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn satisfies_riccati() {
        for &(a, b, q, r, l) in &[(0.0, 1.0, 1.0, 1.0, -0.5), (0.3, -2.0, 0.5, 0.2, -1.0), (-1.0, 0.5, 3.0, 4.0, 0.7)] {
            let (p, _) = lqr_oracle(a, b, q, r, l).unwrap();
            let res = b * b / r * p * p - (2.0 * a + l) * p - q;
            assert!(res.abs() < 1e-12 * (1.0 + p * p), "{res}");
        }
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(lqr_oracle(0.0, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(lqr_oracle(0.0, 0.0, 1.0, 1.0, 0.0).is_err());
        assert!(lqr_oracle(0.0, 1.0, -1.0, 1.0, 0.0).is_err());
    }
}
