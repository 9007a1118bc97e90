use super::grid::MAX_DIM;
use super::problem::{ControlProblem, SolverConfig};
use super::solver::Policy;
use crate::error::{Error, Result};
use crate::specfun::{DiscountSpec, Kernel};

/// Escape radius for forward trajectories, relative to the state box.
pub const ESCAPE_FACTOR: f64 = 1.5;

/// A control law `u(x, t)` for forward simulation.
pub trait ControlLaw {
    fn control(&self, x: &[f64], t: f64) -> Vec<f64>;
}

impl<F> ControlLaw for F
where
    F: Fn(&[f64], f64) -> Vec<f64>,
{
    fn control(&self, x: &[f64], t: f64) -> Vec<f64> {
        self(x, t)
    }
}

/// A tabulated [`Policy`] read at the nearest grid node.
#[derive(Debug, Clone, Copy)]
pub struct PolicyLaw<'a> {
    policy: &'a Policy,
    controls: &'a [Vec<f64>],
}

impl<'a> PolicyLaw<'a> {
    pub fn new(policy: &'a Policy, prob: &'a ControlProblem) -> Self {
        PolicyLaw {
            policy,
            controls: prob.control_grid(),
        }
    }
}

impl ControlLaw for PolicyLaw<'_> {
    fn control(&self, x: &[f64], t: f64) -> Vec<f64> {
        self.controls[self.policy.lookup(x, t)].clone()
    }
}

fn rk4_step(prob: &ControlProblem, x: &[f64], u: &[f64], t: f64, dt: f64) -> Vec<f64> {
    let dim = x.len();
    let shift = |base: &[f64], k: &[f64; MAX_DIM], h: f64| -> Vec<f64> {
        base.iter().zip(k).map(|(b, k)| b + h * k).collect()
    };
    let k1 = prob.dynamics(x, u, t);
    let k2 = prob.dynamics(&shift(x, &k1, 0.5 * dt), u, t + 0.5 * dt);
    let k3 = prob.dynamics(&shift(x, &k2, 0.5 * dt), u, t + 0.5 * dt);
    let k4 = prob.dynamics(&shift(x, &k3, dt), u, t + dt);
    (0..dim)
        .map(|d| x[d] + dt / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]))
        .collect()
}

/// Discounted cost `∫_0^T E_α(λτ^α) L(x(τ), u(τ), τ) dτ` of a control law
/// started at `x0`.
///
/// The state is advanced with RK4 on the `cfg.dt` grid, holding the control
/// fixed over each step, and the integral uses trapezoid weights on the same
/// grid.
pub fn evaluate_cost<C: ControlLaw + ?Sized>(prob: &ControlProblem, spec: &DiscountSpec, law: &C, x0: &[f64], cfg: &SolverConfig) -> Result<f64> {
    if x0.len() != prob.dim_x() {
        return Err(Error::Domain(format!(
            "initial state has dimension {}, problem has {}",
            x0.len(),
            prob.dim_x()
        )));
    }
    if !prob.contains(x0) {
        return Err(Error::Domain(format!("initial state {x0:?} lies outside the state box")));
    }
    let steps = cfg.steps()?;
    let dt = cfg.dt;
    let mut kern = Kernel::new(*spec);
    let mut weight = |tau: f64| -> Result<f64> {
        if spec.is_classical() {
            Ok((spec.lambda() * tau).exp())
        } else {
            kern.value(tau)
        }
    };

    let mut x = x0.to_vec();
    let mut total = 0.0;
    for n in 0..=steps {
        let t = n as f64 * dt;
        let u = law.control(&x, t);
        if u.len() != prob.dim_u() {
            return Err(Error::Domain(format!(
                "control law returned {} components, problem expects {}",
                u.len(),
                prob.dim_u()
            )));
        }
        let trap = if n == 0 || n == steps { 0.5 } else { 1.0 };
        total += trap * weight(t)? * prob.running_cost(&x, &u, t);
        if n == steps {
            break;
        }
        x = rk4_step(prob, &x, &u, t, dt);
        if !x.iter().all(|v| v.is_finite()) || !prob.inflated_contains(&x, ESCAPE_FACTOR) {
            return Err(Error::StateEscape {
                time: t + dt,
                state: x,
            });
        }
    }
    Ok(total * dt)
}
