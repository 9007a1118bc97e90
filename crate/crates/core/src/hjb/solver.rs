use rayon::prelude::*;

use super::grid::{Grid, MAX_DIM};
use super::problem::{ControlProblem, SolverConfig};
use crate::error::{Error, Result};
use crate::fracderiv::{amplitude, FracOrder, L1Operator};
use crate::specfun::{kernel, DiscountSpec};

const DIVERGENCE_LIMIT: f64 = 1e12;

/// `V(x, t_n)` on every node of `grid` for `t_n = n·dt`, `n = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueField {
    grid: Grid,
    dt: f64,
    slices: usize,
    values: Vec<f64>,
}

impl ValueField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of stored time slices (`N + 1`).
    pub fn slices(&self) -> usize {
        self.slices
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn slice(&self, n: usize) -> &[f64] {
        let m = self.grid.len();
        &self.values[n * m..(n + 1) * m]
    }

    pub fn at(&self, n: usize, x: &[f64]) -> f64 {
        self.grid.interpolate(self.slice(n), x)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs_diff(&self, other: &ValueField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Minimising control-grid index per node and time slice `n = 0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    grid: Grid,
    times: Vec<f64>,
    indices: Vec<u32>,
}

impl Policy {
    /// Build from explicit slices, e.g. when reading a stored policy back.
    pub fn from_slices(grid: Grid, times: Vec<f64>, indices: Vec<u32>) -> Result<Self> {
        if times.is_empty() || indices.len() != times.len() * grid.len() {
            return Err(Error::Config(format!(
                "policy needs {} entries per slice, got {} entries for {} slices",
                grid.len(),
                indices.len(),
                times.len()
            )));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("policy times must be strictly increasing".into()));
        }
        Ok(Policy { grid, times, indices })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slice(&self, n: usize) -> &[u32] {
        let m = self.grid.len();
        &self.indices[n * m..(n + 1) * m]
    }

    /// Control index at the node nearest `x`, from the latest slice not after `t`.
    pub fn lookup(&self, x: &[f64], t: f64) -> usize {
        let eps = 1e-9 * self.times.last().copied().unwrap_or(1.0).abs().max(1.0);
        let n = self.times.partition_point(|&s| s <= t + eps).saturating_sub(1);
        self.slice(n)[self.grid.nearest(x)] as usize
    }
}

/// Residual of `−λA(α) ∂^{1−α}V/∂t^{1−α} − ∂V/∂t − min_u H` on time slices
/// `n = 1..N-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField {
    grid: Grid,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl ResidualField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        let m = self.grid.len();
        &self.values[k * m..(k + 1) * m]
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub value: ValueField,
    pub policy: Policy,
    pub residual: Option<ResidualField>,
    pub warnings: Vec<String>,
}

/// `H(x, u, p, t) = L(x, u, t) + p · f(x, u, t)`.
pub fn pre_hamiltonian(prob: &ControlProblem, x: &[f64], u: &[f64], p: &[f64], t: f64) -> f64 {
    let f = prob.dynamics(x, u, t);
    let pf: f64 = p.iter().zip(&f[..prob.dim_x()]).map(|(a, b)| a * b).sum();
    prob.running_cost(x, u, t) + pf
}

/// `min_u H(x, u, p, t)` over the control grid and the minimising index;
/// ties go to the lowest index.
pub fn min_hamiltonian(prob: &ControlProblem, x: &[f64], p: &[f64], t: f64) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (k, u) in prob.control_grid().iter().enumerate() {
        let h = pre_hamiltonian(prob, x, u, p, t);
        if h < best.0 {
            best = (h, k);
        }
    }
    best
}

/// The per-step discount factor: `e^{λ dt}` in the exponential limit,
/// `E_α(λ dt^α)` otherwise.
pub fn discount_factor(spec: &DiscountSpec, dt: f64) -> Result<f64> {
    if spec.is_classical() {
        Ok((spec.lambda() * dt).exp())
    } else {
        kernel(spec, dt)
    }
}

#[inline]
fn foot_point(x: &[f64; MAX_DIM], f: &[f64; MAX_DIM], dim: usize, dt: f64) -> [f64; MAX_DIM] {
    let mut y = *x;
    for d in 0..dim {
        y[d] += f[d] * dt;
    }
    y
}

/// `min_u (L(x,u,t) dt + factor · V_next(x + f dt))` and its argmin.
fn bellman_min(prob: &ControlProblem, grid: &Grid, next: &[f64], x: &[f64; MAX_DIM], t: f64, dt: f64, factor: f64) -> (f64, usize) {
    let dim = grid.dim();
    let mut best = (f64::INFINITY, 0);
    for (k, u) in prob.control_grid().iter().enumerate() {
        let f = prob.dynamics(&x[..dim], u, t);
        let y = foot_point(x, &f, dim, dt);
        let v = prob.running_cost(&x[..dim], u, t) * dt + factor * grid.interpolate(next, &y[..dim]);
        if v < best.0 {
            best = (v, k);
        }
    }
    best
}

/// Backward march of `V(x,t) = min_u (L dt + factor · V(x + f dt, t + dt))`.
pub(crate) fn march(prob: &ControlProblem, cfg: &SolverConfig, factor: f64) -> Result<(ValueField, Policy)> {
    let steps = cfg.steps()?;
    let grid = prob.grid(cfg.nx)?;
    let m = grid.len();
    let dt = cfg.dt;
    let mut values = vec![0.0; (steps + 1) * m];
    let mut indices = vec![0u32; steps * m];

    for (k, v) in values[steps * m..].iter_mut().enumerate() {
        let x = grid.node(k);
        *v = cfg.terminal(&x[..grid.dim()]);
    }

    for n in (0..steps).rev() {
        let t = n as f64 * dt;
        let (head, tail) = values.split_at_mut((n + 1) * m);
        let current = &mut head[n * m..];
        let next = &tail[..m];
        let policy = &mut indices[n * m..(n + 1) * m];
        current
            .par_iter_mut()
            .zip(policy.par_iter_mut())
            .enumerate()
            .for_each(|(k, (v, idx))| {
                let x = grid.node(k);
                let (best, arg) = bellman_min(prob, &grid, next, &x, t, dt, factor);
                *v = best;
                *idx = arg as u32;
            });
        let worst = current.iter().fold(0.0f64, |acc, v| if v.is_finite() { acc.max(v.abs()) } else { f64::INFINITY });
        if worst > DIVERGENCE_LIMIT {
            return Err(Error::Divergence { step: n, magnitude: worst });
        }
    }

    let times = (0..steps).map(|n| n as f64 * dt).collect();
    let policy = Policy {
        grid: grid.clone(),
        times,
        indices,
    };
    let value = ValueField {
        grid,
        dt,
        slices: steps + 1,
        values,
    };
    Ok((value, policy))
}

/// PDE residual of the fractional HJB equation for a solved field.
///
/// The fractional derivative is taken at fixed `x` over the trailing
/// `window` slices with the L1 scheme; `∂V/∂t` is the forward difference
/// and `p = ∂V/∂x` comes from grid differences. With `α = 1` the memory term
/// is the identity and this is the residual of `−λV − ∂V/∂t = min_u H`.
pub fn pde_residual(prob: &ControlProblem, spec: &DiscountSpec, cfg: &SolverConfig, field: &ValueField) -> Result<ResidualField> {
    let grid = field.grid().clone();
    let m = grid.len();
    let dim = grid.dim();
    let dt = field.dt();
    let slices = field.slices();
    let order = FracOrder::from_alpha(spec.alpha())?;
    let window = cfg.window.max(2);
    let l1 = L1Operator::new(order, dt, window)?;
    let coef = -spec.lambda() * amplitude(spec.alpha())?;

    let count = slices.saturating_sub(2);
    let mut values = vec![0.0; count * m];
    values.par_chunks_mut(m).enumerate().try_for_each(|(k, out)| -> Result<()> {
        let n = k + 1;
        let t = n as f64 * dt;
        let cur = field.slice(n);
        let next = field.slice(n + 1);
        let first = (n + 1).saturating_sub(window);
        let mut hist = Vec::with_capacity(window);
        for (node, r) in out.iter_mut().enumerate() {
            hist.clear();
            hist.extend((first..=n).map(|j| field.slice(j)[node]));
            let memory = l1.apply(&hist)?;
            let dvdt = (next[node] - cur[node]) / dt;
            let x = grid.node(node);
            let p = grid.gradient(cur, node);
            let (h, _) = min_hamiltonian(prob, &x[..dim], &p[..dim], t);
            *r = coef * memory - dvdt - h;
        }
        Ok(())
    })?;
    Ok(ResidualField {
        grid,
        times: (1..=count).map(|n| n as f64 * dt).collect(),
        values,
    })
}

/// One-step Bellman defect of a solved field at an arbitrary point `x` and
/// slice `n < N`:
/// `V(x, t_n) − min_u (L dt + factor · V(x + f dt, t_{n+1}))`, both sides
/// read through the grid interpolant. Zero at the nodes by construction.
pub fn bellman_residual(prob: &ControlProblem, spec: &DiscountSpec, field: &ValueField, n: usize, x: &[f64]) -> Result<f64> {
    if n + 1 >= field.slices() {
        return Err(Error::Domain(format!("slice {n} has no successor")));
    }
    let grid = field.grid();
    let dt = field.dt();
    let factor = discount_factor(spec, dt)?;
    let mut p = [0.0; MAX_DIM];
    p[..grid.dim()].copy_from_slice(&x[..grid.dim()]);
    let (rhs, _) = bellman_min(prob, grid, field.slice(n + 1), &p, n as f64 * dt, dt, factor);
    Ok(field.at(n, x) - rhs)
}

fn finish(prob: &ControlProblem, spec: &DiscountSpec, cfg: &SolverConfig, value: ValueField, policy: Policy, warnings: Vec<String>) -> Result<Solution> {
    for w in &warnings {
        log::warn!("{w}");
    }
    let residual = if cfg.residual {
        Some(pde_residual(prob, spec, cfg, &value)?)
    } else {
        None
    };
    Ok(Solution {
        value,
        policy,
        residual,
        warnings,
    })
}

/// Classical discounted HJB, `−λV − ∂V/∂t = min_u H`, marched backward from
/// the terminal value with the per-step factor `e^{λ dt}`.
pub fn solve_classical(prob: &ControlProblem, spec: &DiscountSpec, cfg: &SolverConfig) -> Result<Solution> {
    if !spec.is_classical() {
        return Err(Error::Domain(format!(
            "classical solver needs alpha = 1, got {}",
            spec.alpha()
        )));
    }
    let warnings = cfg.validate(spec)?;
    let (value, policy) = march(prob, cfg, discount_factor(spec, cfg.dt)?)?;
    finish(prob, spec, cfg, value, policy, warnings)
}

/// Fractional-discount HJB. The marching scheme is the dynamic-programming
/// recursion `V(x,t) = min_u (L dt + E_α(λ dt^α) V(x + f dt, t + dt))`; the
/// PDE form with the `A(α)`-weighted memory term is evaluated afterwards as
/// a residual. `α = 1` is delegated to [`solve_classical`].
pub fn solve_fractional(prob: &ControlProblem, spec: &DiscountSpec, cfg: &SolverConfig) -> Result<Solution> {
    if spec.is_classical() {
        return solve_classical(prob, spec, cfg);
    }
    let warnings = cfg.validate(spec)?;
    let factor = kernel(spec, cfg.dt)?;
    let (value, policy) = march(prob, cfg, factor)?;
    finish(prob, spec, cfg, value, policy, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hjb::grid::Boundary;

    fn scalar_lq() -> ControlProblem {
        let controls = (-20..=20).map(|k| vec![k as f64 * 0.1]).collect();
        ControlProblem::new(
            vec![(-1.0, 1.0)],
            controls,
            |_x, u, _t| [u[0], 0.0],
            |x, u, _t| 0.5 * (x[0] * x[0] + u[0] * u[0]),
        )
        .unwrap()
        .with_boundary(Boundary::ExtrapolateLinear)
    }

    fn cfg(dt: f64, horizon: f64, nx: usize) -> SolverConfig {
        SolverConfig {
            dt,
            horizon,
            nx,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn pre_hamiltonian_examples() {
        let p = scalar_lq();
        assert_eq!(pre_hamiltonian(&p, &[1.0], &[-1.0], &[2.0], 0.0), -1.0);
        assert_eq!(pre_hamiltonian(&p, &[0.3], &[0.5], &[0.0], 0.0), 0.5 * (0.09 + 0.25));
    }

    #[test]
    fn min_hamiltonian_enumerates_and_breaks_ties_low() {
        let p = ControlProblem::new(vec![(-1.0, 1.0)], vec![vec![-1.0], vec![0.0], vec![1.0]], |_x, u, _t| [u[0], 0.0], |_, _, _| 0.0).unwrap();
        assert_eq!(min_hamiltonian(&p, &[0.0], &[2.0], 0.0), (-2.0, 0));
        let q = ControlProblem::new(vec![(-1.0, 1.0)], vec![vec![-1.0], vec![0.0], vec![1.0]], |_x, u, _t| [u[0], 0.0], |x, _, _| x[0] * x[0] + 1.0).unwrap();
        assert_eq!(min_hamiltonian(&q, &[0.5], &[0.0], 0.0), (1.25, 0));
    }

    #[test]
    fn quadratic_minimiser_snaps_to_grid() {
        // H = u²/2 + p u, continuous minimiser u = −p
        let p = scalar_lq();
        for &costate in &[0.37, -0.83, 1.46] {
            let (_, k) = min_hamiltonian(&p, &[0.0], &[costate], 0.0);
            let want = (-costate * 10.0f64).round() / 10.0;
            assert!((p.control_grid()[k][0] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_cost_gives_zero_value() {
        let p = ControlProblem::new(vec![(-1.0, 1.0)], vec![vec![0.0], vec![1.0]], |_x, u, _t| [u[0], 0.0], |_, _, _| 0.0).unwrap();
        for alpha in [1.0, 0.6] {
            let spec = DiscountSpec::new(alpha, -0.5).unwrap();
            let sol = solve_fractional(&p, &spec, &cfg(0.05, 1.0, 9)).unwrap();
            assert!(sol.value.as_slice().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn classical_solver_rejects_fractional_order() {
        let spec = DiscountSpec::new(0.5, -0.5).unwrap();
        assert!(solve_classical(&scalar_lq(), &spec, &cfg(0.05, 1.0, 9)).is_err());
    }

    #[test]
    fn config_errors() {
        let spec = DiscountSpec::new(1.0, -0.5).unwrap();
        assert!(solve_classical(&scalar_lq(), &spec, &cfg(0.03, 1.0, 9)).is_err());
        assert!(solve_classical(&scalar_lq(), &spec, &cfg(0.05, 1.0, 4)).is_err());
        assert!(solve_classical(&scalar_lq(), &spec, &cfg(0.0, 1.0, 9)).is_err());
        // discount increment ≥ 1 with λ < 0 is rejected, with λ > 0 only warned
        let strong = DiscountSpec::new(1.0, -30.0).unwrap();
        assert!(solve_classical(&scalar_lq(), &strong, &cfg(0.05, 1.0, 9)).is_err());
        let growing = DiscountSpec::new(1.0, 30.0).unwrap();
        let sol = solve_classical(&scalar_lq(), &growing, &cfg(0.05, 0.1, 9)).unwrap();
        assert_eq!(sol.warnings.len(), 1);
    }

    #[test]
    fn short_window_warns() {
        let spec = DiscountSpec::new(0.7, -0.5).unwrap();
        let c = SolverConfig {
            window: 4,
            ..cfg(0.05, 0.5, 9)
        };
        let sol = solve_fractional(&scalar_lq(), &spec, &c).unwrap();
        assert!(sol.warnings.iter().any(|w| w.contains("window")));
    }

    #[test]
    fn divergence_is_reported() {
        let p = ControlProblem::new(vec![(-1.0, 1.0)], vec![vec![0.0]], |_x, _u, _t| [0.0, 0.0], |_, _, _| 3e11).unwrap();
        let spec = DiscountSpec::new(1.0, 0.0).unwrap();
        let err = solve_classical(&p, &spec, &cfg(0.5, 10.0, 9)).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
    }

    #[test]
    fn terminal_value_is_respected() {
        let p = ControlProblem::new(vec![(-1.0, 1.0)], vec![vec![0.0]], |_x, _u, _t| [0.0, 0.0], |_, _, _| 0.0).unwrap();
        let spec = DiscountSpec::new(1.0, -1.0).unwrap();
        let c = SolverConfig {
            terminal_value: Some(std::sync::Arc::new(|x: &[f64]| 2.0 + x[0])),
            ..cfg(0.1, 1.0, 9)
        };
        let sol = solve_classical(&p, &spec, &c).unwrap();
        // V(x, 0) = e^{λT} (2 + x)
        let v = sol.value.at(0, &[0.5]);
        assert!((v - (-1f64).exp() * 2.5).abs() < 1e-12);
    }

    #[test]
    fn policy_lookup_uses_latest_slice() {
        let grid = Grid::new(&[(0.0, 1.0)], 3, Boundary::ClampGradient).unwrap();
        let pol = Policy::from_slices(grid, vec![0.0, 0.5], vec![0, 1, 2, 2, 1, 0]).unwrap();
        assert_eq!(pol.lookup(&[0.0], 0.2), 0);
        assert_eq!(pol.lookup(&[0.0], 0.5), 2);
        assert_eq!(pol.lookup(&[0.9], 0.7), 0);
        assert!(Policy::from_slices(pol.grid().clone(), vec![0.0], vec![0, 1]).is_err());
    }
}
