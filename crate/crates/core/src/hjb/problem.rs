use std::fmt;
use std::sync::Arc;

use super::grid::{Boundary, Grid, MAX_DIM};
use crate::error::{Error, Result};
use crate::specfun::{gamma, DiscountSpec};

/// `f(x, u, t)`; only the first `dim_x` entries of the result are read.
pub type Dynamics = Arc<dyn Fn(&[f64], &[f64], f64) -> [f64; MAX_DIM] + Send + Sync>;
/// `L(x, u, t)`
pub type RunningCost = Arc<dyn Fn(&[f64], &[f64], f64) -> f64 + Send + Sync>;
pub type TerminalValue = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `ẋ = f(x, u, t)` with running cost `L(x, u, t)` on a rectangular state box
/// and a finite set of admissible controls.
#[derive(Clone)]
pub struct ControlProblem {
    dynamics: Dynamics,
    running_cost: RunningCost,
    control_grid: Vec<Vec<f64>>,
    state_box: Vec<(f64, f64)>,
    boundary: Boundary,
}

impl fmt::Debug for ControlProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlProblem")
            .field("dim_x", &self.dim_x())
            .field("controls", &self.control_grid.len())
            .field("state_box", &self.state_box)
            .field("boundary", &self.boundary)
            .finish()
    }
}

impl ControlProblem {
    pub fn new<F, L>(state_box: Vec<(f64, f64)>, control_grid: Vec<Vec<f64>>, dynamics: F, running_cost: L) -> Result<Self>
    where
        F: Fn(&[f64], &[f64], f64) -> [f64; MAX_DIM] + Send + Sync + 'static,
        L: Fn(&[f64], &[f64], f64) -> f64 + Send + Sync + 'static,
    {
        if state_box.is_empty() || state_box.len() > MAX_DIM {
            return Err(Error::Config(format!(
                "state dimension must be 1 or 2, got {}",
                state_box.len()
            )));
        }
        for (d, &(lo, hi)) in state_box.iter().enumerate() {
            if !(lo < hi) {
                return Err(Error::Config(format!("state box dimension {d} needs lo < hi, got [{lo}, {hi}]")));
            }
        }
        let Some(first) = control_grid.first() else {
            return Err(Error::Config("control grid must not be empty".into()));
        };
        let m = first.len();
        if m == 0 || control_grid.iter().any(|u| u.len() != m) {
            return Err(Error::Config("controls must all have the same non-zero dimension".into()));
        }
        Ok(ControlProblem {
            dynamics: Arc::new(dynamics),
            running_cost: Arc::new(running_cost),
            control_grid,
            state_box,
            boundary: Boundary::ClampGradient,
        })
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn dim_x(&self) -> usize {
        self.state_box.len()
    }

    pub fn dim_u(&self) -> usize {
        self.control_grid[0].len()
    }

    pub fn control_grid(&self) -> &[Vec<f64>] {
        &self.control_grid
    }

    pub fn state_box(&self) -> &[(f64, f64)] {
        &self.state_box
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    #[inline]
    pub fn dynamics(&self, x: &[f64], u: &[f64], t: f64) -> [f64; MAX_DIM] {
        (self.dynamics)(x, u, t)
    }

    #[inline]
    pub fn running_cost(&self, x: &[f64], u: &[f64], t: f64) -> f64 {
        (self.running_cost)(x, u, t)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim_x() && self.state_box.iter().zip(x).all(|(&(lo, hi), &v)| v >= lo && v <= hi)
    }

    /// Box scaled about its centre by `factor`.
    pub fn inflated_contains(&self, x: &[f64], factor: f64) -> bool {
        self.state_box.iter().zip(x).all(|(&(lo, hi), &v)| {
            let c = 0.5 * (lo + hi);
            let r = 0.5 * (hi - lo) * factor;
            v >= c - r && v <= c + r
        })
    }

    pub fn grid(&self, nx: usize) -> Result<Grid> {
        Grid::new(&self.state_box, nx, self.boundary)
    }

    /// Same problem with the running cost multiplied by `c`.
    pub fn scaled_cost(&self, c: f64) -> Self {
        let inner = Arc::clone(&self.running_cost);
        ControlProblem {
            running_cost: Arc::new(move |x: &[f64], u: &[f64], t| c * inner(x, u, t)),
            ..self.clone()
        }
    }
}

/// Discretisation of a backward solve.
#[derive(Clone)]
pub struct SolverConfig {
    pub dt: f64,
    /// Truncation `T` of the infinite horizon.
    pub horizon: f64,
    /// Grid points per state dimension.
    pub nx: usize,
    /// Past time slices used by the L1 memory term of the residual.
    pub window: usize,
    /// `V(x, T)`; zero when absent.
    pub terminal_value: Option<TerminalValue>,
    /// Whether to compute the PDE residual field.
    pub residual: bool,
}

impl fmt::Debug for SolverConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolverConfig")
            .field("dt", &self.dt)
            .field("horizon", &self.horizon)
            .field("nx", &self.nx)
            .field("window", &self.window)
            .field("terminal_value", &self.terminal_value.as_ref().map(|_| "<fn>"))
            .field("residual", &self.residual)
            .finish()
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 0.01,
            horizon: 10.0,
            nx: 129,
            window: 64,
            terminal_value: None,
            residual: true,
        }
    }
}

const MIN_GRID: usize = 8;
const MIN_WINDOW: usize = 10;

impl SolverConfig {
    /// Number of time steps `T / dt`, which must be an integer.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        let ratio = self.horizon / self.dt;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::Config(format!(
                "horizon {} is not an integer multiple of dt {}",
                self.horizon, self.dt
            )));
        }
        Ok(steps as usize)
    }

    pub fn terminal(&self, x: &[f64]) -> f64 {
        self.terminal_value.as_ref().map_or(0.0, |f| f(x))
    }

    /// Check the configuration against a discount; returns warnings.
    pub fn validate(&self, spec: &DiscountSpec) -> Result<Vec<String>> {
        self.steps()?;
        if self.nx < MIN_GRID {
            return Err(Error::Config(format!("nx must be >= {MIN_GRID}, got {}", self.nx)));
        }
        if self.window < 1 {
            return Err(Error::Config("window must be >= 1".into()));
        }
        let mut warnings = Vec::new();
        let a = spec.alpha();
        let increment = self.dt.powf(a) * spec.lambda().abs() / gamma(a + 1.0)?;
        if increment >= 1.0 {
            let msg = format!("discount increment dt^alpha |lambda| / Gamma(alpha+1) = {increment:.4} is not below 1");
            if spec.lambda() < 0.0 {
                return Err(Error::Config(msg));
            }
            warnings.push(msg);
        }
        if !spec.is_classical() && self.window < MIN_WINDOW {
            warnings.push(format!(
                "memory window of {} slices is shorter than {MIN_WINDOW} steps",
                self.window
            ));
        }
        Ok(warnings)
    }
}
