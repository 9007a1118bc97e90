//! Built-in control problems.

use clap::ValueEnum;
use mlhjb::hjb::{Boundary, ControlProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemName {
    /// Scalar LQ: ẋ = u, L = (x² + u²)/2 on [-2, 2], u ∈ {-3, -2.95, ..., 3}
    Lq1d,
    /// ẋ = u with |u| <= 1 (21 levels), L = x² + 0.01 u²
    Bounded1d,
    /// Undamped oscillator ẋ₁ = x₂, ẋ₂ = -x₁ + u, L = (x₁² + x₂² + u²)/2
    Osc2d,
    /// ẋ = 0, L = 1
    Static1d,
    /// ẋ = 0, L = 0
    Zero1d,
}

impl ProblemName {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemName::Lq1d => "lq1d",
            ProblemName::Bounded1d => "bounded1d",
            ProblemName::Osc2d => "osc2d",
            ProblemName::Static1d => "static1d",
            ProblemName::Zero1d => "zero1d",
        }
    }

    pub fn build(self, boundary: Boundary) -> ControlProblem {
        let problem = match self {
            ProblemName::Lq1d => ControlProblem::new(
                vec![(-2.0, 2.0)],
                levels(0.05, 121),
                |_x, u, _t| [u[0], 0.0],
                |x, u, _t| 0.5 * (x[0] * x[0] + u[0] * u[0]),
            ),
            ProblemName::Bounded1d => ControlProblem::new(
                vec![(-2.0, 2.0)],
                levels(0.1, 21),
                |_x, u, _t| [u[0], 0.0],
                |x, u, _t| x[0] * x[0] + 0.01 * u[0] * u[0],
            ),
            ProblemName::Osc2d => ControlProblem::new(
                vec![(-2.0, 2.0), (-2.0, 2.0)],
                levels(0.25, 17),
                |x, u, _t| [x[1], -x[0] + u[0]],
                |x, u, _t| 0.5 * (x[0] * x[0] + x[1] * x[1] + u[0] * u[0]),
            ),
            ProblemName::Static1d => {
                ControlProblem::new(vec![(-1.0, 1.0)], vec![vec![0.0]], |_x, _u, _t| [0.0, 0.0], |_, _, _| 1.0)
            }
            ProblemName::Zero1d => {
                ControlProblem::new(vec![(-1.0, 1.0)], vec![vec![0.0]], |_x, _u, _t| [0.0, 0.0], |_, _, _| 0.0)
            }
        };
        problem.expect("catalog problems are well formed").with_boundary(boundary)
    }

    pub fn default_x0(self) -> Vec<f64> {
        match self {
            ProblemName::Lq1d | ProblemName::Bounded1d => vec![1.0],
            ProblemName::Osc2d => vec![1.0, 0.0],
            ProblemName::Static1d | ProblemName::Zero1d => vec![0.0],
        }
    }

    /// `(a, b, q, r)` of `ẋ = a x + b u`, `L = (q x² + r u²)/2` when the
    /// problem is of that form.
    pub fn lq_coefficients(self) -> Option<(f64, f64, f64, f64)> {
        match self {
            ProblemName::Lq1d => Some((0.0, 1.0, 1.0, 1.0)),
            _ => None,
        }
    }
}

/// `count` (odd) scalar controls `k · step` for `k = -(count-1)/2 ..= (count-1)/2`.
fn levels(step: f64, count: usize) -> Vec<Vec<f64>> {
    let half = (count / 2) as i64;
    (-half..=half).map(|k| vec![k as f64 * step]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryName {
    Clamp,
    Extrapolate,
}

impl From<BoundaryName> for Boundary {
    fn from(b: BoundaryName) -> Self {
        match b {
            BoundaryName::Clamp => Boundary::ClampGradient,
            BoundaryName::Extrapolate => Boundary::ExtrapolateLinear,
        }
    }
}

macro_rules! from_str_via_value_enum {
    ($t:ty) => {
        impl std::str::FromStr for $t {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                <$t as ValueEnum>::from_str(s, true)
            }
        }
    };
}

from_str_via_value_enum!(ProblemName);
from_str_via_value_enum!(BoundaryName);
