use crate::error::{Error, Result};

pub const MAX_DIM: usize = 2;

/// How values are continued outside the state box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Clamp the query point to the box (zero normal gradient outside).
    ClampGradient,
    /// Extend the boundary cell's linear interpolant.
    ExtrapolateLinear,
}

/// Uniform rectangular grid with `n` points per dimension, first dimension
/// fastest in the flat node ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    lo: [f64; MAX_DIM],
    hi: [f64; MAX_DIM],
    n: usize,
    h: [f64; MAX_DIM],
    boundary: Boundary,
}

impl Grid {
    pub fn new(state_box: &[(f64, f64)], n: usize, boundary: Boundary) -> Result<Self> {
        let dim = state_box.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Config(format!("state dimension must be 1 or 2, got {dim}")));
        }
        if n < 2 {
            return Err(Error::Config(format!("need at least 2 grid points per dimension, got {n}")));
        }
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        let mut h = [0.0; MAX_DIM];
        for (d, &(l, u)) in state_box.iter().enumerate() {
            if !(l < u && l.is_finite() && u.is_finite()) {
                return Err(Error::Config(format!("state box dimension {d} must have lo < hi, got [{l}, {u}]")));
            }
            lo[d] = l;
            hi[d] = u;
            h[d] = (u - l) / (n - 1) as f64;
        }
        Ok(Grid {
            dim,
            lo,
            hi,
            n,
            h,
            boundary,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_dim(&self) -> usize {
        self.n
    }

    pub fn spacing(&self, d: usize) -> f64 {
        self.h[d]
    }

    pub fn lo(&self, d: usize) -> f64 {
        self.lo[d]
    }

    pub fn hi(&self, d: usize) -> f64 {
        self.hi[d]
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-dimension indices of a flat node index.
    pub fn indices(&self, flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        let mut rem = flat;
        for slot in idx.iter_mut().take(self.dim) {
            *slot = rem % self.n;
            rem /= self.n;
        }
        idx
    }

    pub fn flat(&self, idx: [usize; MAX_DIM]) -> usize {
        let mut flat = 0;
        for d in (0..self.dim).rev() {
            flat = flat * self.n + idx[d];
        }
        flat
    }

    pub fn node(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.indices(flat);
        let mut x = [0.0; MAX_DIM];
        for d in 0..self.dim {
            x[d] = self.coord(d, idx[d]);
        }
        x
    }

    pub fn coord(&self, d: usize, i: usize) -> f64 {
        // hit the upper end exactly
        if i + 1 == self.n {
            self.hi[d]
        } else {
            self.lo[d] + i as f64 * self.h[d]
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (0..self.dim).all(|d| x[d] >= self.lo[d] && x[d] <= self.hi[d])
    }

    /// Flat index of the node nearest to `x` (clamped into the box).
    pub fn nearest(&self, x: &[f64]) -> usize {
        let mut idx = [0; MAX_DIM];
        for d in 0..self.dim {
            let s = ((x[d] - self.lo[d]) / self.h[d]).round();
            idx[d] = s.clamp(0.0, (self.n - 1) as f64) as usize;
        }
        self.flat(idx)
    }

    /// Cell index and local coordinate along one dimension.
    fn locate(&self, d: usize, x: f64) -> (usize, f64) {
        let s = (x - self.lo[d]) / self.h[d];
        let cell = s.floor().clamp(0.0, (self.n - 2) as f64);
        let theta = s - cell;
        let theta = match self.boundary {
            Boundary::ClampGradient => theta.clamp(0.0, 1.0),
            Boundary::ExtrapolateLinear => theta,
        };
        (cell as usize, theta)
    }

    /// Multilinear interpolation of nodal `values` at `x`.
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        match self.dim {
            1 => {
                let (i, t) = self.locate(0, x[0]);
                values[i] + t * (values[i + 1] - values[i])
            }
            _ => {
                let (i, tx) = self.locate(0, x[0]);
                let (j, ty) = self.locate(1, x[1]);
                let n = self.n;
                let v00 = values[i + n * j];
                let v10 = values[i + 1 + n * j];
                let v01 = values[i + n * (j + 1)];
                let v11 = values[i + 1 + n * (j + 1)];
                let a = v00 + tx * (v10 - v00);
                let b = v01 + tx * (v11 - v01);
                a + ty * (b - a)
            }
        }
    }

    /// Finite-difference gradient at a node: central inside, one-sided on
    /// the box faces.
    pub fn gradient(&self, values: &[f64], flat: usize) -> [f64; MAX_DIM] {
        let idx = self.indices(flat);
        let mut g = [0.0; MAX_DIM];
        for d in 0..self.dim {
            let mut lo = idx;
            let mut hi = idx;
            if idx[d] > 0 {
                lo[d] -= 1;
            }
            if idx[d] + 1 < self.n {
                hi[d] += 1;
            }
            let span = (hi[d] - lo[d]) as f64 * self.h[d];
            g[d] = (values[self.flat(hi)] - values[self.flat(lo)]) / span;
        }
        g
    }
}
