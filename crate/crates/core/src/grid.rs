//! Periodic box `[-L, L)^dim` sampled with `n` nodes per axis.
//!
//! Nodes sit at `x_j = -L + j h` with `h = 2L/n`, so the origin is the node
//! with index `n/2` on every axis. Fields are stored row-major with axis 0
//! varying slowest. Spectral coefficients use the usual FFT ordering: index
//! `j` carries wavenumber `π j / L` for `j < n/2` and `π (j - n) / L` above.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fft::Fft;

/// A point in `R^dim`, one coordinate per axis.
pub type Point = Vec<f64>;

#[derive(Debug, Clone)]
pub struct TorusGrid {
    dim: usize,
    half_width: f64,
    n: usize,
    spacing: f64,
    /// Wavenumbers in FFT order.
    freqs: Vec<f64>,
    fft: Fft,
}

impl TorusGrid {
    pub fn new(dim: usize, half_width: f64, points_per_axis: usize) -> Result<Arc<Self>> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if points_per_axis < 8 || points_per_axis % 2 != 0 {
            return Err(Error::InvalidPointCount(points_per_axis));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidHalfWidth(half_width));
        }
        let n = points_per_axis;
        let freqs = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                PI * m / half_width
            })
            .collect();
        Ok(Arc::new(Self {
            dim,
            half_width,
            n,
            spacing: 2.0 * half_width / n as f64,
            freqs,
            fft: Fft::new(n),
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Total node count `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Box volume `(2L)^dim`.
    pub fn volume(&self) -> f64 {
        (2.0 * self.half_width).powi(self.dim as i32)
    }

    pub(crate) fn fft(&self) -> &Fft {
        &self.fft
    }

    /// Wavenumber carried by FFT-ordered index `j` on any axis.
    pub fn axis_frequency(&self, j: usize) -> f64 {
        self.freqs[j]
    }

    /// The `n` axis wavenumbers `π j / L`, `j = -n/2 .. n/2 - 1`, ascending.
    pub fn frequency_table(&self) -> Vec<f64> {
        let n = self.n as isize;
        (-n / 2..n / 2)
            .map(|j| PI * j as f64 / self.half_width)
            .collect()
    }

    /// Coordinate of node index `j` on any axis.
    pub fn coordinate(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing
    }

    /// Per-axis indices of a flat index (unused trailing axes are 0).
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        let mut rem = flat;
        for a in (0..self.dim).rev() {
            idx[a] = rem % self.n;
            rem /= self.n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx[..self.dim].iter().fold(0, |acc, &i| acc * self.n + i)
    }

    /// Node coordinates of a flat index.
    pub fn node(&self, flat: usize) -> Point {
        let idx = self.multi_index(flat);
        (0..self.dim).map(|a| self.coordinate(idx[a])).collect()
    }

    /// `|ξ|²` of the mode stored at a flat spectral index.
    pub fn wavenumber_sq(&self, flat: usize) -> f64 {
        let idx = self.multi_index(flat);
        (0..self.dim).map(|a| self.freqs[idx[a]].powi(2)).sum()
    }

    /// Wavenumber tuple of a flat spectral index.
    pub fn wavenumber(&self, flat: usize) -> Point {
        let idx = self.multi_index(flat);
        (0..self.dim).map(|a| self.freqs[idx[a]]).collect()
    }

    /// Flat index of the node at the origin.
    pub fn origin_index(&self) -> usize {
        let idx = [self.n / 2; 3];
        self.flat_index(&idx)
    }

    /// Per-axis index of the node nearest to `x`, with periodic wrap.
    pub fn nearest_axis_index(&self, x: f64) -> usize {
        let j = ((x + self.half_width) / self.spacing).round() as i64;
        j.rem_euclid(self.n as i64) as usize
    }

    /// Flat index of the node nearest to `x` (periodic).
    pub fn nearest_node(&self, x: &[f64]) -> usize {
        let mut idx = [0usize; 3];
        for a in 0..self.dim {
            idx[a] = self.nearest_axis_index(x[a]);
        }
        self.flat_index(&idx)
    }

    /// Minimal-image displacement `x - c` on the torus, per axis.
    pub fn periodic_delta(&self, x: f64, c: f64) -> f64 {
        let period = 2.0 * self.half_width;
        let mut d = (x - c) % period;
        if d >= self.half_width {
            d -= period;
        } else if d < -self.half_width {
            d += period;
        }
        d
    }

    /// Periodic distance between the node `flat` and the point `c`.
    pub fn periodic_distance(&self, flat: usize, c: &[f64]) -> f64 {
        let idx = self.multi_index(flat);
        (0..self.dim)
            .map(|a| self.periodic_delta(self.coordinate(idx[a]), c[a]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Euclidean norm of the node coordinates, i.e. the distance to the
    /// origin inside the fundamental box.
    pub fn radius(&self, flat: usize) -> f64 {
        let idx = self.multi_index(flat);
        (0..self.dim)
            .map(|a| self.coordinate(idx[a]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Two grids describe the same discretisation.
    pub fn same_as(&self, other: &TorusGrid) -> bool {
        self.dim == other.dim && self.n == other.n && self.half_width == other.half_width
    }
}
