//! Real nodal fields, their Fourier coefficients, multipliers and cell
//! quadrature.
//!
//! The transform is unitary: `F(ξ) = n^{-dim/2} Σ_x f(x) e^{-i ξ·(x + L)}`,
//! hence `h^dim Σ|f|² = h^dim Σ|F|²`. The unpaired Nyquist mode is kept and,
//! for real fields, is real.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fft::Direction;
use crate::grid::TorusGrid;

/// Imaginary residue above which an inverse transform is rejected.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

/// Real values at the grid nodes.
#[derive(Debug, Clone)]
pub struct RealField {
    grid: Arc<TorusGrid>,
    values: Vec<f64>,
}

/// Fourier coefficients in FFT order.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<TorusGrid>,
    coeffs: Vec<Complex64>,
}

impl RealField {
    pub fn new(grid: Arc<TorusGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue);
        }
        Ok(Self { grid, values })
    }

    /// Caller guarantees length and finiteness.
    pub(crate) fn from_raw(grid: Arc<TorusGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: &Arc<TorusGrid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Arc<TorusGrid>, c: f64) -> Self {
        Self::from_raw(grid.clone(), vec![c; grid.len()])
    }

    /// Evaluates `f` at every node.
    pub fn from_fn(grid: &Arc<TorusGrid>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.node(i))).collect();
        Self::new(grid.clone(), values)
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise `f(self, other)`; grids must agree.
    pub fn zip_map(&self, other: &RealField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self::from_raw(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &RealField) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RealField) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &RealField) -> Result<Self> {
        self.zip_map(other, |a, b| a * b)
    }

    /// Cyclic translation by whole cells: `result[i] = self[i - shift]`.
    pub fn translated(&self, shift: &[isize]) -> Self {
        let g = &self.grid;
        let n = g.points_per_axis() as isize;
        let mut out = vec![0.0; self.values.len()];
        for (flat, &v) in self.values.iter().enumerate() {
            let mut idx = g.multi_index(flat);
            for a in 0..g.dim() {
                idx[a] = (idx[a] as isize + shift[a]).rem_euclid(n) as usize;
            }
            out[g.flat_index(&idx)] = v;
        }
        Self::from_raw(g.clone(), out)
    }

    pub(crate) fn check_same_grid(&self, other: &RealField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

impl SpectralField {
    pub fn new(grid: Arc<TorusGrid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// `h^dim Σ |F|²`, equal to `inner_product(f, f)` by Parseval.
    pub fn weighted_norm_sqr(&self) -> f64 {
        self.grid.cell_volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Largest violation of `F(-ξ) = conj(F(ξ))`, relative to `max |F|`.
    pub fn hermitian_defect(&self) -> f64 {
        let g = &self.grid;
        let n = g.points_per_axis();
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for (flat, c) in self.coeffs.iter().enumerate() {
            let mut idx = g.multi_index(flat);
            for a in 0..g.dim() {
                idx[a] = (n - idx[a]) % n;
            }
            let mirror = self.coeffs[g.flat_index(&idx)];
            worst = worst.max((c - mirror.conj()).norm());
        }
        worst / scale
    }
}

/// Unitary n-dimensional transform, in place.
fn transform_in_place(grid: &TorusGrid, data: &mut [Complex64], dir: Direction) {
    let n = grid.points_per_axis();
    let dim = grid.dim();
    let fft = grid.fft();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            for chunk in data.chunks_exact_mut(n) {
                fft.process(chunk, dir);
            }
            continue;
        }
        let block = stride * n;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (j, l) in line.iter_mut().enumerate() {
                    *l = data[base + j * stride];
                }
                fft.process(&mut line, dir);
                for (j, l) in line.iter().enumerate() {
                    data[base + j * stride] = *l;
                }
            }
        }
    }
    let scale = 1.0 / (grid.len() as f64).sqrt();
    data.iter_mut().for_each(|z| *z *= scale);
}

pub fn forward_transform(f: &RealField) -> SpectralField {
    let mut coeffs: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform_in_place(&f.grid, &mut coeffs, Direction::Forward);
    SpectralField {
        grid: f.grid.clone(),
        coeffs,
    }
}

/// Inverse transform that drops the imaginary part and reports its size,
/// `max |Im| / max |z|` (0 for the zero spectrum).
pub fn inverse_transform_lossy(spec: &SpectralField) -> (RealField, f64) {
    let mut data = spec.coeffs.clone();
    transform_in_place(&spec.grid, &mut data, Direction::Inverse);
    let mut max_im = 0.0f64;
    let mut max_abs = 0.0f64;
    for z in &data {
        max_im = max_im.max(z.im.abs());
        max_abs = max_abs.max(z.norm());
    }
    let residue = if max_abs > 0.0 { max_im / max_abs } else { 0.0 };
    let values = data.iter().map(|z| z.re).collect();
    (RealField::from_raw(spec.grid.clone(), values), residue)
}

/// Inverse transform of a Hermitian-symmetric spectrum.
pub fn inverse_transform(spec: &SpectralField) -> Result<RealField> {
    let (field, residue) = inverse_transform_lossy(spec);
    if residue > SYMMETRY_TOLERANCE {
        return Err(Error::SymmetryViolation(residue));
    }
    if field.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue);
    }
    Ok(field)
}

/// A real symbol tabulated on the spectral grid, in FFT order.
#[derive(Debug, Clone)]
pub struct Multiplier {
    grid: Arc<TorusGrid>,
    values: Vec<f64>,
}

impl Multiplier {
    /// Tabulates `m` at every wavenumber tuple.
    pub fn from_fn(grid: &Arc<TorusGrid>, m: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..grid.len()).map(|i| m(&grid.wavenumber(i))).collect();
        Self::from_values(grid, values)
    }

    /// Tabulates a radial symbol given as a function of `|ξ|²`.
    pub fn from_radial_sq(grid: &Arc<TorusGrid>, m: impl Fn(f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..grid.len()).map(|i| m(grid.wavenumber_sq(i))).collect();
        Self::from_values(grid, values)
    }

    pub fn from_values(grid: &Arc<TorusGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteMultiplier);
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Pointwise product of two symbols.
    pub fn compose(&self, other: &Multiplier) -> Result<Multiplier> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn apply_spectral(&self, spec: &mut SpectralField) -> Result<()> {
        if !self.grid.same_as(&spec.grid) {
            return Err(Error::GridMismatch);
        }
        for (c, m) in spec.coeffs.iter_mut().zip(&self.values) {
            *c *= *m;
        }
        Ok(())
    }

    /// `inverse_transform(m · forward_transform(f))`. The imaginary residue
    /// is judged against `max |f| · max |m|` rather than the output, which
    /// may cancel down to roundoff.
    pub fn apply(&self, f: &RealField) -> Result<RealField> {
        let mut spec = forward_transform(f);
        self.apply_spectral(&mut spec)?;
        let (out, residue) = inverse_transform_lossy(&spec);
        let scale = f.max_abs() * self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale > 0.0 && residue * out.max_abs() > SYMMETRY_TOLERANCE * scale {
            return Err(Error::SymmetryViolation(residue * out.max_abs() / scale));
        }
        if out.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue);
        }
        Ok(out)
    }
}

/// Applies the symbol `m(ξ)` to `f`.
pub fn apply_multiplier(f: &RealField, m: impl Fn(&[f64]) -> f64) -> Result<RealField> {
    Multiplier::from_fn(f.grid(), m)?.apply(f)
}

/// Cell quadrature `(h^dim Σ |f|^q)^{1/q}`; `q = ∞` gives the max norm.
pub fn lq_norm(f: &RealField, q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::InvalidNormExponent(q));
    }
    if q.is_infinite() {
        return Ok(f.max_abs());
    }
    Ok(lq_integral(f, q).powf(1.0 / q))
}

/// `h^dim Σ |f|^q` without the final root.
pub fn lq_integral(f: &RealField, q: f64) -> f64 {
    let cell = f.grid.cell_volume();
    let sum: f64 = if q == 2.0 {
        f.values.iter().map(|v| v * v).sum()
    } else {
        f.values.iter().map(|v| v.abs().powf(q)).sum()
    };
    cell * sum
}

/// `h^dim Σ f g`.
pub fn inner_product(f: &RealField, g: &RealField) -> Result<f64> {
    f.check_same_grid(g)?;
    let sum: f64 = f.values.iter().zip(&g.values).map(|(a, b)| a * b).sum();
    Ok(f.grid.cell_volume() * sum)
}
