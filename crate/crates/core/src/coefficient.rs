//! Coefficient families `Q` with their supremum `Q0`, limit at infinity
//! `Q∞` and maximum set `M`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{Point, TorusGrid};
use crate::spectral::RealField;

#[derive(Debug, Clone)]
pub enum QFamily {
    Constant(f64),
    /// `q_inf + amplitude · Σ_c exp(-|x - c|² / (2 width²))`.
    BumpOnBackground {
        q_inf: f64,
        amplitude: f64,
        centers: Vec<Point>,
        width: f64,
    },
    /// Nodal samples of `Q` on their own grid, evaluated off-grid by
    /// multilinear interpolation and by `q_inf` outside the sampled box.
    Sampled {
        values: RealField,
        q0: f64,
        q_inf: f64,
    },
}

#[derive(Debug, Clone)]
pub struct CoefficientQ {
    family: QFamily,
    q0: f64,
    q_inf: f64,
    maxima: Vec<Point>,
}

impl CoefficientQ {
    pub fn constant(q0: f64) -> Result<Self> {
        if !(q0.is_finite() && q0 >= 0.0) {
            return Err(Error::NegativeCoefficient);
        }
        Ok(Self {
            family: QFamily::Constant(q0),
            q0,
            q_inf: q0,
            maxima: Vec::new(),
        })
    }

    pub fn bump(q_inf: f64, amplitude: f64, centers: Vec<Point>, width: f64) -> Result<Self> {
        if !(q_inf.is_finite() && q_inf >= 0.0) {
            return Err(Error::NegativeCoefficient);
        }
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::InvalidParameter("bump amplitude must be positive"));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidParameter("bump width must be positive"));
        }
        if centers.is_empty() {
            return Err(Error::InvalidParameter("bump needs at least one center"));
        }
        let dim = centers[0].len();
        if dim == 0 || centers.iter().any(|c| c.len() != dim) {
            return Err(Error::InvalidParameter("bump centers must share one dimension"));
        }
        let mut q = Self {
            family: QFamily::BumpOnBackground {
                q_inf,
                amplitude,
                centers: centers.clone(),
                width,
            },
            q0: 0.0,
            q_inf,
            maxima: Vec::new(),
        };
        // each center is taken as a local maximum; with overlapping bumps
        // the sup is approximated by the best center
        let values: Vec<f64> = centers.iter().map(|c| q.eval(c)).collect();
        let q0 = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        q.q0 = q0;
        q.maxima = centers
            .into_iter()
            .zip(values)
            .filter(|(_, v)| (q0 - v).abs() <= 1e-12 * q0.max(1.0))
            .map(|(c, _)| c)
            .collect();
        Ok(q)
    }

    pub fn sampled(values: RealField, q0: f64, q_inf: f64) -> Result<Self> {
        if values.values().iter().any(|&v| v < 0.0) || q_inf < 0.0 {
            return Err(Error::NegativeCoefficient);
        }
        if !(q_inf < q0) {
            return Err(Error::InvalidParameter("sampled Q needs q_inf < q0"));
        }
        let top = values.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let grid = values.grid().clone();
        let maxima = values
            .values()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == top)
            .map(|(i, _)| grid.node(i))
            .collect();
        Ok(Self {
            family: QFamily::Sampled { values, q0, q_inf },
            q0,
            q_inf,
            maxima,
        })
    }

    pub fn family(&self) -> &QFamily {
        &self.family
    }

    /// `sup Q`.
    pub fn q0(&self) -> f64 {
        self.q0
    }

    /// `limsup_{|x|→∞} Q`.
    pub fn q_inf(&self) -> f64 {
        self.q_inf
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.family, QFamily::Constant(_))
    }

    /// Points of `M`. A constant attains its maximum everywhere; the origin
    /// of the given dimension stands in for that.
    pub fn maxima(&self, dim: usize) -> Vec<Point> {
        if self.is_constant() {
            vec![vec![0.0; dim]]
        } else {
            self.maxima.clone()
        }
    }

    /// `Q(x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.family {
            QFamily::Constant(q) => *q,
            QFamily::BumpOnBackground {
                q_inf,
                amplitude,
                centers,
                width,
            } => {
                let s2 = 2.0 * width * width;
                let sum: f64 = centers
                    .iter()
                    .map(|c| {
                        let r2: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                        (-r2 / s2).exp()
                    })
                    .sum();
                q_inf + amplitude * sum
            }
            QFamily::Sampled { values, q_inf, .. } => interpolate(values, x).unwrap_or(*q_inf),
        }
    }

    /// `Q_ε(x) = Q(εx)` at every node of `grid`.
    pub fn sample(&self, grid: &Arc<TorusGrid>, eps: f64) -> Result<RealField> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidParameter("eps must be positive"));
        }
        let field = RealField::from_fn(grid, |x| {
            let y: Point = x.iter().map(|v| eps * v).collect();
            self.eval(&y)
        })?;
        if field.values().iter().any(|&v| v < 0.0) {
            return Err(Error::NegativeCoefficient);
        }
        Ok(field)
    }

    /// Whether every rescaled maximum `y/ε` lies inside the box.
    pub fn maxima_in_box(&self, grid: &TorusGrid, eps: f64) -> bool {
        let l = grid.half_width();
        self.maxima(grid.dim())
            .iter()
            .all(|y| y.iter().all(|&c| (c / eps) >= -l && (c / eps) < l))
    }
}

/// Multilinear interpolation of nodal samples; `None` outside the box.
fn interpolate(values: &RealField, x: &[f64]) -> Option<f64> {
    let grid = values.grid();
    let dim = grid.dim();
    if x.len() < dim {
        return None;
    }
    let n = grid.points_per_axis();
    let h = grid.spacing();
    let mut base = [0usize; 3];
    let mut frac = [0.0f64; 3];
    for a in 0..dim {
        let t = (x[a] + grid.half_width()) / h;
        if !(t >= 0.0 && t <= (n - 1) as f64) {
            return None;
        }
        let i = (t.floor() as usize).min(n - 2);
        base[a] = i;
        frac[a] = t - i as f64;
    }
    let mut acc = 0.0;
    for corner in 0..(1usize << dim) {
        let mut idx = [0usize; 3];
        let mut w = 1.0;
        for a in 0..dim {
            let up = (corner >> a) & 1 == 1;
            idx[a] = base[a] + up as usize;
            w *= if up { frac[a] } else { 1.0 - frac[a] };
        }
        if w != 0.0 {
            acc += w * values.values()[grid.flat_index(&idx)];
        }
    }
    Some(acc)
}
