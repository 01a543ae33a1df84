//! The real part `R^s` of the fractional Helmholtz resolvent in the rescaled
//! frame, realised by the symmetric limiting-absorption symbol
//!
//! ```text
//! m_δ(ξ) = (|ξ|^{2s} - 1) / ((|ξ|^{2s} - 1)² + δ²)
//! ```
//!
//! together with its convolution kernel, the split of that kernel into an
//! annular band part and a remainder, and the measurements used to check
//! their decay and the interaction of disjointly supported functions.

use alloc::collections::BTreeSet;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::spectral::{
    forward_transform, inner_product, lq_norm, Multiplier, RealField,
};
use crate::util::{ls_slope, signed_pow, smoothstep};

/// Distance to the sphere `|ξ|^{2s} = 1` below which `δ = 0` is refused.
pub const SINGULAR_TOLERANCE: f64 = 1e-12;

/// Absolute tolerance for "zero outside the declared support".
pub const SUPPORT_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventSpec {
    /// Fractional order.
    pub s: f64,
    /// Absorption regularisation, `δ ≥ 0`.
    pub delta: f64,
}

impl ResolventSpec {
    pub fn new(s: f64, delta: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParameter("s must be positive"));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::InvalidParameter("delta must be finite and non-negative"));
        }
        Ok(Self { s, delta })
    }

    /// `δ = 4 × (mean gap between the distinct grid values of |ξ|^{2s}
    /// in [0.75, 1.25])`. When the window holds fewer than two values the
    /// gap straddling 1 is used instead.
    pub fn auto(s: f64, grid: &TorusGrid) -> Result<Self> {
        Self::new(s, 4.0 * symbol_spacing(s, grid))
    }

    /// The symbol as a function of `|ξ|²`.
    #[inline]
    pub fn symbol(&self, xi_sq: f64) -> f64 {
        let a = xi_sq.powf(self.s) - 1.0;
        if self.delta == 0.0 {
            1.0 / a
        } else {
            a / (a * a + self.delta * self.delta)
        }
    }

    /// The symbol tabulated on `grid`.
    pub fn multiplier(&self, grid: &Arc<TorusGrid>) -> Result<Multiplier> {
        if self.delta == 0.0 {
            let singular = (0..grid.len())
                .any(|i| (grid.wavenumber_sq(i).powf(self.s) - 1.0).abs() < SINGULAR_TOLERANCE);
            if singular {
                return Err(Error::SingularMode);
            }
        }
        Multiplier::from_radial_sq(grid, |q| self.symbol(q))
    }

    /// `max(m_δ, 0)`, the part of the symbol that feeds `U+`.
    pub fn positive_part(&self, grid: &Arc<TorusGrid>) -> Result<Multiplier> {
        let m = self.multiplier(grid)?;
        let vals = m.values().iter().map(|v| v.max(0.0)).collect();
        Multiplier::from_values(grid, vals)
    }
}

fn symbol_spacing(s: f64, grid: &TorusGrid) -> f64 {
    // |ξ|² = (π/L)² S with integer S, so distinct values of S are distinct
    // symbol arguments
    let n = grid.points_per_axis();
    let half = (n / 2) as i64;
    let mut sums = BTreeSet::new();
    for flat in 0..grid.len() {
        let idx = grid.multi_index(flat);
        let sq: i64 = (0..grid.dim())
            .map(|a| {
                let j = idx[a] as i64;
                let m = if j < half { j } else { j - n as i64 };
                m * m
            })
            .sum();
        sums.insert(sq);
    }
    let unit = (core::f64::consts::PI / grid.half_width()).powi(2);
    let values: Vec<f64> = sums.iter().map(|&q| (unit * q as f64).powf(s)).collect();
    let window: Vec<f64> = values
        .iter()
        .copied()
        .filter(|v| (0.75..=1.25).contains(v))
        .collect();
    if window.len() >= 2 {
        return (window[window.len() - 1] - window[0]) / (window.len() - 1) as f64;
    }
    let below = values.iter().copied().filter(|&v| v <= 1.0).fold(0.0, f64::max);
    let above = values
        .iter()
        .copied()
        .filter(|&v| v > 1.0)
        .fold(f64::INFINITY, f64::min);
    if above.is_finite() {
        above - below
    } else {
        1.0 - below
    }
}

/// `R^s v`.
pub fn real_resolvent(v: &RealField, spec: &ResolventSpec) -> Result<RealField> {
    spec.multiplier(v.grid())?.apply(v)
}

/// Unit point mass at the origin node (value `1/h^dim`).
pub fn discrete_delta(grid: &Arc<TorusGrid>) -> RealField {
    let mut vals = vec![0.0; grid.len()];
    vals[grid.origin_index()] = 1.0 / grid.cell_volume();
    RealField::from_raw(grid.clone(), vals)
}

/// The convolution kernel of an arbitrary symbol, centred at the origin.
pub fn kernel_of(m: &Multiplier) -> Result<RealField> {
    m.apply(&discrete_delta(m.grid()))
}

/// Kernel `K` of `R^s`, centred at the origin node.
pub fn extract_kernel(spec: &ResolventSpec, grid: &Arc<TorusGrid>) -> Result<RealField> {
    kernel_of(&spec.multiplier(grid)?)
}

/// Radial bump `ψ̂` equal to 1 for `||ξ| - 1| ≤ plateau_halfwidth` and to 0
/// for `||ξ| - 1| ≥ support_halfwidth`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandCutoff {
    pub plateau_halfwidth: f64,
    pub support_halfwidth: f64,
}

impl Default for BandCutoff {
    fn default() -> Self {
        Self {
            plateau_halfwidth: 1.0 / 6.0,
            support_halfwidth: 0.25,
        }
    }
}

impl BandCutoff {
    pub fn new(plateau_halfwidth: f64, support_halfwidth: f64) -> Result<Self> {
        if !(plateau_halfwidth >= 0.0 && support_halfwidth > plateau_halfwidth) {
            return Err(Error::InvalidParameter("band cutoff needs 0 <= plateau < support"));
        }
        Ok(Self {
            plateau_halfwidth,
            support_halfwidth,
        })
    }

    pub fn profile(&self, abs_xi: f64) -> f64 {
        let d = (abs_xi - 1.0).abs();
        let t = (d - self.plateau_halfwidth) / (self.support_halfwidth - self.plateau_halfwidth);
        1.0 - smoothstep(t)
    }

    pub fn multiplier(&self, grid: &Arc<TorusGrid>) -> Result<Multiplier> {
        Multiplier::from_radial_sq(grid, |q| self.profile(q.sqrt()))
    }
}

/// `K = K1 + K2` with `K1` the band part.
#[derive(Debug, Clone)]
pub struct KernelBundle {
    pub full: RealField,
    pub band: RealField,
    pub remainder: RealField,
}

impl KernelBundle {
    pub fn grid(&self) -> &Arc<TorusGrid> {
        self.full.grid()
    }
}

pub fn band_decompose(kernel: &RealField, cutoff: &BandCutoff) -> Result<KernelBundle> {
    band_decompose_with(kernel, &cutoff.multiplier(kernel.grid())?)
}

/// Band split with an arbitrary tabulated profile.
pub fn band_decompose_with(kernel: &RealField, profile: &Multiplier) -> Result<KernelBundle> {
    let band = profile.apply(kernel)?;
    let remainder = kernel.sub(&band)?;
    Ok(KernelBundle {
        full: kernel.clone(),
        band,
        remainder,
    })
}

/// Maximum of `|f|` over shells `(iL/S, (i+1)L/S]` around the origin, one
/// `(shell centre radius, max)` pair per shell. The origin node belongs to
/// the first shell; nodes beyond `L` (box corners) are ignored and empty
/// shells report 0.
pub fn radial_envelope(f: &RealField, shell_count: usize) -> Result<Vec<(f64, f64)>> {
    if shell_count < 4 {
        return Err(Error::InvalidParameter("need at least 4 shells"));
    }
    let grid = f.grid();
    let l = grid.half_width();
    let width = l / shell_count as f64;
    let mut maxima = vec![0.0f64; shell_count];
    for (flat, v) in f.values().iter().enumerate() {
        let r = grid.radius(flat);
        if r > l {
            continue;
        }
        let shell = if r == 0.0 {
            0
        } else {
            ((r / width).ceil() as usize).saturating_sub(1).min(shell_count - 1)
        };
        maxima[shell] = maxima[shell].max(v.abs());
    }
    Ok(maxima
        .into_iter()
        .enumerate()
        .map(|(i, m)| ((i as f64 + 0.5) * width, m))
        .collect())
}

/// Least-squares slope of `log value` against `log radius` over the shells
/// whose radius lies in `[r_min, r_max]` and whose value is positive.
pub fn fit_decay_exponent(envelope: &[(f64, f64)], window: (f64, f64)) -> Result<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = envelope
        .iter()
        .filter(|(r, v)| *r >= window.0 && *r <= window.1 && *v > 0.0 && *r > 0.0)
        .map(|(r, v)| (r.ln(), v.ln()))
        .unzip();
    if xs.len() < 5 {
        return Err(Error::InsufficientData(xs.len()));
    }
    Ok(ls_slope(&xs, &ys))
}

fn check_support(f: &RealField, outside: impl Fn(f64) -> bool) -> Result<()> {
    let grid = f.grid();
    let bad = f
        .values()
        .iter()
        .enumerate()
        .any(|(i, v)| v.abs() > SUPPORT_TOLERANCE && outside(grid.radius(i)));
    if bad {
        Err(Error::SupportOverlap)
    } else {
        Ok(())
    }
}

/// `|⟨u, R^s v⟩|` for `u` supported in the ball `B_R` and `v` supported
/// outside `B_{R+r}` (both balls centred at the origin).
pub fn disjoint_interaction(
    u: &RealField,
    v: &RealField,
    spec: &ResolventSpec,
    inner_radius: f64,
    gap: f64,
) -> Result<f64> {
    if !(gap >= 1.0) {
        return Err(Error::InvalidParameter("gap must be at least 1"));
    }
    u.check_same_grid(v)?;
    check_support(u, |r| r >= inner_radius)?;
    check_support(v, |r| r < inner_radius + gap)?;
    if v.is_zero() || u.is_zero() {
        return Ok(0.0);
    }
    Ok(inner_product(u, &real_resolvent(v, spec)?)?.abs())
}

/// The partner `v = 1_{|x| ≥ ρ} |R^s u|^{p-2} R^s u` that attains the Hölder
/// bound `|⟨v, R^s u⟩| ≤ ‖v‖_{p'} ‖R^s u‖_{L^p(|x| ≥ ρ)}`.
pub fn extremal_partner(
    u: &RealField,
    spec: &ResolventSpec,
    p: f64,
    outer_radius: f64,
) -> Result<RealField> {
    let w = real_resolvent(u, spec)?;
    let grid = w.grid().clone();
    let vals = w
        .values()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if grid.radius(i) >= outer_radius {
                signed_pow(x, p)
            } else {
                0.0
            }
        })
        .collect();
    RealField::new(grid, vals)
}

/// One gap of an interaction decay measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionSample {
    pub gap: f64,
    pub interaction: f64,
    pub u_norm: f64,
    pub v_norm: f64,
    /// `interaction / (‖u‖_{p'} ‖v‖_{p'})`.
    pub normalized: f64,
}

/// Measures the normalised interaction between `u` (supported in `B_R`)
/// and its extremal partner outside `B_{R+r}` for each gap `r`.
pub fn interaction_decay(
    u: &RealField,
    spec: &ResolventSpec,
    p: f64,
    inner_radius: f64,
    gaps: &[f64],
) -> Result<Vec<InteractionSample>> {
    let p_dual = p / (p - 1.0);
    let u_norm = lq_norm(u, p_dual)?;
    gaps.iter()
        .map(|&gap| {
            let v = extremal_partner(u, spec, p, inner_radius + gap)?;
            let interaction = disjoint_interaction(u, &v, spec, inner_radius, gap)?;
            let v_norm = lq_norm(&v, p_dual)?;
            let normalized = if v_norm > 0.0 && u_norm > 0.0 {
                interaction / (u_norm * v_norm)
            } else {
                0.0
            };
            Ok(InteractionSample {
                gap,
                interaction,
                u_norm,
                v_norm,
                normalized,
            })
        })
        .collect()
}

/// Log-log slope of the normalised interaction against the gap.
pub fn interaction_slope(samples: &[InteractionSample]) -> Result<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .filter(|s| s.normalized > 0.0)
        .map(|s| (s.gap.ln(), s.normalized.ln()))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::InsufficientData(xs.len()));
    }
    Ok(ls_slope(&xs, &ys))
}

/// Largest `|F(ξ)|` over modes with `||ξ| - 1| ≥ outside`, relative to the
/// largest coefficient overall.
pub fn spectral_leakage(f: &RealField, outside: f64) -> f64 {
    let spec = forward_transform(f);
    let grid = f.grid();
    let total = spec.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
    if total == 0.0 {
        return 0.0;
    }
    let leak = spec
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(i, _)| (grid.wavenumber_sq(*i).sqrt() - 1.0).abs() >= outside)
        .fold(0.0f64, |m, (_, c)| m.max(c.norm()));
    leak / total
}

/// Smooth radial bump `(1 - |x|²/R²)²` on `B_R`, zero outside.
pub fn radial_bump(grid: &Arc<TorusGrid>, radius: f64) -> RealField {
    let vals = (0..grid.len())
        .map(|i| {
            let r = grid.radius(i);
            if r < radius {
                let t = 1.0 - (r / radius).powi(2);
                t * t
            } else {
                0.0
            }
        })
        .collect();
    RealField::from_raw(grid.clone(), vals)
}
