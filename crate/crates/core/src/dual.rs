//! The dual energy `J_ε`, its gradient and the Nehari projection.
//!
//! With `q = Q_ε^{1/p}` and `A v = q · R^s(q v)`:
//!
//! ```text
//! J(v)  = 1/p' ∫|v|^{p'} - 1/2 ⟨v, A v⟩
//! J'(v) = |v|^{p'-2} v - A v
//! ```
//!
//! On the ray `t ↦ t v` the energy is `t^{p'}/p' · a - t²/2 · b`, which has
//! a unique interior maximum iff `b > 0` (the set `U+`).

use alloc::sync::Arc;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::grid::TorusGrid;
use crate::resolvent::ResolventSpec;
use crate::spectral::{inner_product, lq_integral, lq_norm, Multiplier, RealField};
use crate::util::signed_pow;

/// `J_ε` for one sampled coefficient, with `Q^{1/p}` and the symbol
/// tabulated once.
#[derive(Debug, Clone)]
pub struct DualFunctional {
    qroot: RealField,
    exps: Exponents,
    spec: ResolventSpec,
    symbol: Multiplier,
}

/// A dual variable together with its energy diagnostics.
#[derive(Debug, Clone)]
pub struct DualState {
    pub v: RealField,
    pub energy: f64,
    /// `J'(v)[v] = ∫|v|^{p'} - ⟨v, A v⟩`.
    pub nehari_residual: f64,
    /// `‖J'(v)‖_p`.
    pub gradient_norm: f64,
    pub quad_form: f64,
    pub on_nehari: bool,
}

impl DualFunctional {
    pub fn new(qfield: &RealField, exps: &Exponents, spec: &ResolventSpec) -> Result<Self> {
        if qfield.grid().dim() != exps.dim {
            return Err(Error::UnsupportedDimension(qfield.grid().dim()));
        }
        if qfield.values().iter().any(|&q| q < 0.0) {
            return Err(Error::NegativeCoefficient);
        }
        let inv_p = 1.0 / exps.p;
        let qroot = qfield.map(|q| q.powf(inv_p));
        let symbol = spec.multiplier(qfield.grid())?;
        Ok(Self {
            qroot,
            exps: *exps,
            spec: *spec,
            symbol,
        })
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        self.qroot.grid()
    }

    pub fn exponents(&self) -> &Exponents {
        &self.exps
    }

    pub fn spec(&self) -> &ResolventSpec {
        &self.spec
    }

    /// `Q_ε^{1/p}` at the nodes.
    pub fn qroot(&self) -> &RealField {
        &self.qroot
    }

    /// `R^s(q v)`, the rescaled solution profile belonging to `v`.
    pub fn profile(&self, v: &RealField) -> Result<RealField> {
        self.symbol.apply(&v.mul(&self.qroot)?)
    }

    /// `A v = q · R^s(q v)`.
    pub fn apply(&self, v: &RealField) -> Result<RealField> {
        self.profile(v)?.mul(&self.qroot)
    }

    /// `⟨v, A v⟩`.
    pub fn quad_form(&self, v: &RealField) -> Result<f64> {
        let av = self.apply(v)?;
        inner_product(v, &av)
    }

    pub fn energy(&self, v: &RealField) -> Result<f64> {
        let b = self.quad_form(v)?;
        let pd = self.exps.p_dual;
        Ok(lq_integral(v, pd) / pd - 0.5 * b)
    }

    pub fn gradient(&self, v: &RealField) -> Result<RealField> {
        let av = self.apply(v)?;
        self.gradient_from(v, &av)
    }

    fn gradient_from(&self, v: &RealField, av: &RealField) -> Result<RealField> {
        let pd = self.exps.p_dual;
        v.zip_map(av, |a, b| signed_pow(a, pd) - b)
    }

    /// `t_v = (∫|v|^{p'} / ⟨v, A v⟩)^{1/(2-p')}`.
    pub fn nehari_scale(&self, v: &RealField) -> Result<f64> {
        let a = lq_integral(v, self.exps.p_dual);
        if a == 0.0 {
            return Err(Error::ZeroField);
        }
        let b = self.quad_form(v)?;
        scale_from(a, b, self.exps.p_dual)
    }

    /// `t_v v` with its diagnostics; the state is flagged on-Nehari.
    pub fn nehari_project(&self, v: &RealField) -> Result<DualState> {
        let a = lq_integral(v, self.exps.p_dual);
        if a == 0.0 {
            return Err(Error::ZeroField);
        }
        let av = self.apply(v)?;
        let b = inner_product(v, &av)?;
        let t = scale_from(a, b, self.exps.p_dual)?;
        let v = v.scaled(t);
        let av = av.scaled(t);
        let mut state = self.state_from(v, &av)?;
        state.on_nehari = true;
        Ok(state)
    }

    /// Diagnostics of `v` as it stands (not flagged on-Nehari).
    pub fn state(&self, v: &RealField) -> Result<DualState> {
        let av = self.apply(v)?;
        self.state_from(v.clone(), &av)
    }

    pub(crate) fn state_from(&self, v: RealField, av: &RealField) -> Result<DualState> {
        let pd = self.exps.p_dual;
        let a = lq_integral(&v, pd);
        let b = inner_product(&v, av)?;
        let g = self.gradient_from(&v, av)?;
        let gradient_norm = lq_norm(&g, self.exps.p)?;
        let energy = a / pd - 0.5 * b;
        let nehari_residual = a - b;
        if !(energy.is_finite() && nehari_residual.is_finite()) {
            return Err(Error::NonFiniteValue);
        }
        Ok(DualState {
            v,
            energy,
            nehari_residual,
            gradient_norm,
            quad_form: b,
            on_nehari: false,
        })
    }
}

fn scale_from(a: f64, b: f64, pd: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::NotInUPlus(b));
    }
    Ok((a / b).powf(1.0 / (2.0 - pd)))
}

pub fn dual_energy(
    v: &RealField,
    qfield: &RealField,
    exps: &Exponents,
    spec: &ResolventSpec,
) -> Result<f64> {
    v.check_same_grid(qfield)?;
    DualFunctional::new(qfield, exps, spec)?.energy(v)
}

pub fn dual_gradient(
    v: &RealField,
    qfield: &RealField,
    exps: &Exponents,
    spec: &ResolventSpec,
) -> Result<RealField> {
    v.check_same_grid(qfield)?;
    DualFunctional::new(qfield, exps, spec)?.gradient(v)
}

/// `⟨q v, R^s(q v)⟩` with `q = Q^{1/p}`.
pub fn quad_form(
    v: &RealField,
    qfield: &RealField,
    exps: &Exponents,
    spec: &ResolventSpec,
) -> Result<f64> {
    v.check_same_grid(qfield)?;
    DualFunctional::new(qfield, exps, spec)?.quad_form(v)
}

pub fn nehari_scale(
    v: &RealField,
    qfield: &RealField,
    exps: &Exponents,
    spec: &ResolventSpec,
) -> Result<f64> {
    v.check_same_grid(qfield)?;
    DualFunctional::new(qfield, exps, spec)?.nehari_scale(v)
}

pub fn nehari_project(
    v: &RealField,
    qfield: &RealField,
    exps: &Exponents,
    spec: &ResolventSpec,
) -> Result<DualState> {
    v.check_same_grid(qfield)?;
    DualFunctional::new(qfield, exps, spec)?.nehari_project(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn setup(dim: usize, l: f64, n: usize, delta: f64) -> (Arc<TorusGrid>, Exponents, ResolventSpec) {
        let g = TorusGrid::new(dim, l, n).unwrap();
        let e = Exponents::new(dim, 1.0, 5.0, 1.0).unwrap();
        let s = ResolventSpec::new(1.0, delta).unwrap();
        (g, e, s)
    }

    #[test]
    fn zero_field() {
        let (g, e, s) = setup(2, 8.0, 16, 0.3);
        let f = DualFunctional::new(&RealField::constant(&g, 1.0), &e, &s).unwrap();
        let z = RealField::zeros(&g);
        assert_eq!(f.energy(&z).unwrap(), 0.0);
        assert!(f.gradient(&z).unwrap().is_zero());
        assert_eq!(f.quad_form(&z).unwrap(), 0.0);
        assert_eq!(f.nehari_scale(&z).unwrap_err(), Error::ZeroField);
    }

    #[test]
    fn cosine_mode_quad_form() {
        // |ξ| = √2 on a 1D box of half width 3π/√2: mode index 3
        let l = 3.0 * PI / 2f64.sqrt();
        let (g, mut e, s) = setup(1, l, 32, 0.0);
        e.dim = 1;
        let v = RealField::from_fn(&g, |x| (2f64.sqrt() * x[0]).cos()).unwrap();
        let q = RealField::constant(&g, 1.0);
        let b = quad_form(&v, &q, &e, &s).unwrap();
        // symbol 1 at |ξ|² = 2 and ‖cos‖² = L
        assert!((b - l).abs() < 1e-10 * l);

        let inside = RealField::from_fn(&g, |x| (2f64.sqrt() / 3.0 * x[0]).cos()).unwrap();
        assert!(quad_form(&inside, &q, &e, &s).unwrap() < 0.0);
    }

    #[test]
    fn cosine_mode_energy_closed_form() {
        let l = 3.0 * PI / 2f64.sqrt();
        let (g, _, s) = setup(1, l, 32, 0.0);
        let e = Exponents::new(1, 1.0, 5.0, 1.0).unwrap();
        let v = RealField::from_fn(&g, |x| (2f64.sqrt() * x[0]).cos()).unwrap();
        let q = RealField::constant(&g, 1.0);
        let got = dual_energy(&v, &q, &e, &s).unwrap();
        // symbol 1 at |ξ|² = 2 and ‖cos‖² = L on the grid; the p'-term by
        // an explicit nodal sum
        let pd = e.p_dual;
        let h = g.spacing();
        let a: f64 = (0..32)
            .map(|j| (2f64.sqrt() * g.coordinate(j)).cos().abs().powf(pd) * h)
            .sum();
        let want = a / pd - 0.5 * l;
        assert!((got - want).abs() < 1e-10 * want.abs(), "{got} vs {want}");
    }

    #[test]
    fn energy_scaling_law() {
        let (g, e, s) = setup(2, 8.0, 16, 0.3);
        let q = RealField::from_fn(&g, |x| 1.0 + 0.5 * (-x[0] * x[0] - x[1] * x[1]).exp()).unwrap();
        let f = DualFunctional::new(&q, &e, &s).unwrap();
        let v = RealField::from_fn(&g, |x| (x[0] * 0.7).sin() + (x[1] * 1.1).cos() * 0.5).unwrap();
        let a = lq_integral(&v, e.p_dual);
        let b = f.quad_form(&v).unwrap();
        for t in [0.5f64, 1.0, 2.0] {
            let want = t.powf(e.p_dual) / e.p_dual * a - t * t / 2.0 * b;
            let got = f.energy(&v.scaled(t)).unwrap();
            assert!((got - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn projection_lands_on_nehari() {
        let (g, e, s) = setup(2, 8.0, 32, 0.3);
        let q = RealField::constant(&g, 1.0);
        let f = DualFunctional::new(&q, &e, &s).unwrap();
        let pos = s.positive_part(&g).unwrap();
        let v = pos
            .apply(&RealField::from_fn(&g, |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp()).unwrap())
            .unwrap();
        let st = f.nehari_project(&v).unwrap();
        assert!(st.on_nehari);
        let a = lq_integral(&st.v, e.p_dual);
        assert!(st.nehari_residual.abs() < 1e-10 * a);
        let identity = (1.0 / e.p_dual - 0.5) * a;
        assert!((st.energy - identity).abs() < 1e-10 * identity);
        let again = f.nehari_project(&st.v).unwrap();
        let scale = st.v.max_abs();
        for (x, y) in again.v.values().iter().zip(st.v.values()) {
            assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn negative_quad_form_is_rejected() {
        let (g, e, s) = setup(1, 4.0, 16, 0.3);
        let q = RealField::constant(&g, 1.0);
        let v = RealField::constant(&g, 1.0);
        // the constant mode sees the symbol -1/(1+δ²) < 0
        assert!(matches!(nehari_scale(&v, &q, &e, &s), Err(Error::NotInUPlus(_))));
    }

    #[test]
    fn grid_mismatch() {
        let (g, e, s) = setup(1, 4.0, 16, 0.3);
        let h = TorusGrid::new(1, 4.0, 32).unwrap();
        let q = RealField::constant(&h, 1.0);
        let v = RealField::constant(&g, 1.0);
        assert_eq!(dual_energy(&v, &q, &e, &s).unwrap_err(), Error::GridMismatch);
    }
}
