//! Exponent bundle `(N, s, p, p', λ_p, k, ε)` and the admissible ranges the
//! existence and concentration results are stated for.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    pub dim: usize,
    pub s: f64,
    pub p: f64,
    /// Hölder conjugate `p/(p-1)`.
    pub p_dual: f64,
    /// Interaction decay rate `(N-1)/2 - (N+1)/p`.
    pub lambda_p: f64,
    pub k: f64,
    /// `1/k`.
    pub eps: f64,
}

/// One admissibility condition with its interval and outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub value: f64,
    /// Open lower bound, except for the dimension which is inclusive.
    pub lower: f64,
    pub upper: f64,
    pub passed: bool,
}

impl Exponents {
    /// Requires `s > 0`, `p > 2` (so that `p' < 2`) and `k > 0`.
    pub fn new(dim: usize, s: f64, p: f64, k: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParameter("s must be positive"));
        }
        if !(p.is_finite() && p > 2.0) {
            return Err(Error::InvalidParameter("p must exceed 2"));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidParameter("k must be positive"));
        }
        let n = dim as f64;
        Ok(Self {
            dim,
            s,
            p,
            p_dual: p / (p - 1.0),
            lambda_p: (n - 1.0) / 2.0 - (n + 1.0) / p,
            k,
            eps: 1.0 / k,
        })
    }

    pub fn with_k(&self, k: f64) -> Result<Self> {
        Self::new(self.dim, self.s, self.p, k)
    }

    /// Interval `(N/(N+1), N/2)` for the fractional order.
    pub fn s_range(dim: usize) -> (f64, f64) {
        let n = dim as f64;
        (n / (n + 1.0), n / 2.0)
    }

    /// Interval `(2(N+1)/(N-1), 2N/(N-2s))` for the nonlinearity. The ends
    /// degenerate to `+∞` when the denominators vanish or turn negative.
    pub fn p_range(dim: usize, s: f64) -> (f64, f64) {
        let n = dim as f64;
        let lo = if dim > 1 {
            2.0 * (n + 1.0) / (n - 1.0)
        } else {
            f64::INFINITY
        };
        let hi = if n - 2.0 * s > 0.0 {
            2.0 * n / (n - 2.0 * s)
        } else {
            f64::INFINITY
        };
        (lo, hi)
    }

    pub fn hypotheses(&self) -> [HypothesisCheck; 3] {
        let (slo, shi) = Self::s_range(self.dim);
        let (plo, phi) = Self::p_range(self.dim, self.s);
        [
            HypothesisCheck {
                name: "dim",
                value: self.dim as f64,
                lower: 3.0,
                upper: f64::INFINITY,
                passed: self.dim >= 3,
            },
            HypothesisCheck {
                name: "s",
                value: self.s,
                lower: slo,
                upper: shi,
                passed: self.s > slo && self.s < shi,
            },
            HypothesisCheck {
                name: "p",
                value: self.p,
                lower: plo,
                upper: phi,
                passed: self.p > plo && self.p < phi,
            },
        ]
    }

    pub fn within_paper_hypotheses(&self) -> bool {
        self.hypotheses().iter().all(|h| h.passed)
    }

    /// Original-frame amplitude `k^{2s/(p-2)}`.
    pub fn scale_factor(&self) -> f64 {
        self.k.powf(2.0 * self.s / (self.p - 2.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_dim_quintic_is_admissible() {
        let e = Exponents::new(3, 1.0, 5.0, 1.0).unwrap();
        assert!(e.within_paper_hypotheses());
        let (lo, hi) = Exponents::p_range(3, 1.0);
        assert!((lo - 4.0).abs() < 1e-15 && (hi - 6.0).abs() < 1e-15);
        assert!((e.lambda_p - 0.2).abs() < 1e-15);
        assert!((e.p_dual - 1.25).abs() < 1e-15);
    }

    #[test]
    fn cubic_fails_lower_p_bound() {
        let e = Exponents::new(3, 1.0, 3.0, 1.0).unwrap();
        let h = e.hypotheses();
        assert!(h[0].passed && h[1].passed);
        assert!(!h[2].passed);
        assert_eq!(h[2].lower, 4.0);
    }

    #[test]
    fn planar_problem_is_outside() {
        let e = Exponents::new(2, 0.8, 5.0, 1.0).unwrap();
        assert!(!e.hypotheses()[0].passed);
        assert!(!e.within_paper_hypotheses());
    }

    #[test]
    fn eps_times_k_is_one_for_dyadic_k() {
        for k in [2.0, 4.0, 8.0, 0.5] {
            let e = Exponents::new(3, 1.0, 5.0, k).unwrap();
            assert_eq!(e.eps * e.k, 1.0);
        }
    }

    #[test]
    fn invariants_on_p_dual_and_lambda() {
        for dim in 2..=5usize {
            for i in 1..40 {
                let p = 2.0 + i as f64 * 0.25;
                let e = Exponents::new(dim, 1.0, p, 1.0).unwrap();
                assert!(e.p_dual > 1.0 && e.p_dual < 2.0);
                let threshold = 2.0 * (dim as f64 + 1.0) / (dim as f64 - 1.0);
                if p > threshold {
                    assert!(e.lambda_p > 0.0);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Exponents::new(3, 1.0, 2.0, 1.0).is_err());
        assert!(Exponents::new(3, 0.0, 5.0, 1.0).is_err());
        assert!(Exponents::new(3, 1.0, 5.0, 0.0).is_err());
        assert!(Exponents::new(0, 1.0, 5.0, 1.0).is_err());
    }
}
