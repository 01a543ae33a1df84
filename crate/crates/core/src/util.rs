//! Small numeric helpers shared across modules.

#[allow(unused_imports)]
use num_traits::Float;

/// C^∞ transition from 0 (t ≤ 0) to 1 (t ≥ 1) built from `exp(-1/t)`.
pub(crate) fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = bump(t);
        let b = bump(1.0 - t);
        a / (a + b)
    }
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// `|x|^{e-2} x` with the removable singularity at 0 filled in.
#[inline]
pub(crate) fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e - 1.0)
    }
}

/// Least-squares slope of `y` against `x`.
pub(crate) fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_is_monotone_and_pinned() {
        assert_eq!(smoothstep(-1.0), 0.0);
        assert_eq!(smoothstep(1.5), 1.0);
        assert!((smoothstep(0.5) - 0.5).abs() < 1e-15);
        let mut prev = 0.0;
        for i in 0..=100 {
            let s = smoothstep(i as f64 / 100.0);
            assert!(s >= prev);
            prev = s;
        }
    }

    #[test]
    fn signed_pow_zero_is_zero() {
        assert_eq!(signed_pow(0.0, 1.25), 0.0);
        assert!((signed_pow(-8.0, 4.0 / 3.0) + 2.0).abs() < 1e-12);
    }
}
