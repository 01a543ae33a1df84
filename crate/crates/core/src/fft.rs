//! One-dimensional complex FFT.
//!
//! Iterative radix-2 for power-of-two lengths; any other length goes through
//! Bluestein's chirp-z reduction onto a power-of-two transform. Transforms are
//! unnormalized with the forward kernel `exp(-2πi jk/n)`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Radix2 {
        twiddles: Vec<Complex64>,
        bitrev: Vec<u32>,
    },
    Bluestein {
        inner: Box<Fft>,
        chirp: Vec<Complex64>,
        kernel_hat: Vec<Complex64>,
    },
}

impl Fft {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "FFT length must be positive");
        if len.is_power_of_two() {
            let twiddles = (0..len / 2)
                .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64))
                .collect();
            let bits = len.trailing_zeros();
            let bitrev = (0..len as u32)
                .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
                .collect();
            return Self {
                len,
                kind: Kind::Radix2 { twiddles, bitrev },
            };
        }
        let m = (2 * len - 1).next_power_of_two();
        let inner = Box::new(Fft::new(m));
        // chirp_j = exp(-iπ j²/n); j² is reduced mod 2n to keep the angle small
        let chirp: Vec<Complex64> = (0..len)
            .map(|j| {
                let jj = (j as u128 * j as u128 % (2 * len as u128)) as f64;
                Complex64::from_polar(1.0, -PI * jj / len as f64)
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for j in 1..len {
            kernel[j] = chirp[j].conj();
            kernel[m - j] = chirp[j].conj();
        }
        inner.process(&mut kernel, Direction::Forward);
        Self {
            len,
            kind: Kind::Bluestein {
                inner,
                chirp,
                kernel_hat: kernel,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place unnormalized transform of `buf` (length must equal `len`).
    pub fn process(&self, buf: &mut [Complex64], dir: Direction) {
        assert_eq!(buf.len(), self.len);
        match &self.kind {
            Kind::Radix2 { twiddles, bitrev } => radix2(buf, twiddles, bitrev, dir),
            Kind::Bluestein {
                inner,
                chirp,
                kernel_hat,
            } => {
                if dir == Direction::Inverse {
                    buf.iter_mut().for_each(|z| *z = z.conj());
                }
                let m = kernel_hat.len();
                let mut work = vec![Complex64::new(0.0, 0.0); m];
                for (w, (x, c)) in work.iter_mut().zip(buf.iter().zip(chirp)) {
                    *w = x * c;
                }
                inner.process(&mut work, Direction::Forward);
                for (w, k) in work.iter_mut().zip(kernel_hat) {
                    *w *= k;
                }
                inner.process(&mut work, Direction::Inverse);
                let scale = 1.0 / m as f64;
                for (x, (w, c)) in buf.iter_mut().zip(work.iter().zip(chirp)) {
                    *x = w * c * scale;
                }
                if dir == Direction::Inverse {
                    buf.iter_mut().for_each(|z| *z = z.conj());
                }
            }
        }
    }
}

fn radix2(buf: &mut [Complex64], twiddles: &[Complex64], bitrev: &[u32], dir: Direction) {
    let n = buf.len();
    for i in 0..n {
        let j = bitrev[i] as usize;
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut half = 1;
    while half < n {
        let step = n / (2 * half);
        for start in (0..n).step_by(2 * half) {
            for k in 0..half {
                let mut w = twiddles[k * step];
                if dir == Direction::Inverse {
                    w = w.conj();
                }
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        half *= 2;
    }
}
