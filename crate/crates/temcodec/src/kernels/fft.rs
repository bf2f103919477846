//! Discrete Fourier transform and the grid low-pass projection.
//!
//! The transform is radix-2 for power-of-two lengths and Bluestein's chirp
//! algorithm otherwise, so any grid length works. A [`SpectralMask`] plan
//! precomputes the twiddle tables once and can be applied many times.

use crate::scalar::{real, Real};

use super::KernelError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Complex<T> {
    pub re: T,
    pub im: T,
}

impl<T: Real> Complex<T> {
    fn zero() -> Self {
        Self {
            re: T::zero(),
            im: T::zero(),
        }
    }

    fn from_re(re: T) -> Self {
        Self { re, im: T::zero() }
    }

    fn expi(theta: T) -> Self {
        Self {
            re: theta.cos(),
            im: theta.sin(),
        }
    }

    fn conj(self) -> Self {
        Self {
            re: self.re,
            im: -self.im,
        }
    }

    fn add(self, o: Self) -> Self {
        Self {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }

    fn sub(self, o: Self) -> Self {
        Self {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }

    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }

    fn scale(self, s: T) -> Self {
        Self {
            re: self.re * s,
            im: self.im * s,
        }
    }
}

/// DFT plan for a fixed length.
#[derive(Debug, Clone)]
pub(crate) struct Dft<T> {
    n: usize,
    // Radix-2 machinery for the internal power-of-two length.
    pow2_len: usize,
    twiddles: Vec<Complex<T>>,
    // Bluestein chirp data; empty when n itself is a power of two.
    chirp: Vec<Complex<T>>,
    chirp_kernel_fft: Vec<Complex<T>>,
}

impl<T: Real> Dft<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        if n.is_power_of_two() {
            Self {
                n,
                pow2_len: n,
                twiddles: make_twiddles(n),
                chirp: Vec::new(),
                chirp_kernel_fft: Vec::new(),
            }
        } else {
            let m = (2 * n - 1).next_power_of_two();
            let twiddles = make_twiddles(m);
            // chirp[j] = exp(-i pi j^2 / n), with j^2 reduced mod 2n to keep
            // the angle small.
            let chirp: Vec<Complex<T>> = (0..n)
                .map(|j| {
                    let sq = (j * j) % (2 * n);
                    Complex::expi(-T::PI() * real::<T>(sq as f64) / real(n as f64))
                })
                .collect();
            let mut kernel = vec![Complex::zero(); m];
            kernel[0] = chirp[0].conj();
            for j in 1..n {
                kernel[j] = chirp[j].conj();
                kernel[m - j] = chirp[j].conj();
            }
            fft_pow2(&mut kernel, &twiddles, false);
            Self {
                n,
                pow2_len: m,
                twiddles,
                chirp,
                chirp_kernel_fft: kernel,
            }
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// In-place forward DFT, unscaled.
    pub fn forward(&self, buf: &mut [Complex<T>]) {
        assert_eq!(buf.len(), self.n);
        if self.chirp.is_empty() {
            fft_pow2(buf, &self.twiddles, false);
        } else {
            self.bluestein(buf);
        }
    }

    /// In-place inverse DFT, scaled by `1/n`.
    pub fn inverse(&self, buf: &mut [Complex<T>]) {
        for v in buf.iter_mut() {
            *v = v.conj();
        }
        self.forward(buf);
        let s = T::one() / real(self.n as f64);
        for v in buf.iter_mut() {
            *v = v.conj().scale(s);
        }
    }

    fn bluestein(&self, buf: &mut [Complex<T>]) {
        let m = self.pow2_len;
        let mut a = vec![Complex::zero(); m];
        for (j, v) in buf.iter().enumerate() {
            a[j] = v.mul(self.chirp[j]);
        }
        fft_pow2(&mut a, &self.twiddles, false);
        for (x, k) in a.iter_mut().zip(self.chirp_kernel_fft.iter()) {
            *x = x.mul(*k);
        }
        fft_pow2(&mut a, &self.twiddles, true);
        let s = T::one() / real(m as f64);
        for (j, out) in buf.iter_mut().enumerate() {
            *out = a[j].scale(s).mul(self.chirp[j]);
        }
    }
}

fn make_twiddles<T: Real>(m: usize) -> Vec<Complex<T>> {
    (0..m / 2)
        .map(|j| Complex::expi(-real::<T>(2.0) * T::PI() * real::<T>(j as f64) / real(m as f64)))
        .collect()
}

/// Iterative radix-2 FFT. `twiddles` holds `m/2` forward roots of unity.
fn fft_pow2<T: Real>(buf: &mut [Complex<T>], twiddles: &[Complex<T>], inverse: bool) {
    let m = buf.len();
    debug_assert!(m.is_power_of_two());
    if m <= 1 {
        return;
    }
    // Bit-reversal permutation.
    let bits = m.trailing_zeros();
    for i in 0..m {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= m {
        let step = m / len;
        for start in (0..m).step_by(len) {
            for k in 0..len / 2 {
                let mut w = twiddles[k * step];
                if inverse {
                    w = w.conj();
                }
                let u = buf[start + k];
                let v = buf[start + k + len / 2].mul(w);
                buf[start + k] = u.add(v);
                buf[start + k + len / 2] = u.sub(v);
            }
        }
        len <<= 1;
    }
}

/// Reusable ideal low-pass projection on a uniform grid: the DFT bins with
/// `|omega| > cutoff` are zeroed and the signal transformed back.
#[derive(Debug, Clone)]
pub struct SpectralMask<T> {
    dft: Dft<T>,
    keep: Vec<bool>,
}

impl<T: Real> SpectralMask<T> {
    pub fn new(n: usize, dt: T, omega: T) -> Result<Self, KernelError> {
        if n < 2 {
            return Err(KernelError::GridTooShort { len: n });
        }
        if !(dt > T::zero()) || !(omega > T::zero()) {
            return Err(KernelError::BadTolerance);
        }
        if T::PI() / dt <= omega {
            return Err(KernelError::GridCannotRepresentBandwidth {
                nyquist: (T::PI() / dt).as_f64(),
                omega: omega.as_f64(),
            });
        }
        let span = dt * real(n as f64);
        let keep = (0..n)
            .map(|j| {
                let jj = j.min(n - j);
                let w = real::<T>(2.0) * T::PI() * real::<T>(jj as f64) / span;
                w <= omega
            })
            .collect();
        Ok(Self {
            dft: Dft::new(n),
            keep,
        })
    }

    /// Applies the mask to one real signal, returning the filtered samples.
    pub fn apply(&self, values: &[T]) -> Vec<T> {
        assert_eq!(values.len(), self.dft.len());
        let mut buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::from_re(v)).collect();
        self.dft.forward(&mut buf);
        for (v, &k) in buf.iter_mut().zip(self.keep.iter()) {
            if !k {
                *v = Complex::zero();
            }
        }
        self.dft.inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// One-shot convenience wrapper over [`SpectralMask`].
pub fn spectral_mask<T: Real>(values: &[T], dt: T, omega: T) -> Result<Vec<T>, KernelError> {
    Ok(SpectralMask::new(values.len(), dt, omega)?.apply(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn naive_dft(input: &[Complex<f64>]) -> Vec<Complex<f64>> {
        let n = input.len();
        (0..n)
            .map(|k| {
                let mut acc = Complex::zero();
                for (j, v) in input.iter().enumerate() {
                    let ang = -2.0 * std::f64::consts::PI * (j * k % n) as f64 / n as f64;
                    acc = acc.add(v.mul(Complex::expi(ang)));
                }
                acc
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_for_assorted_lengths() {
        let mut rng = SplitMix64::new(23);
        for &n in &[1usize, 2, 3, 5, 8, 12, 20, 45, 125, 128] {
            let input: Vec<Complex<f64>> = (0..n)
                .map(|_| Complex {
                    re: rng.uniform_in(-1.0, 1.0),
                    im: rng.uniform_in(-1.0, 1.0),
                })
                .collect();
            let mut got = input.clone();
            Dft::new(n).forward(&mut got);
            let want = naive_dft(&input);
            for (g, w) in got.iter().zip(want.iter()) {
                assert!((g.re - w.re).abs() < 1e-9, "n={n}");
                assert!((g.im - w.im).abs() < 1e-9, "n={n}");
            }
        }
    }

    #[test]
    fn forward_inverse_roundtrip() {
        let mut rng = SplitMix64::new(9);
        for &n in &[7usize, 64, 2000] {
            let input: Vec<Complex<f64>> = (0..n)
                .map(|_| Complex {
                    re: rng.uniform_in(-1.0, 1.0),
                    im: 0.0,
                })
                .collect();
            let mut buf = input.clone();
            let dft = Dft::new(n);
            dft.forward(&mut buf);
            dft.inverse(&mut buf);
            for (g, w) in buf.iter().zip(input.iter()) {
                assert!((g.re - w.re).abs() < 1e-11);
                assert!(g.im.abs() < 1e-11);
            }
        }
    }

    #[test]
    fn zero_input_stays_zero() {
        let out = spectral_mask(&[0.0f64; 100], 0.01, 10.0).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn retained_band_cosine_unchanged() {
        // Exact-bin cosine below the cutoff passes through untouched.
        let n = 250;
        let dt = 0.01f64;
        let span = n as f64 * dt;
        let j = 3.0;
        let values: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * j * i as f64 / n as f64).cos())
            .collect();
        let omega = 2.0 * std::f64::consts::PI * (j + 1.0) / span;
        let out = spectral_mask(&values, dt, omega).unwrap();
        for (o, v) in out.iter().zip(values.iter()) {
            assert!((o - v).abs() < 1e-10);
        }
    }

    #[test]
    fn above_cutoff_tone_removed() {
        let n = 400;
        let dt = 0.01f64;
        let span = n as f64 * dt;
        let j = 60.0;
        let values: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * j * i as f64 / n as f64).sin())
            .collect();
        let omega = 2.0 * std::f64::consts::PI * 10.0 / span;
        let out = spectral_mask(&values, dt, omega).unwrap();
        let norm: f64 = out.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm < 1e-9, "residual norm {norm}");
    }

    #[test]
    fn idempotent_and_nonexpansive_on_noise() {
        let mut rng = SplitMix64::new(77);
        let n = 500;
        let dt = 0.005f64;
        let mask = SpectralMask::new(n, dt, 40.0).unwrap();
        for _ in 0..1000 {
            let values: Vec<f64> = (0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
            let once = mask.apply(&values);
            let twice = mask.apply(&once);
            let drift: f64 = once
                .iter()
                .zip(twice.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(drift < 1e-12, "drift {drift}");
            let n_in: f64 = values.iter().map(|v| v * v).sum::<f64>().sqrt();
            let n_out: f64 = once.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(n_out <= n_in + 1e-12);
        }
    }

    #[test]
    fn rejects_unrepresentable_bandwidth() {
        let r = spectral_mask(&[0.0f64; 10], 0.1, 100.0);
        assert!(matches!(
            r,
            Err(KernelError::GridCannotRepresentBandwidth { .. })
        ));
    }
}
