use num_complex::Complex64;
use rustfft::FftPlanner;

use super::image::GhostImage;
use crate::error::{OpticsError, Result};
use crate::fft::fft2;
use crate::field::Aperture;

/// Minimum accepted ratio of fitted peak to residual RMS.
pub const MIN_FIT_SNR: f64 = 3.0;

const SCAN_POINTS: usize = 48;
const GOLDEN_ITERATIONS: usize = 40;

/// Result of fitting `a (|T|^2 * exp(-r^2 / w^2)) + b` to an image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsfFit {
    pub width: f64,
    pub amplitude: f64,
    pub background: f64,
    pub snr: f64,
}

struct Model {
    n: usize,
    pitch: f64,
    object_spectrum: Vec<Complex64>,
    data: Vec<f64>,
}

impl Model {
    /// Object blurred by `exp(-r^2 / w^2)`, sampled on the grid.
    fn blurred(&self, w: f64) -> Vec<f64> {
        let n = self.n;
        let mut kernel: Vec<Complex64> = (0..n)
            .map(|k| {
                let x = crate::fft::signed_bin(k, n) as f64 * self.pitch;
                Complex64::new((-x * x / (w * w)).exp(), 0.0)
            })
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut kernel);
        let mut spec = self.object_spectrum.clone();
        for (row, hx) in spec.chunks_exact_mut(n).zip(&kernel) {
            for (s, hy) in row.iter_mut().zip(&kernel) {
                *s *= hx.re * hy.re;
            }
        }
        fft2(n).inverse_from_transposed(&mut spec);
        spec.into_iter().map(|c| c.re).collect()
    }

    /// Linear least squares for amplitude and background at width `w`;
    /// returns `(ssr, a, b, peak of the unit-amplitude model)`.
    fn solve(&self, w: f64) -> (f64, f64, f64, f64) {
        let m = self.blurred(w);
        let np = m.len() as f64;
        let (mut sm, mut sd, mut smm, mut smd) = (0.0, 0.0, 0.0, 0.0);
        for (&x, &y) in m.iter().zip(&self.data) {
            sm += x;
            sd += y;
            smm += x * x;
            smd += x * y;
        }
        let det = np * smm - sm * sm;
        let (a, b) = if det.abs() > 0.0 {
            ((np * smd - sm * sd) / det, (smm * sd - sm * smd) / det)
        } else {
            (0.0, sd / np)
        };
        let ssr = m
            .iter()
            .zip(&self.data)
            .map(|(&x, &y)| (y - a * x - b).powi(2))
            .sum::<f64>();
        let peak = m.iter().cloned().fold(f64::MIN, f64::max);
        (ssr, a, b, peak)
    }
}

/// Gaussian 1/e half-width of the image's point response, fitted as the
/// known object intensity blurred by `exp(-r^2 / w^2)` plus a constant.
pub fn fit_psf_width(image: &GhostImage, object: &Aperture) -> Result<PsfFit> {
    let grid = image.grid();
    grid.check_same(&object.grid())?;
    let n = grid.n();
    let mut object_spectrum: Vec<Complex64> = object
        .intensity_transmission()
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    if object_spectrum.iter().all(|c| c.re == 0.0) {
        return Err(OpticsError::FitFailure {
            snr: 0.0,
            reason: "object transmits nothing".into(),
        });
    }
    fft2(n).forward_transposed(&mut object_spectrum);
    let model = Model {
        n,
        pitch: grid.pitch(),
        object_spectrum,
        data: image.values().values().to_vec(),
    };

    let (lo, hi) = (0.3 * grid.pitch(), grid.extent() / 4.0);
    let (llo, lhi) = (lo.ln(), hi.ln());
    let at = |k: usize| llo + (lhi - llo) * k as f64 / (SCAN_POINTS - 1) as f64;
    let scan: Vec<f64> = (0..SCAN_POINTS).map(|k| model.solve(at(k).exp()).0).collect();
    let best = (0..SCAN_POINTS)
        .min_by(|&i, &j| scan[i].total_cmp(&scan[j]))
        .unwrap_or(0);

    // golden section on ln w between the scan neighbours
    let (mut a, mut b) = (at(best.saturating_sub(1)), at((best + 1).min(SCAN_POINTS - 1)));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (model.solve(c.exp()).0, model.solve(d.exp()).0);
    for _ in 0..GOLDEN_ITERATIONS {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = model.solve(c.exp()).0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = model.solve(d.exp()).0;
        }
    }
    let width = (0.5 * (a + b)).exp();
    let (ssr, amplitude, background, peak) = model.solve(width);
    let rms = (ssr / grid.len() as f64).sqrt();
    let snr = if rms > 0.0 { amplitude * peak / rms } else { f64::INFINITY };

    if !(snr >= MIN_FIT_SNR) {
        return Err(OpticsError::FitFailure {
            snr,
            reason: "signal does not stand out of the residual".into(),
        });
    }
    if width <= lo * 1.01 || width >= hi / 1.01 {
        return Err(OpticsError::FitFailure {
            snr,
            reason: format!("width {width:e} m hit the search bound"),
        });
    }
    Ok(PsfFit {
        width,
        amplitude,
        background,
        snr,
    })
}

/// Fitted 1/e half-width in meters; see [`fit_psf_width`].
pub fn estimate_psf_width(image: &GhostImage, object: &Aperture) -> Result<f64> {
    fit_psf_width(image, object).map(|f| f.width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Grid, RealMap};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian_image(grid: Grid, w: f64, noise: f64, seed: u64) -> GhostImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|k| {
                let (x, y) = (grid.coord(k / grid.n()), grid.coord(k % grid.n()));
                let e: f64 = rng.sample(StandardNormal);
                3.0 * (-(x * x + y * y) / (w * w)).exp() + 0.5 + noise * 3.0 * e
            })
            .collect();
        GhostImage::new(RealMap::new(grid, values).unwrap(), 100).unwrap()
    }

    #[test]
    fn recovers_exact_gaussian() {
        let grid = Grid::new(128, 1e-5).unwrap();
        let pin = Aperture::pinhole(grid, 0.0, 0.0).unwrap();
        for w in [2e-5, 5.4e-5, 1.5e-4] {
            let fit = fit_psf_width(&gaussian_image(grid, w, 0.0, 0), &pin).unwrap();
            assert!((fit.width / w - 1.0).abs() < 0.01, "{} vs {w}", fit.width);
            assert!((fit.amplitude - 3.0).abs() < 0.03);
            assert!((fit.background - 0.5).abs() < 0.01);
        }
    }

    #[test]
    fn noisy_gaussian_within_five_percent() {
        let grid = Grid::new(128, 1e-5).unwrap();
        let pin = Aperture::pinhole(grid, 0.0, 0.0).unwrap();
        let w = 5.4e-5;
        let clean = estimate_psf_width(&gaussian_image(grid, w, 0.0, 1), &pin).unwrap();
        for seed in 0..5 {
            let noisy = estimate_psf_width(&gaussian_image(grid, w, 0.01, seed), &pin).unwrap();
            assert!((noisy / clean - 1.0).abs() < 0.05, "{noisy} vs {clean}");
        }
    }

    #[test]
    fn blurred_disk() {
        // disk blurred by a known Gaussian, built by direct summation
        let grid = Grid::new(64, 1e-5).unwrap();
        let disk = Aperture::disk(grid, 6e-5).unwrap();
        let t = disk.intensity_transmission();
        let w = 4e-5;
        let n = grid.n();
        let mut values = vec![0.0; grid.len()];
        for i in 0..n {
            for j in 0..n {
                if t.at(i, j) == 0.0 {
                    continue;
                }
                for (k, v) in values.iter_mut().enumerate() {
                    let dx = grid.coord(k / n) - grid.coord(i);
                    let dy = grid.coord(k % n) - grid.coord(j);
                    *v += (-(dx * dx + dy * dy) / (w * w)).exp();
                }
            }
        }
        let img = GhostImage::new(RealMap::new(grid, values).unwrap(), 10).unwrap();
        let got = estimate_psf_width(&img, &disk).unwrap();
        assert!((got / w - 1.0).abs() < 0.01, "{got}");
    }

    #[test]
    fn pure_noise_fails() {
        let grid = Grid::new(64, 1e-5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let values = (0..grid.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let img = GhostImage::new(RealMap::new(grid, values).unwrap(), 10).unwrap();
        let err = estimate_psf_width(&img, &Aperture::pinhole(grid, 0.0, 0.0).unwrap()).unwrap_err();
        assert!(matches!(err, OpticsError::FitFailure { .. }), "{err}");
    }

    #[test]
    fn opaque_object_fails() {
        let grid = Grid::new(16, 1e-5).unwrap();
        let img = gaussian_image(grid, 3e-5, 0.0, 0);
        assert!(matches!(
            estimate_psf_width(&img, &Aperture::zeros(grid)),
            Err(OpticsError::FitFailure { .. })
        ));
    }
}
