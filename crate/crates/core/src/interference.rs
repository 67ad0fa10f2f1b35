//! Finite-duration rotating photons and Hong-Ou-Mandel interference.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Jones;
use crate::fock::{apply_linear_optics, create, FockState};
use crate::mode::{ModeBasis, Site, ThetaWeights};
use crate::special::gauss_hermite;
use crate::transforms::{build_pair, Coefficients, Family, PairSpec};

/// Gauss-Hermite order used for Gaussian spectra.
pub const GH_NODES: usize = 64;
/// Resampling size for the trapezoid rule on sampled spectra.
pub const TRAPEZOID_POINTS: usize = 2048;

/// Normalized spectral amplitude F(ω), ∫|F|²dω = 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum SpectralAmplitude {
    Gaussian { center: f64, sigma: f64 },
    /// Linearly interpolated samples on increasing frequencies, zero outside.
    Sampled { omegas: Vec<f64>, values: Vec<Complex64> },
}

/// Gaussian spectrum with rms width `sigma` in |F|².
pub fn make_gaussian_spectrum(center: f64, sigma: f64) -> Result<SpectralAmplitude> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("spectral width must be positive, got {sigma}")));
    }
    if !(center.is_finite() && center - 5.0 * sigma > 0.0) {
        return Err(Error::SupportCrossesZero { center, sigma });
    }
    Ok(SpectralAmplitude::Gaussian { center, sigma })
}

/// Sampled spectrum, rescaled so that its trapezoid norm is one.
pub fn make_sampled_spectrum(omegas: Vec<f64>, values: Vec<Complex64>) -> Result<SpectralAmplitude> {
    if omegas.len() < 2 || omegas.len() != values.len() {
        return Err(Error::InvalidParameter("need matching frequency and value lists of length ≥ 2".into()));
    }
    if omegas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("sample frequencies must increase".into()));
    }
    if omegas[0] <= 0.0 {
        return Err(Error::NonPositiveFrequency(omegas[0]));
    }
    let raw = SpectralAmplitude::Sampled { omegas, values };
    let n = raw.norm_sqr().sqrt();
    if !(n > 0.0) {
        return Err(Error::InvalidParameter("spectrum vanishes".into()));
    }
    let SpectralAmplitude::Sampled { omegas, values } = raw else { unreachable!() };
    Ok(SpectralAmplitude::Sampled { omegas, values: values.into_iter().map(|v| v / n).collect() })
}

impl SpectralAmplitude {
    pub fn amplitude(&self, omega: f64) -> Complex64 {
        match self {
            SpectralAmplitude::Gaussian { .. } => {
                let (ln, _) = self.log_amplitude(omega);
                Complex64::new(ln.exp(), 0.0)
            }
            SpectralAmplitude::Sampled { omegas, values } => {
                if omega < omegas[0] || omega > omegas[omegas.len() - 1] {
                    return Complex64::new(0.0, 0.0);
                }
                let j = omegas.partition_point(|&w| w <= omega).clamp(1, omegas.len() - 1);
                let t = (omega - omegas[j - 1]) / (omegas[j] - omegas[j - 1]);
                values[j - 1] * (1.0 - t) + values[j] * t
            }
        }
    }

    /// (ln|F(ω)|, arg F(ω)); Gaussians stay finite far in the tails.
    pub fn log_amplitude(&self, omega: f64) -> (f64, f64) {
        match self {
            SpectralAmplitude::Gaussian { center, sigma } => {
                let d = omega - center;
                (-0.25 * (2.0 * PI * sigma * sigma).ln() - d * d / (4.0 * sigma * sigma), 0.0)
            }
            SpectralAmplitude::Sampled { .. } => {
                let a = self.amplitude(omega);
                (a.norm().ln(), a.arg())
            }
        }
    }

    /// ∫ F(ω) h(ω) dω.
    pub fn integrate(&self, h: impl Fn(f64) -> Complex64) -> Complex64 {
        match self {
            SpectralAmplitude::Gaussian { center, sigma } => {
                // ω = ω₀ + 2σx turns F into a Gauss-Hermite weight.
                let (x, w) = gauss_hermite(GH_NODES);
                let pre = (2.0 * PI * sigma * sigma).powf(-0.25) * 2.0 * sigma;
                x.iter().zip(&w).map(|(x, w)| h(center + 2.0 * sigma * x) * *w).sum::<Complex64>() * pre
            }
            SpectralAmplitude::Sampled { omegas, .. } => {
                let (a, b) = (omegas[0], omegas[omegas.len() - 1]);
                let n = TRAPEZOID_POINTS;
                let step = (b - a) / (n - 1) as f64;
                (0..n)
                    .map(|i| {
                        let w = a + i as f64 * step;
                        let end = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                        self.amplitude(w) * h(w) * end
                    })
                    .sum::<Complex64>()
                    * step
            }
        }
    }

    /// ∫|F|² dω by quadrature.
    pub fn norm_sqr(&self) -> f64 {
        self.integrate(|w| self.amplitude(w).conj()).re
    }

    /// Mean frequency ∫ω|F|²dω.
    pub fn center(&self) -> f64 {
        match self {
            SpectralAmplitude::Gaussian { center, .. } => *center,
            _ => self.integrate(|w| self.amplitude(w).conj() * w).re,
        }
    }

    /// Rms spectral width of |F|².
    pub fn spectral_rms(&self) -> f64 {
        match self {
            SpectralAmplitude::Gaussian { sigma, .. } => *sigma,
            _ => {
                let c = self.center();
                self.integrate(|w| self.amplitude(w).conj() * (w - c) * (w - c)).re.sqrt()
            }
        }
    }

    /// F̃(t) = (2π)^{−1/2} ∫ F(ω) e^{−iωt} dω.
    pub fn time_amplitude(&self, t: f64) -> Complex64 {
        match self {
            SpectralAmplitude::Gaussian { center, sigma } => {
                let mag = sigma * std::f64::consts::SQRT_2 * (2.0 * PI * sigma * sigma).powf(-0.25);
                Complex64::from_polar(mag * (-sigma * sigma * t * t).exp(), -center * t)
            }
            _ => self.integrate(|w| Complex64::from_polar(1.0, -w * t)) / (2.0 * PI).sqrt(),
        }
    }

    /// ∫|F̃(t)|² dt by quadrature in the time domain.
    pub fn time_norm_sqr(&self) -> f64 {
        match self {
            SpectralAmplitude::Gaussian { sigma, .. } => {
                // |F̃|² ∝ e^{−2σ²t²}: substitute t = x/(√2 σ).
                let (x, w) = gauss_hermite(GH_NODES);
                let scale = 1.0 / (std::f64::consts::SQRT_2 * sigma);
                x.iter()
                    .zip(&w)
                    .map(|(x, w)| w * (x * x).exp() * self.time_amplitude(x * scale).norm_sqr())
                    .sum::<f64>()
                    * scale
            }
            _ => {
                let span = 40.0 / self.spectral_rms();
                let n = 4 * TRAPEZOID_POINTS;
                let step = 2.0 * span / (n - 1) as f64;
                let terms: Vec<f64> = (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let end = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                        self.time_amplitude(-span + i as f64 * step).norm_sqr() * end
                    })
                    .collect();
                // sequential sum keeps the result independent of the thread count
                terms.iter().sum::<f64>() * step
            }
        }
    }

    /// Rms duration of |F̃|².
    pub fn temporal_rms(&self) -> Option<f64> {
        match self {
            SpectralAmplitude::Gaussian { sigma, .. } => Some(0.5 / sigma),
            _ => None,
        }
    }

    /// Full width at half maximum of |F̃(t)|².
    pub fn duration_fwhm(&self) -> Option<f64> {
        match self {
            SpectralAmplitude::Gaussian { sigma, .. } => Some((2.0 * 2f64.ln()).sqrt() / sigma),
            _ => None,
        }
    }

    /// Whether the packet lasts longer than one rotation period 2π/Ω.
    pub fn rotation_visible(&self, rotation: f64) -> Option<bool> {
        self.duration_fwhm().map(|d| d > 2.0 * PI / rotation.abs())
    }

    /// |∫F̃*(t) F̃(t+τ) dt|² = |∫|F|² e^{−iωτ} dω|².
    pub fn envelope_overlap(&self, tau: f64) -> f64 {
        self.integrate(|w| self.amplitude(w).conj() * Complex64::from_polar(1.0, -w * tau)).norm_sqr()
    }
}

/// Envelope times rotating linear polarization, F̃(t)(e_x cos Ωt + e_y sin Ωt).
pub fn wavepacket_amplitude(spectrum: &SpectralAmplitude, rotation: f64, t: f64) -> Jones {
    let f = spectrum.time_amplitude(t);
    let (s, c) = (rotation * t).sin_cos();
    Jones::new(f * c, f * s)
}

/// Reference-plane detection amplitude on the beam axis of the packet
/// ∫dω F(ω) g+(ω)†|vac⟩, integrated by quadrature over the g-pairs.
/// Transverse profiles are constant across the band and are dropped.
pub fn wavepacket_field_quadrature(spectrum: &SpectralAmplitude, rotation: f64, t: f64) -> Jones {
    // sin θ √(ω+Ω) on e_+ and cos θ √(ω−Ω) on e_-.
    let up = spectrum.integrate(|w| {
        let weight = ((w - rotation) / (2.0 * w)).sqrt() * (w + rotation).sqrt();
        Complex64::from_polar(weight, -(w + rotation) * t)
    });
    let down = spectrum.integrate(|w| {
        let weight = ((w + rotation) / (2.0 * w)).sqrt() * (w - rotation).sqrt();
        Complex64::from_polar(weight, -(w - rotation) * t)
    });
    Jones::from_circular(up, down)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HomResult {
    pub tau: f64,
    /// cos²Ωτ
    pub modulation: f64,
    /// sin⁴θ + cos⁴θ + 2 sin²θ cos²θ cos 2Ωτ
    pub polarization_overlap: f64,
    pub envelope_overlap: f64,
    /// (1 − polarization_overlap · envelope_overlap)/2; equals the cos²
    /// modulation form for balanced pairs.
    pub coincidence: f64,
}

pub fn hom_analytic(rotation: f64, theta: &ThetaWeights, tau: f64, envelope_overlap: f64) -> Result<HomResult> {
    if !(0.0..=1.0).contains(&envelope_overlap) {
        return Err(Error::InvalidParameter(format!("envelope overlap {envelope_overlap} outside [0, 1]")));
    }
    let modulation = 0.5 + 0.5 * (2.0 * rotation * tau).cos();
    let (s2, c2) = (theta.sin_theta.powi(2), theta.cos_theta.powi(2));
    let polarization_overlap = s2 * s2 + c2 * c2 + 2.0 * s2 * c2 * (2.0 * rotation * tau).cos();
    Ok(HomResult {
        tau,
        modulation,
        polarization_overlap,
        envelope_overlap,
        coincidence: (0.5 * (1.0 - polarization_overlap * envelope_overlap)).max(0.0),
    })
}

/// Index of the same label at the other beam-splitter port.
fn partner(basis: &ModeBasis, index: usize) -> usize {
    let label = basis.label(index);
    let other = match label.site() {
        Site::A => Site::B,
        Site::B => Site::A,
        Site::Unassigned => return index,
    };
    basis.index_of(&label.with_site(other)).expect("both ports registered")
}

/// Coincidence probability for the (+) member of `family` entering port A
/// and a copy delayed by `tau` entering port B of a 50/50 beam splitter,
/// evaluated in the two-photon Fock space.
pub fn hom_bruteforce(family: Family, spec: &PairSpec, tau: f64) -> Result<f64> {
    let mut basis = ModeBasis::new(0.0);
    let (u, _) = build_pair(&mut basis, family, &spec.at_site(Site::A))?;
    let (v, _) = build_pair(&mut basis, family, &spec.at_site(Site::B))?;
    let delayed = v.coefficients.evolved(&basis, tau);
    let vacuum = FockState::vacuum(&basis, 2)?;
    let (one, _) = create(&vacuum, &u.coefficients)?;
    let (input, _) = create(&one, &delayed)?;

    let t = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let r = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    let output = apply_linear_optics(&input, |k| {
        let j = partner(&basis, k);
        Coefficients::new([(k, t), (j, r)])
    })?;

    Ok(output
        .iter()
        .filter(|(occ, _)| {
            let at = |site| occ.iter().any(|(k, _)| basis.label(k).site() == site);
            at(Site::A) && at(Site::B)
        })
        .map(|(_, a)| a.norm_sqr())
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HomRow {
    pub tau: f64,
    pub analytic: f64,
    pub bruteforce: f64,
    pub abs_diff: f64,
}

/// `points` delays evenly covering `periods` × 2π/|Δ|, endpoint excluded
/// (Δ is the pair's frequency shift).
pub fn hom_delays(family: Family, spec: &PairSpec, points: usize, periods: f64) -> Result<Vec<f64>> {
    let delta = spec.shift(family);
    if delta == 0.0 {
        return Err(Error::InvalidParameter("pair has no frequency shift".into()));
    }
    if points == 0 {
        return Err(Error::InvalidParameter("need at least one delay".into()));
    }
    let span = periods * 2.0 * PI / delta.abs();
    Ok((0..points).map(|k| k as f64 * span / points as f64).collect())
}

/// Sweeps delays, comparing the CW analytic curve with the brute force.
pub fn hom_sweep(family: Family, spec: &PairSpec, taus: &[f64]) -> Result<Vec<HomRow>> {
    let delta = spec.shift(family);
    // only g and h carry unequal weights; the rest are π/4 superpositions
    let skew = if matches!(family, Family::G | Family::H) { delta } else { 0.0 };
    let theta = crate::mode::theta_weights(spec.omega, skew)?;
    taus.par_iter()
        .map(|&tau| {
            let analytic = hom_analytic(delta, &theta, tau, 1.0)?.coincidence;
            let bruteforce = hom_bruteforce(family, spec, tau)?;
            Ok(HomRow { tau, analytic, bruteforce, abs_diff: (analytic - bruteforce).abs() })
        })
        .collect()
}

/// Angular frequency of the strongest non-DC DFT component of uniformly
/// spaced samples.
pub fn dominant_frequency(samples: &[f64], step: f64) -> Result<f64> {
    let n = samples.len();
    if n < 4 {
        return Err(Error::InvalidParameter("need at least four samples".into()));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let k = (1..=n / 2)
        .max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm()))
        .expect("n ≥ 4");
    Ok(2.0 * PI * k as f64 / (n as f64 * step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::polarization_ellipse;
    use crate::mode::{theta_weights, TransverseIndex};

    const T: TransverseIndex = TransverseIndex::Bessel { kt: 0.05 };

    #[test]
    fn gaussian_parseval() {
        for (c, s) in [(100.0, 0.1), (1.0, 0.01), (50.0, 3.0)] {
            let f = make_gaussian_spectrum(c, s).unwrap();
            assert!((f.norm_sqr() - 1.0).abs() < 1e-10);
            assert!((f.time_norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gaussian_transform_matches_quadrature() {
        let f = make_gaussian_spectrum(100.0, 0.1).unwrap();
        for t in [0.0, 1.0, 5.3, -12.0] {
            let q = f.integrate(|w| Complex64::from_polar(1.0, -w * t)) / (2.0 * PI).sqrt();
            assert!((q - f.time_amplitude(t)).norm() < 1e-12, "{t}");
        }
    }

    #[test]
    fn temporal_scaling_and_visibility() {
        let a = make_gaussian_spectrum(100.0, 0.1).unwrap();
        let b = make_gaussian_spectrum(100.0, 0.05).unwrap();
        assert!((b.temporal_rms().unwrap() - 2.0 * a.temporal_rms().unwrap()).abs() < 1e-14);
        let f = make_gaussian_spectrum(1.0, 0.01).unwrap();
        assert_eq!(f.rotation_visible(1.0), Some(true));
        // |F̃|² at half the FWHM is half its peak
        let h = 0.5 * f.duration_fwhm().unwrap();
        assert!((f.time_amplitude(h).norm_sqr() / f.time_amplitude(0.0).norm_sqr() - 0.5).abs() < 1e-14);
        assert!(matches!(make_gaussian_spectrum(1.0, 0.25), Err(Error::SupportCrossesZero { .. })));
    }

    #[test]
    fn sampled_spectrum_agrees_with_gaussian() {
        let g = make_gaussian_spectrum(10.0, 0.5).unwrap();
        let omegas: Vec<f64> = (0..801).map(|i| 6.0 + i as f64 * 0.01).collect();
        let values = omegas.iter().map(|&w| g.amplitude(w)).collect();
        let s = make_sampled_spectrum(omegas, values).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((s.center() - 10.0).abs() < 1e-6);
        assert!((s.spectral_rms() - 0.5).abs() < 1e-4);
        assert!((s.time_norm_sqr() - 1.0).abs() < 1e-4);
        assert!((s.time_amplitude(0.7) - g.time_amplitude(0.7)).norm() < 1e-4);
    }

    #[test]
    fn wavepacket_examples() {
        let f = make_gaussian_spectrum(1.0, 0.01).unwrap();
        let rot = 1.0;
        let a0 = wavepacket_amplitude(&f, rot, 0.0);
        assert!(a0.y.norm() == 0.0 && (a0.x - f.time_amplitude(0.0)).norm() == 0.0);
        for k in 0..30 {
            let t = k as f64 * 0.37;
            let a = wavepacket_amplitude(&f, rot, t);
            assert!((a.norm() - f.time_amplitude(t).norm()).abs() < 1e-15);
            let (psi, _) = polarization_ellipse(a).unwrap();
            let want = (rot * t + PI / 2.0).rem_euclid(PI) - PI / 2.0;
            assert!((psi - want).abs() < 1e-12 || (psi - want).abs() > PI - 1e-12);
        }
    }

    #[test]
    fn quadrature_packet_is_linear_and_rotating() {
        let f = make_gaussian_spectrum(1.0, 0.01).unwrap();
        for k in 0..20 {
            let t = -60.0 + k as f64 * 6.1;
            let e = wavepacket_field_quadrature(&f, 0.5, t);
            let (psi, chi) = polarization_ellipse(e).unwrap();
            assert!(chi.abs() < 1e-12);
            let want = (0.5 * t + PI / 2.0).rem_euclid(PI) - PI / 2.0;
            assert!((psi - want).abs() < 1e-9 || (psi - want).abs() > PI - 1e-9, "{t}: {psi} {want}");
        }
    }

    #[test]
    fn analytic_examples() {
        let w = theta_weights(100.0, 1.0).unwrap();
        let r = hom_analytic(1.0, &w, 0.0, 1.0).unwrap();
        assert!(r.coincidence.abs() < 1e-15);
        let r = hom_analytic(1.0, &w, PI / 2.0, 1.0).unwrap();
        assert!(r.modulation.abs() < 1e-15);
        assert!((r.coincidence - 0.5 * (1.0 - r.polarization_overlap)).abs() < 1e-15);
        // θ ≠ π/4: the two factors differ by 2 sin²θ cos²θ − 1/2 at Ωτ = π/2
        let diff = r.polarization_overlap - r.modulation;
        let (s2, c2) = (w.sin_theta.powi(2), w.cos_theta.powi(2));
        assert!((diff - (s2 * s2 + c2 * c2 - 2.0 * s2 * c2)).abs() < 1e-12);
        assert!(diff > 1e-5);
        let quarter = theta_weights(100.0, 0.0).unwrap();
        for k in 0..10 {
            let r = hom_analytic(1.0, &quarter, 0.3 * k as f64, 1.0).unwrap();
            assert!((r.modulation - r.polarization_overlap).abs() < 1e-15);
        }
        assert!(hom_analytic(1.0, &w, 0.0, 1.5).is_err());
    }

    #[test]
    fn bruteforce_examples() {
        let spec = PairSpec::new(100.0, 1.0, 0, 1, T);
        assert!(hom_bruteforce(Family::B, &spec, 0.0).unwrap().abs() < 1e-12);
        assert!((hom_bruteforce(Family::B, &spec, PI / 2.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sweep_matches_analytic_and_oscillates_at_twice_rotation() {
        let spec = PairSpec::new(100.0, 1.0, 0, 1, T);
        let taus = hom_delays(Family::B, &spec, 64, 1.0).unwrap();
        let rows = hom_sweep(Family::B, &spec, &taus).unwrap();
        assert!(rows.iter().all(|r| r.abs_diff < 1e-10));
        let curve: Vec<f64> = rows.iter().map(|r| r.bruteforce).collect();
        let f = dominant_frequency(&curve, taus[1] - taus[0]).unwrap();
        assert!((f - 2.0).abs() < 1e-12);

        let weighted = PairSpec::new(10.0, 1.0, 1, 1, T);
        let taus = hom_delays(Family::G, &weighted, 32, 1.0).unwrap();
        let rows = hom_sweep(Family::G, &weighted, &taus).unwrap();
        assert!(rows.iter().all(|r| r.abs_diff < 1e-10));
    }

    #[test]
    fn g_bruteforce_follows_polarization_overlap() {
        let spec = PairSpec::new(10.0, 1.0, 0, 1, T);
        let w = theta_weights(10.0, 1.0).unwrap();
        for k in 0..16 {
            let tau = 0.2 * k as f64;
            let r = hom_analytic(1.0, &w, tau, 1.0).unwrap();
            let b = hom_bruteforce(Family::G, &spec, tau).unwrap();
            assert!((b - 0.5 * (1.0 - r.polarization_overlap)).abs() < 1e-12);
        }
    }
}
