//! Storing a rotating photon in a single atom via a two-photon Raman transition.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interference::SpectralAmplitude;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AtomConfig {
    /// Raman resonance ω_A.
    pub omega_a: f64,
    /// Effective width Γ > 0.
    pub gamma: f64,
    /// Atom position relative to the focal plane.
    pub z_prime: f64,
    /// Probability that nothing is absorbed, carried alongside the result.
    pub p0: f64,
    /// Energy-space width σ_E of the motional states |E ± Ω⟩.
    pub motional_sigma: f64,
}

impl AtomConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("Γ must be positive, got {}", self.gamma)));
        }
        if !(0.0..1.0).contains(&self.p0) {
            return Err(Error::InvalidParameter(format!("P0 must lie in [0, 1), got {}", self.p0)));
        }
        if !(self.motional_sigma > 0.0 && self.motional_sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("σ_E must be positive, got {}", self.motional_sigma)));
        }
        if !self.omega_a.is_finite() || !self.z_prime.is_finite() {
            return Err(Error::InvalidParameter("non-finite atom parameter".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StorageResult {
    /// Amplitude of |+1⟩_A on the absorbed branch.
    pub c_plus: Complex64,
    /// Amplitude of |−1⟩_A on the absorbed branch.
    pub c_minus: Complex64,
    /// ⟨E−Ω|E+Ω⟩
    pub motional_overlap: Complex64,
    /// Base-2 von Neumann entropy of the internal state.
    pub entanglement_entropy: f64,
    pub p0: f64,
}

/// P(ω) = 1/(ω − ω_A − iΓ).
pub fn raman_amplitude(omega: f64, config: &AtomConfig) -> Complex64 {
    Complex64::new(omega - config.omega_a, -config.gamma).inv()
}

/// Gaussian motional states displaced by ±Ω in energy.
pub fn motional_overlap(rotation: f64, config: &AtomConfig) -> Complex64 {
    let x = rotation / config.motional_sigma;
    Complex64::new((-0.5 * x * x).exp(), 0.0)
}

/// Entropy of ρ = [[|c+|², c+ c−* o], [c.c., |c−|²]].
pub fn stored_entanglement(c_plus: Complex64, c_minus: Complex64, overlap: Complex64) -> f64 {
    let (a, d) = (c_plus.norm_sqr(), c_minus.norm_sqr());
    let off = (c_plus * c_minus.conj() * overlap).norm();
    let trace = a + d;
    let split = ((a - d).powi(2) + 4.0 * off * off).sqrt();
    [0.5 * (trace + split), 0.5 * (trace - split)]
        .iter()
        .map(|&l| l / trace)
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum::<f64>()
        .clamp(0.0, 1.0)
        + 0.0
}

/// Internal-state amplitudes after the atom absorbs a g+-type rotating
/// photon with spectrum F: c± ∝ P(ω₀±Ω) F(ω₀±Ω) e^{±iΩz′}, renormalized.
pub fn absorb(spectrum: &SpectralAmplitude, rotation: f64, config: &AtomConfig) -> Result<StorageResult> {
    config.validate()?;
    let center = spectrum.center();
    // log magnitudes keep far-detuned Gaussian tails from underflowing
    let branch = |sign: f64| {
        let w = center + sign * rotation;
        let p = raman_amplitude(w, config);
        let (ln_f, arg_f) = spectrum.log_amplitude(w);
        (p.norm().ln() + ln_f, p.arg() + arg_f + sign * rotation * config.z_prime)
    };
    let (lp, php) = branch(1.0);
    let (lm, phm) = branch(-1.0);
    let top = lp.max(lm);
    if top == f64::NEG_INFINITY || top.is_nan() {
        return Err(Error::ZeroAbsorption);
    }
    let (mp, mm) = ((lp - top).exp(), (lm - top).exp());
    let norm = mp.hypot(mm);
    let c_plus = Complex64::from_polar(mp / norm, php);
    let c_minus = Complex64::from_polar(mm / norm, phm);
    let overlap = motional_overlap(rotation, config);
    Ok(StorageResult {
        c_plus,
        c_minus,
        motional_overlap: overlap,
        entanglement_entropy: stored_entanglement(c_plus, c_minus, overlap),
        p0: config.p0,
    })
}
