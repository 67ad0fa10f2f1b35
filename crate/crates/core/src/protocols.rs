//! Rotating singlets and rotating-basis BB84.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    estimate_pattern_rotation_series, estimate_polarization_rotation, polarization_ellipse, snapshot, Component,
    FieldKind, Grid,
};
use crate::fock::{create_raw, moments, project_mode, FockState, Moments};
use crate::mode::{ModeBasis, Site, TransverseIndex};
use crate::transforms::{build_pair, pair_labels, Coefficients, Family, PairSpec};

/// Which degree of freedom carries the singlet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    /// Polarization singlet over the g / b / label bases.
    Polarization,
    /// Orbital singlet over the h / c / label bases.
    Orbital,
}

impl Flavor {
    pub fn weighted_family(self) -> Family {
        match self {
            Flavor::Polarization => Family::G,
            Flavor::Orbital => Family::H,
        }
    }

    pub fn balanced_family(self) -> Family {
        match self {
            Flavor::Polarization => Family::B,
            Flavor::Orbital => Family::C,
        }
    }
}

/// Mode pair in which the antisymmetric state is written.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingletBasis {
    /// g± (polarization) or h± (orbital).
    Weighted,
    /// b± (polarization) or c± (orbital).
    Balanced,
    /// The two monochromatic labels.
    Labels,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SingletSpec {
    pub flavor: Flavor,
    pub omega: f64,
    pub rotation: f64,
    pub m: i32,
    pub s: i32,
    pub transverse: TransverseIndex,
    pub n_max: u32,
}

impl SingletSpec {
    pub fn pair_spec(&self, site: Site) -> PairSpec {
        PairSpec::new(self.omega, self.rotation, self.m, self.s, self.transverse).at_site(site)
    }

    pub fn family(&self, choice: SingletBasis) -> Option<Family> {
        match choice {
            SingletBasis::Weighted => Some(self.flavor.weighted_family()),
            SingletBasis::Balanced => Some(self.flavor.balanced_family()),
            SingletBasis::Labels => None,
        }
    }
}

/// The (first, second) modes of `choice` at `site`.
pub fn singlet_modes(
    basis: &mut ModeBasis,
    spec: &SingletSpec,
    choice: SingletBasis,
    site: Site,
) -> Result<(Coefficients, Coefficients)> {
    let pair = spec.pair_spec(site);
    match spec.family(choice) {
        Some(family) => {
            let (p, m) = build_pair(basis, family, &pair)?;
            Ok((p.coefficients, m.coefficients))
        }
        None => {
            let ([up, down], _) = pair_labels(basis, spec.flavor.weighted_family(), &pair)?;
            Ok((Coefficients::single(up), Coefficients::single(down)))
        }
    }
}

/// (u₁†_A u₂†_B − u₂†_A u₁†_B)/√2 |vac⟩ over the chosen mode pair.
pub fn build_singlet(basis: &mut ModeBasis, spec: &SingletSpec, choice: SingletBasis) -> Result<FockState> {
    let (a1, a2) = singlet_modes(basis, spec, choice, Site::A)?;
    let (b1, b2) = singlet_modes(basis, spec, choice, Site::B)?;
    let vacuum = FockState::vacuum(basis, spec.n_max)?;
    let first = create_raw(&create_raw(&vacuum, &a1)?, &b2)?;
    let second = create_raw(&create_raw(&vacuum, &a2)?, &b1)?;
    let state = first.add(&second.scaled(Complex64::new(-1.0, 0.0)))?;
    Ok(state.scaled(Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)))
}

/// Radius at which rotation estimators probe the field.
pub fn probe_radius(transverse: TransverseIndex) -> f64 {
    match transverse {
        TransverseIndex::Bessel { kt } => 1.0 / kt,
        TransverseIndex::LaguerreGauss { waist, .. } => 0.7 * waist,
    }
}

/// Rotation rate of a single-photon mode's field: polarization axis for the
/// polarization flavor, intensity pattern for the orbital one. `None` when the
/// field has nothing to rotate (circular polarization or an m = 0 pattern).
pub fn rotation_sense(
    basis: &ModeBasis,
    coefficients: &Coefficients,
    flavor: Flavor,
    rotation: f64,
    transverse: TransverseIndex,
) -> Result<Option<f64>> {
    match flavor {
        Flavor::Polarization => {
            let point = (probe_radius(transverse) * 0.8, probe_radius(transverse) * 0.6);
            let at0 = crate::field::detection_amplitude(
                basis,
                coefficients,
                point.0,
                point.1,
                basis.z0(),
                0.0,
                FieldKind::Electric,
            )?;
            if let Ok((_, chi)) = polarization_ellipse(at0) {
                if (chi.abs() - PI / 4.0).abs() < 1e-6 {
                    return Ok(None);
                }
            }
            let times: Vec<f64> = (0..33).map(|k| k as f64 * PI / (16.0 * rotation.abs())).collect();
            match estimate_polarization_rotation(basis, coefficients, point, &times, FieldKind::Electric) {
                Ok(rate) => Ok(Some(rate)),
                Err(Error::NullField) => Ok(None),
                Err(e) => Err(e),
            }
        }
        Flavor::Orbital => {
            let grid = Grid { points_per_side: 65, extent: 2.5 * probe_radius(transverse) };
            let frames = (0..6)
                .map(|n| {
                    snapshot(basis, coefficients, &grid, n as f64 * PI / (5.0 * rotation.abs()), FieldKind::Electric)
                })
                .collect::<Result<Vec<_>>>()?;
            match estimate_pattern_rotation_series(&frames, Component::Total) {
                Ok(rate) => Ok(Some(rate)),
                Err(Error::NoAzimuthalStructure) => Ok(None),
                Err(e) => Err(e),
            }
        }
    }
}

/// Outcome of detecting one photon of a singlet in a given mode.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionalCorrelation {
    pub probability: f64,
    pub local: Moments,
    pub remote: Moments,
    pub remote_coefficients: Coefficients,
    pub local_rotation: Option<f64>,
    pub remote_rotation: Option<f64>,
}

pub fn conditional_correlations(
    basis: &ModeBasis,
    spec: &SingletSpec,
    singlet: &FockState,
    mode: &Coefficients,
) -> Result<ConditionalCorrelation> {
    let (probability, remote_state) = project_mode(singlet, mode)?;
    let remote_coefficients = remote_state
        .single_photon_coefficients()
        .ok_or_else(|| Error::InvalidParameter("conditional state is not a single photon".into()))?;
    let local_state = {
        let vacuum = FockState::vacuum(basis, 1)?;
        create_raw(&vacuum, mode)?.normalized()?
    };
    Ok(ConditionalCorrelation {
        probability,
        local: moments(basis, &local_state)?,
        remote: moments(basis, &remote_state)?,
        local_rotation: rotation_sense(basis, mode, spec.flavor, spec.rotation, spec.transverse)?,
        remote_rotation: rotation_sense(basis, &remote_coefficients, spec.flavor, spec.rotation, spec.transverse)?,
        remote_coefficients,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NamedCorrelation {
    /// Mode detected at site A.
    pub probe: String,
    #[serde(flatten)]
    pub result: ConditionalCorrelation,
}

/// The three equivalent singlets together with their mutual overlaps.
#[derive(Clone, Debug, Serialize)]
pub struct SingletReport {
    pub flavor: Flavor,
    /// |⟨RS_weighted|RS_balanced⟩|
    pub weighted_balanced: f64,
    /// |⟨RS_weighted|RS_labels⟩|
    pub weighted_labels: f64,
    /// |⟨RS_balanced|RS_labels⟩|
    pub balanced_labels: f64,
    pub total: Moments,
    pub correlations: Vec<NamedCorrelation>,
}

pub fn singlet_report(spec: &SingletSpec) -> Result<SingletReport> {
    let mut basis = ModeBasis::new(0.0);
    let states = [SingletBasis::Weighted, SingletBasis::Balanced, SingletBasis::Labels]
        .map(|choice| build_singlet(&mut basis, spec, choice));
    let [w, b, l] = states;
    let (w, b, l) = (w?, b?, l?);
    // registering is idempotent, so these reuse the singlet's labels
    let mut probes = Vec::new();
    for choice in [SingletBasis::Weighted, SingletBasis::Balanced, SingletBasis::Labels] {
        let (first, second) = singlet_modes(&mut basis, spec, choice, Site::A)?;
        let names = match spec.family(choice) {
            Some(family) => [format!("{family}+"), format!("{family}-")],
            None => ["a_up".to_string(), "a_down".to_string()],
        };
        let [n1, n2] = names;
        probes.push((n1, first));
        probes.push((n2, second));
    }
    let correlations = probes
        .into_iter()
        .map(|(probe, mode)| Ok(NamedCorrelation { probe, result: conditional_correlations(&basis, spec, &w, &mode)? }))
        .collect::<Result<Vec<_>>>()?;
    let inner = |x: &FockState, y: &FockState| crate::fock::inner(x, y).map(|c| c.norm());
    Ok(SingletReport {
        flavor: spec.flavor,
        weighted_balanced: inner(&w, &b)?,
        weighted_labels: inner(&w, &l)?,
        balanced_labels: inner(&b, &l)?,
        total: moments(&basis, &w)?,
        correlations,
    })
}

/// The two BB84 bases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bb84Basis {
    /// {b+, b−}
    Rotating,
    /// {a_{ω+Ω,+}, a_{ω−Ω,−}}
    Frequency,
}

impl Bb84Basis {
    fn index(self) -> usize {
        match self {
            Bb84Basis::Rotating => 0,
            Bb84Basis::Frequency => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Eavesdropper {
    None,
    /// Measure every photon in a fixed basis and resend the outcome.
    InterceptResend(Bb84Basis),
    /// Measure in a uniformly random basis and resend.
    InterceptResendRandom,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bb84Config {
    pub omega: f64,
    pub rotation: f64,
    pub transverse: TransverseIndex,
    pub trials: u64,
    pub eavesdrop: Eavesdropper,
    pub seed: u64,
}

/// The four BB84 states over one shared two-label registry.
pub fn bb84_states(basis: &mut ModeBasis, config: &Bb84Config) -> Result<[[Coefficients; 2]; 2]> {
    let spec = PairSpec::new(config.omega, config.rotation, 0, 1, config.transverse);
    let (bp, bm) = build_pair(basis, Family::B, &spec)?;
    let ([up, down], _) = pair_labels(basis, Family::B, &spec)?;
    Ok([[bp.coefficients, bm.coefficients], [Coefficients::single(up), Coefficients::single(down)]])
}

/// Matrix of |⟨xᵢ|yⱼ⟩|².
pub fn overlap_matrix(x: &[Coefficients; 2], y: &[Coefficients; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for (i, a) in x.iter().enumerate() {
        for (j, b) in y.iter().enumerate() {
            out[i][j] = a.overlap(b).norm_sqr();
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MubReport {
    pub cross: [[f64; 2]; 2],
    pub gram_rotating: [[f64; 2]; 2],
    pub gram_frequency: [[f64; 2]; 2],
    /// Largest |cross − 1/2|.
    pub max_bias: f64,
}

pub fn mub_overlap_matrix(config: &Bb84Config) -> Result<MubReport> {
    let mut basis = ModeBasis::new(0.0);
    let [rot, freq] = bb84_states(&mut basis, config)?;
    let cross = overlap_matrix(&rot, &freq);
    let max_bias = cross.iter().flatten().fold(0.0f64, |acc, x| acc.max((x - 0.5).abs()));
    Ok(MubReport {
        cross,
        gram_rotating: overlap_matrix(&rot, &rot),
        gram_frequency: overlap_matrix(&freq, &freq),
        max_bias,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bb84Stats {
    pub trials: u64,
    pub sifted: u64,
    pub errors: u64,
    pub sifted_fraction: f64,
    pub qber: f64,
}

/// Trials per independent RNG stream.
const CHUNK: u64 = 4096;

/// Born-rule outcome of a projective measurement onto `states`.
fn measure(states: &[Coefficients; 2], photon: &Coefficients, rng: &mut ChaCha8Rng) -> usize {
    let p0 = states[0].overlap(photon).norm_sqr();
    let p1 = states[1].overlap(photon).norm_sqr();
    usize::from(rng.gen::<f64>() * (p0 + p1) >= p0)
}

fn random_basis(rng: &mut ChaCha8Rng) -> usize {
    usize::from(rng.gen::<bool>())
}

pub fn bb84_simulate(config: &Bb84Config) -> Result<Bb84Stats> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let mut basis = ModeBasis::new(0.0);
    let states = bb84_states(&mut basis, config)?;
    let chunks = config.trials.div_ceil(CHUNK);
    let counts: Vec<(u64, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(c);
            let n = CHUNK.min(config.trials - c * CHUNK);
            let (mut sifted, mut errors) = (0, 0);
            for _ in 0..n {
                let alice_basis = random_basis(&mut rng);
                let bit = usize::from(rng.gen::<bool>());
                let mut photon = states[alice_basis][bit].clone();
                let eve = match config.eavesdrop {
                    Eavesdropper::None => None,
                    Eavesdropper::InterceptResend(b) => Some(b.index()),
                    Eavesdropper::InterceptResendRandom => Some(random_basis(&mut rng)),
                };
                if let Some(e) = eve {
                    let outcome = measure(&states[e], &photon, &mut rng);
                    photon = states[e][outcome].clone();
                }
                let bob_basis = random_basis(&mut rng);
                let result = measure(&states[bob_basis], &photon, &mut rng);
                if bob_basis == alice_basis {
                    sifted += 1;
                    errors += u64::from(result != bit);
                }
            }
            (sifted, errors)
        })
        .collect();
    let (sifted, errors) = counts.iter().fold((0, 0), |(s, e), (a, b)| (s + a, e + b));
    Ok(Bb84Stats {
        trials: config.trials,
        sifted,
        errors,
        sifted_fraction: sifted as f64 / config.trials as f64,
        qber: if sifted > 0 { errors as f64 / sifted as f64 } else { 0.0 },
    })
}

/// Resolutions needed to tell the states of each basis apart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Complementarity {
    /// The frequency basis labels sit 2Ω apart; resolving them needs accuracy better than Ω.
    pub frequency_threshold: f64,
    pub label_separation: f64,
    /// b± differ by a delay of π/(2Ω); resolving them needs timing better than π/(4Ω).
    pub timing_threshold: f64,
    pub time_shift: f64,
    /// Phase φ with b+(t + π/(2Ω)) = φ b−(t).
    pub shift_phase: Complex64,
    /// Coefficient-level residual of that identity.
    pub shift_residual: f64,
}

pub fn measurement_complementarity(config: &Bb84Config) -> Result<Complementarity> {
    let mut basis = ModeBasis::new(0.0);
    let [[bp, bm], [up, down]] = bb84_states(&mut basis, config)?;
    let rot = config.rotation;
    let shift = PI / (2.0 * rot);
    let shift_phase = Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, -config.omega * shift);
    let shifted = bp.evolved(&basis, shift);
    let omega_of = |c: &Coefficients| basis.label(c.indices().next().expect("single label")).omega();
    Ok(Complementarity {
        frequency_threshold: rot,
        label_separation: omega_of(&up) - omega_of(&down),
        timing_threshold: PI / (4.0 * rot),
        time_shift: shift,
        shift_phase,
        shift_residual: shifted.max_abs_diff(&bm.scaled(shift_phase)),
    })
}
