//! Discrete monochromatic mode basis.
//!
//! Every mode is labelled by its angular frequency, orbital index `m`,
//! helicity `s` and a transverse quantum number. Units are ħ = c = ε₀ = 1.
//! All rotating modes elsewhere in the crate are superpositions over a
//! [`ModeBasis`], and Fock states index into the same registry.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on k_T / ω for Bessel modes.
pub const DEFAULT_PARAXIAL_LIMIT: f64 = 0.1;

/// Relative tolerance used when deciding that two frequencies (or transverse
/// parameters) denote the same mode. Labels produced by different arithmetic
/// routes, e.g. `0.99 + 0.01` and `1.0`, must land on the same registry entry.
const LABEL_RTOL: f64 = 1e-12;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= LABEL_RTOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Remaining transverse degree of freedom of a paraxial mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TransverseIndex {
    /// Bessel beam with transverse wavenumber `kt`.
    Bessel { kt: f64 },
    /// Laguerre-Gauss beam with `radial` nodes and waist `waist`, taken at its focus.
    LaguerreGauss { radial: u32, waist: f64 },
}

impl TransverseIndex {
    fn same(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Bessel { kt: a }, Self::Bessel { kt: b }) => close(*a, *b),
            (
                Self::LaguerreGauss { radial: p, waist: w },
                Self::LaguerreGauss { radial: q, waist: v },
            ) => p == q && close(*w, *v),
            _ => false,
        }
    }

    /// Characteristic transverse length: 1/k_T for Bessel, the waist for LG.
    pub fn length_scale(&self) -> f64 {
        match *self {
            Self::Bessel { kt } => 1.0 / kt,
            Self::LaguerreGauss { waist, .. } => waist,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::Bessel { kt } if !(kt > 0.0 && kt.is_finite()) => Err(Error::InvalidParameter(
                format!("Bessel k_T must be positive, got {kt}"),
            )),
            Self::LaguerreGauss { waist, .. } if !(waist > 0.0 && waist.is_finite()) => Err(
                Error::InvalidParameter(format!("LG waist must be positive, got {waist}")),
            ),
            _ => Ok(()),
        }
    }
}

/// Location tag for bipartite states. Modes at different sites are distinct.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Site {
    A,
    B,
    Unassigned,
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::A => f.write_str("A"),
            Site::B => f.write_str("B"),
            Site::Unassigned => f.write_str("-"),
        }
    }
}

/// One monochromatic basis mode `(ω, m, s)` plus transverse index and site.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeLabel {
    omega: f64,
    m: i32,
    s: i32,
    transverse: TransverseIndex,
    site: Site,
}

impl ModeLabel {
    pub fn new(omega: f64, m: i32, s: i32, transverse: TransverseIndex, site: Site) -> Result<Self> {
        Self::with_paraxial_limit(omega, m, s, transverse, site, DEFAULT_PARAXIAL_LIMIT)
    }

    pub fn with_paraxial_limit(
        omega: f64,
        m: i32,
        s: i32,
        transverse: TransverseIndex,
        site: Site,
        paraxial_limit: f64,
    ) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::NonPositiveFrequency(omega));
        }
        if s != 1 && s != -1 {
            return Err(Error::BadHelicity(s));
        }
        transverse.validate()?;
        if let TransverseIndex::Bessel { kt } = transverse {
            if kt > paraxial_limit * omega {
                return Err(Error::ParaxialityViolated { kt, omega, limit: paraxial_limit });
            }
        }
        Ok(Self { omega, m, s, transverse, site })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn m(&self) -> i32 {
        self.m
    }
    pub fn s(&self) -> i32 {
        self.s
    }
    pub fn transverse(&self) -> TransverseIndex {
        self.transverse
    }
    pub fn site(&self) -> Site {
        self.site
    }

    /// Same quantum numbers at another frequency; validated again.
    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Self::new(omega, self.m, self.s, self.transverse, self.site)
    }

    pub fn with_site(&self, site: Site) -> Self {
        Self { site, ..*self }
    }

    /// True when both labels name the same registry mode.
    pub fn same_mode(&self, other: &Self) -> bool {
        self.m == other.m
            && self.s == other.s
            && self.site == other.site
            && close(self.omega, other.omega)
            && self.transverse.same(&other.transverse)
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(ω={}, m={}, s={:+}, site={})", self.omega, self.m, self.s, self.site)
    }
}

static NEXT_BASIS_ID: AtomicU64 = AtomicU64::new(1);

/// Ordered registry of distinct modes sharing one reference plane `z0`.
#[derive(Clone, Debug)]
pub struct ModeBasis {
    id: u64,
    z0: f64,
    labels: Vec<ModeLabel>,
}

impl Default for ModeBasis {
    fn default() -> Self {
        Self::new(0.0)
    }
}

impl ModeBasis {
    pub fn new(z0: f64) -> Self {
        Self { id: NEXT_BASIS_ID.fetch_add(1, Ordering::Relaxed), z0, labels: Vec::new() }
    }

    /// Registry identity; Fock states remember it to catch cross-registry mixing.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    /// Appends `label` unless an equal mode is present; returns its index.
    pub fn register(&mut self, label: ModeLabel) -> usize {
        match self.index_of(&label) {
            Some(i) => i,
            None => {
                self.labels.push(label);
                self.labels.len() - 1
            }
        }
    }

    pub fn index_of(&self, label: &ModeLabel) -> Option<usize> {
        self.labels.iter().position(|l| l.same_mode(label))
    }

    pub fn get(&self, index: usize) -> Option<&ModeLabel> {
        self.labels.get(index)
    }

    /// Label at `index`. Panics on an index this registry never handed out.
    pub fn label(&self, index: usize) -> &ModeLabel {
        &self.labels[index]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ModeLabel> {
        self.labels.iter()
    }
}

/// Unequal superposition weights for a pair shifted by ±Δ around ω:
/// cos²θ = (ω+Δ)/2ω, sin²θ = (ω−Δ)/2ω.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaWeights {
    pub omega: f64,
    pub delta: f64,
    pub cos_theta: f64,
    pub sin_theta: f64,
}

impl ThetaWeights {
    /// (cos θ + sin θ)/√2, the major-axis weight of the b-mode polarization ellipse.
    pub fn a_plus(&self) -> f64 {
        (self.cos_theta + self.sin_theta) / std::f64::consts::SQRT_2
    }

    /// (cos θ − sin θ)/√2.
    pub fn a_minus(&self) -> f64 {
        (self.cos_theta - self.sin_theta) / std::f64::consts::SQRT_2
    }

    pub fn theta(&self) -> f64 {
        self.sin_theta.atan2(self.cos_theta)
    }
}

pub fn theta_weights(omega: f64, delta: f64) -> Result<ThetaWeights> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::NonPositiveFrequency(omega));
    }
    if !delta.is_finite() || delta.abs() > omega {
        return Err(Error::ShiftExceedsFrequency { delta, omega });
    }
    Ok(ThetaWeights {
        omega,
        delta,
        cos_theta: ((omega + delta) / (2.0 * omega)).sqrt(),
        sin_theta: ((omega - delta) / (2.0 * omega)).sqrt(),
    })
}
