//! Truncated Fock space over a [`ModeBasis`].
//!
//! States are stored sparsely: each configuration lists only the occupied
//! registry indices, and the total photon number never exceeds `n_max`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode::{ModeBasis, ModeLabel};
use crate::transforms::{Coefficients, Family, PairSpec, Sign};

/// Tolerance on ‖ψ‖² for operations that require a normalized state.
pub const NORM_TOL: f64 = 1e-10;

/// Occupied modes of one configuration, sorted by index, counts > 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occupation(Vec<(usize, u32)>);

impl Occupation {
    pub fn vacuum() -> Self {
        Self(Vec::new())
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|(_, n)| n).sum()
    }

    pub fn count(&self, index: usize) -> u32 {
        self.0.iter().find(|(i, _)| *i == index).map_or(0, |(_, n)| *n)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().copied()
    }

    fn raised(&self, index: usize) -> Self {
        let mut v = self.0.clone();
        match v.binary_search_by_key(&index, |(i, _)| *i) {
            Ok(p) => v[p].1 += 1,
            Err(p) => v.insert(p, (index, 1)),
        }
        Self(v)
    }

    fn lowered(&self, index: usize) -> Option<Self> {
        let mut v = self.0.clone();
        let p = v.binary_search_by_key(&index, |(i, _)| *i).ok()?;
        if v[p].1 == 1 {
            v.remove(p);
        } else {
            v[p].1 -= 1;
        }
        Some(Self(v))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    basis_id: u64,
    n_max: u32,
    amps: BTreeMap<Occupation, Complex64>,
}

impl FockState {
    pub fn vacuum(basis: &ModeBasis, n_max: u32) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidParameter("N_max must be at least 1".into()));
        }
        let mut amps = BTreeMap::new();
        amps.insert(Occupation::vacuum(), Complex64::new(1.0, 0.0));
        Ok(Self { basis_id: basis.id(), n_max, amps })
    }

    fn empty_like(&self) -> Self {
        Self { basis_id: self.basis_id, n_max: self.n_max, amps: BTreeMap::new() }
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn basis_id(&self) -> u64 {
        self.basis_id
    }

    pub fn amplitude(&self, occupation: &Occupation) -> Complex64 {
        self.amps.get(occupation).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.amps.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.norm_sqr() == 0.0
    }

    /// Scales to unit norm; a zero vector stays an error.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroProbabilityBranch);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.empty_like();
        out.amps = self.amps.iter().map(|(k, a)| (k.clone(), a * factor)).collect();
        out
    }

    /// `self + other` without renormalization.
    pub fn add(&self, other: &FockState) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (k, a) in &other.amps {
            *out.amps.entry(k.clone()).or_default() += a;
        }
        Ok(out)
    }

    /// Free evolution: each configuration picks up `exp(−i Σ n_k ω_k t)`.
    pub fn evolved(&self, basis: &ModeBasis, t: f64) -> Self {
        let mut out = self.empty_like();
        out.amps = self
            .amps
            .iter()
            .map(|(k, a)| {
                let energy: f64 = k.iter().map(|(i, n)| f64::from(n) * basis.label(i).omega()).sum();
                (k.clone(), a * Complex64::from_polar(1.0, -energy * t))
            })
            .collect();
        out
    }

    /// Single-photon amplitudes `⟨vac|a_k|ψ⟩` when every configuration
    /// holds exactly one photon.
    pub fn single_photon_coefficients(&self) -> Option<Coefficients> {
        let mut entries = Vec::new();
        for (occ, a) in &self.amps {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let mut it = occ.iter();
            match (it.next(), it.next()) {
                (Some((i, 1)), None) => entries.push((i, *a)),
                _ => return None,
            }
        }
        Some(Coefficients::new(entries))
    }

    fn check_compatible(&self, other: &FockState) -> Result<()> {
        if self.basis_id != other.basis_id || self.n_max != other.n_max {
            return Err(Error::BasisMismatch);
        }
        Ok(())
    }

    fn require_normalized(&self) -> Result<()> {
        let n2 = self.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::UnnormalizedState(n2));
        }
        Ok(())
    }
}

/// Applies `Σ_k c_k a_k†` without renormalizing.
pub fn create_raw(state: &FockState, mode: &Coefficients) -> Result<FockState> {
    let mut out = state.empty_like();
    for (occ, a) in &state.amps {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        if occ.total() >= state.n_max {
            return Err(Error::TruncationOverflow(state.n_max));
        }
        for (k, c) in mode.iter() {
            let factor = f64::from(occ.count(k) + 1).sqrt();
            *out.amps.entry(occ.raised(k)).or_default() += a * c * factor;
        }
    }
    Ok(out)
}

/// Creates one photon in `mode` and renormalizes.
/// Returns the new state and the norm it had before renormalization.
pub fn create(state: &FockState, mode: &Coefficients) -> Result<(FockState, f64)> {
    let raw = create_raw(state, mode)?;
    let norm = raw.norm();
    Ok((raw.normalized()?, norm))
}

/// Applies `Σ_k conj(c_k) a_k`; the result may be the zero vector.
pub fn annihilate(state: &FockState, mode: &Coefficients) -> (FockState, f64) {
    let mut out = state.empty_like();
    for (occ, a) in &state.amps {
        for (k, c) in mode.iter() {
            if let Some(lower) = occ.lowered(k) {
                let factor = f64::from(occ.count(k)).sqrt();
                *out.amps.entry(lower).or_default() += a * c.conj() * factor;
            }
        }
    }
    out.amps.retain(|_, a| a.norm_sqr() != 0.0);
    let norm = out.norm();
    (out, norm)
}

/// Diagonal single-mode observables; each photon in mode k contributes
/// the mode's eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Energy,
    Sz,
    Lz,
    Jz,
    Number,
}

impl Observable {
    pub fn eigenvalue(self, label: &ModeLabel) -> f64 {
        match self {
            Observable::Energy => label.omega(),
            Observable::Sz => f64::from(label.s()),
            Observable::Lz => f64::from(label.m()),
            Observable::Jz => f64::from(label.m() + label.s()),
            Observable::Number => 1.0,
        }
    }
}

pub fn expect(basis: &ModeBasis, state: &FockState, observable: Observable) -> Result<f64> {
    if state.basis_id != basis.id() {
        return Err(Error::BasisMismatch);
    }
    state.require_normalized()?;
    Ok(state
        .amps
        .iter()
        .map(|(occ, a)| {
            let value: f64 =
                occ.iter().map(|(k, n)| f64::from(n) * observable.eigenvalue(basis.label(k))).sum();
            a.norm_sqr() * value
        })
        .sum())
}

/// ⟨a|b⟩, conjugate-linear in the first argument.
pub fn inner(a: &FockState, b: &FockState) -> Result<Complex64> {
    a.check_compatible(b)?;
    Ok(a.amps.iter().map(|(k, x)| x.conj() * b.amplitude(k)).sum())
}

/// Destructive detection of one photon in `mode`.
///
/// The weight is ‖â|ψ⟩‖², the mean photon number in the mode; it is the
/// detection probability whenever the mode holds at most one photon. The
/// conditional state is the renormalized remainder.
pub fn project_mode(state: &FockState, mode: &Coefficients) -> Result<(f64, FockState)> {
    state.require_normalized()?;
    let (rest, norm) = annihilate(state, mode);
    let p = norm * norm;
    if p < 1e-24 {
        return Err(Error::ZeroProbabilityBranch);
    }
    Ok((p, rest.normalized()?))
}

/// Passes every photon through a passive linear network that sends
/// `a_k† → Σ_j U_{kj} a_j†`.
pub fn apply_linear_optics(state: &FockState, map: impl Fn(usize) -> Coefficients) -> Result<FockState> {
    let mut out = state.empty_like();
    let vacuum = {
        let mut v = state.empty_like();
        v.amps.insert(Occupation::vacuum(), Complex64::new(1.0, 0.0));
        v
    };
    for (occ, a) in &state.amps {
        let mut branch = vacuum.clone();
        let mut factorial = 1.0;
        for (k, n) in occ.iter() {
            let image = map(k);
            for j in 1..=n {
                branch = create_raw(&branch, &image)?;
                factorial *= f64::from(j);
            }
        }
        let weight = a / factorial.sqrt();
        for (k, b) in branch.amps {
            *out.amps.entry(k).or_default() += b * weight;
        }
    }
    out.amps.retain(|_, a| a.norm_sqr() != 0.0);
    Ok(out)
}

/// Energy and angular-momentum expectations of a state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub energy: f64,
    pub sz: f64,
    pub lz: f64,
    pub jz: f64,
}

impl Moments {
    pub fn max_abs_diff(&self, other: &Moments) -> f64 {
        [self.energy - other.energy, self.sz - other.sz, self.lz - other.lz, self.jz - other.jz]
            .iter()
            .fold(0.0, |acc, d| acc.max(d.abs()))
    }
}

pub fn moments(basis: &ModeBasis, state: &FockState) -> Result<Moments> {
    Ok(Moments {
        energy: expect(basis, state, Observable::Energy)?,
        sz: expect(basis, state, Observable::Sz)?,
        lz: expect(basis, state, Observable::Lz)?,
        jz: expect(basis, state, Observable::Jz)?,
    })
}

/// Single-photon moments of a rotating-family member in closed form.
///
/// Balanced families carry energy ω; the θ-weighted g and h members
/// carry ∓Δ/ω of the rotated quantum number and energy ω ∓ Δ²/ω.
pub fn closed_form_moments(family: Family, sign: Sign, spec: &PairSpec) -> Result<Moments> {
    let (w, m, s) = (spec.omega, f64::from(spec.m), f64::from(spec.s));
    let delta = spec.shift(family);
    let skew = -sign.value() * delta / w;
    let (energy, sz, lz) = match family {
        Family::A => return Err(Error::InvalidParameter("family a has no closed form pair".into())),
        Family::B => (w, 0.0, m),
        Family::C => (w, s, 0.0),
        Family::D | Family::E | Family::F => (w, 0.0, 0.0),
        Family::G => (w + skew * delta, skew * s, m),
        Family::H => (w + skew * delta, s, skew * m),
    };
    Ok(Moments { energy, sz, lz, jz: sz + lz })
}
