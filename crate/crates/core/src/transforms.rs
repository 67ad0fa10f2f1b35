//! Rotating-mode families as unitary superpositions of monochromatic modes.
//!
//! A [`SuperpositionMode`] stores the field-mode coefficients `U_k` of
//! `E' = Σ_k U_k E_k`. The matching annihilator is `Σ_k conj(U_k) a_k`, so a
//! single photon created in the mode has amplitude `U_k` on label `k`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode::{theta_weights, ModeBasis, ModeLabel, Site, ThetaWeights, TransverseIndex};

/// Sparse complex coefficient vector over registry indices.
///
/// Entries keep their insertion order, so for a built pair the first entry is
/// always the up-shifted label and the second the down-shifted one.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Coefficients {
    entries: Vec<(usize, Complex64)>,
}

impl Coefficients {
    /// Collects entries, summing repeated indices.
    pub fn new(entries: impl IntoIterator<Item = (usize, Complex64)>) -> Self {
        let mut out: Vec<(usize, Complex64)> = Vec::new();
        for (i, c) in entries {
            match out.iter_mut().find(|(j, _)| *j == i) {
                Some((_, acc)) => *acc += c,
                None => out.push((i, c)),
            }
        }
        Self { entries: out }
    }

    pub fn single(index: usize) -> Self {
        Self { entries: vec![(index, Complex64::new(1.0, 0.0))] }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> Complex64 {
        self.entries
            .iter()
            .find(|(i, _)| *i == index)
            .map_or(Complex64::new(0.0, 0.0), |(_, c)| *c)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|(i, _)| *i)
    }

    /// Number of entries with |c| above `tol`.
    pub fn support(&self, tol: f64) -> usize {
        self.entries.iter().filter(|(_, c)| c.norm() > tol).count()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|(_, c)| c.norm_sqr()).sum()
    }

    /// ⟨self|other⟩ = Σ conj(self_k) other_k. For two built modes this is the
    /// commutator [û, v̂†].
    pub fn overlap(&self, other: &Coefficients) -> Complex64 {
        self.entries.iter().map(|(i, c)| c.conj() * other.get(*i)).sum()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { entries: self.entries.iter().map(|(i, c)| (*i, c * factor)).collect() }
    }

    /// Linear combination `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &Coefficients, b: Complex64) -> Self {
        Self::new(self.scaled(a).entries.into_iter().chain(other.scaled(b).entries))
    }

    /// Free evolution by `tau`: each component picks up `exp(−i ω_k τ)`.
    pub fn evolved(&self, basis: &ModeBasis, tau: f64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|(i, c)| (*i, c * Complex64::from_polar(1.0, -basis.label(*i).omega() * tau)))
                .collect(),
        }
    }

    /// Largest componentwise distance `|self_k − other_k|` over the union of supports.
    pub fn max_abs_diff(&self, other: &Coefficients) -> f64 {
        self.indices()
            .chain(other.indices())
            .map(|i| (self.get(i) - other.get(i)).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
}

impl Family {
    pub const ROTATING: [Family; 7] =
        [Family::B, Family::C, Family::D, Family::E, Family::F, Family::G, Family::H];

    /// Families with equal 1/√2 weights and zero mean angular momentum.
    pub fn is_balanced(self) -> bool {
        matches!(self, Family::B | Family::C | Family::D | Family::E | Family::F)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Family::A => "a",
            Family::B => "b",
            Family::C => "c",
            Family::D => "d",
            Family::E => "e",
            Family::F => "f",
            Family::G => "g",
            Family::H => "h",
        };
        f.write_str(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// A unit-norm superposition mode together with how it was built.
#[derive(Clone, Debug, Serialize)]
pub struct SuperpositionMode {
    pub coefficients: Coefficients,
    pub nominal_omega: f64,
    pub family: Family,
    pub sign: Sign,
    /// Ω; for family `e` the orbital rotation rate.
    pub rotation: f64,
    /// Ω′ for family `e`, the polarization rotation rate.
    pub rotation2: Option<f64>,
}

/// Parameters shared by all pair builders.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSpec {
    pub omega: f64,
    /// Ω
    pub rotation: f64,
    /// Ω′, used by family `e` only.
    pub rotation2: f64,
    pub m: i32,
    pub s: i32,
    pub transverse: TransverseIndex,
    pub site: Site,
}

impl PairSpec {
    pub fn new(omega: f64, rotation: f64, m: i32, s: i32, transverse: TransverseIndex) -> Self {
        Self { omega, rotation, rotation2: rotation, m, s, transverse, site: Site::Unassigned }
    }

    pub fn at_site(self, site: Site) -> Self {
        Self { site, ..self }
    }

    pub fn with_rotation2(self, rotation2: f64) -> Self {
        Self { rotation2, ..self }
    }

    /// Frequency shift Δ applied to the first label of `family`'s pair.
    pub fn shift(&self, family: Family) -> f64 {
        let (m, s) = (f64::from(self.m), f64::from(self.s));
        match family {
            Family::A => 0.0,
            Family::B | Family::G => self.rotation * s,
            Family::C | Family::H => self.rotation * m,
            Family::D => self.rotation * (m + s),
            Family::E => self.rotation * m + self.rotation2 * s,
            Family::F => self.rotation,
        }
    }

    /// The two (m, s) assignments of `family`'s pair, up-shifted label first.
    fn quantum_numbers(&self, family: Family) -> [(i32, i32); 2] {
        let (m, s) = (self.m, self.s);
        match family {
            Family::A => [(m, s), (m, s)],
            Family::B | Family::G => [(m, s), (m, -s)],
            Family::C | Family::H => [(m, s), (-m, s)],
            Family::D | Family::E => [(m, s), (-m, -s)],
            Family::F => [(1, -1), (-1, 1)],
        }
    }
}

/// Registers the two labels of `family`'s pair and returns their indices
/// (up-shifted first) along with the shift Δ.
pub fn pair_labels(basis: &mut ModeBasis, family: Family, spec: &PairSpec) -> Result<([usize; 2], f64)> {
    if family == Family::A {
        return Err(Error::InvalidParameter("family a is a single mode, not a pair".into()));
    }
    if matches!(family, Family::C | Family::H) && spec.m == 0 {
        return Err(Error::DegenerateOrbitalPair);
    }
    if spec.s != 1 && spec.s != -1 {
        return Err(Error::BadHelicity(spec.s));
    }
    if !(spec.omega > 0.0 && spec.omega.is_finite()) {
        return Err(Error::NonPositiveFrequency(spec.omega));
    }
    let delta = spec.shift(family);
    if !delta.is_finite() || delta.abs() >= spec.omega {
        return Err(Error::ShiftExceedsFrequency { delta, omega: spec.omega });
    }
    if matches!(family, Family::D | Family::E) && delta == 0.0 {
        return Err(Error::DegeneratePair);
    }
    let [(m1, s1), (m2, s2)] = spec.quantum_numbers(family);
    let up = ModeLabel::new(spec.omega + delta, m1, s1, spec.transverse, spec.site)?;
    let down = ModeLabel::new(spec.omega - delta, m2, s2, spec.transverse, spec.site)?;
    if up.same_mode(&down) {
        return Err(Error::DegeneratePair);
    }
    Ok(([basis.register(up), basis.register(down)], delta))
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Builds the (+, −) members of any rotating family.
pub fn build_pair(
    basis: &mut ModeBasis,
    family: Family,
    spec: &PairSpec,
) -> Result<(SuperpositionMode, SuperpositionMode)> {
    let ([up, down], delta) = pair_labels(basis, family, spec)?;
    let (plus, minus) = match family {
        Family::G | Family::H => {
            let w = theta_weights(spec.omega, delta)?;
            (
                [(up, real(w.sin_theta)), (down, real(w.cos_theta))],
                [(up, real(w.cos_theta)), (down, real(-w.sin_theta))],
            )
        }
        _ => (
            [(up, real(FRAC_1_SQRT_2)), (down, real(FRAC_1_SQRT_2))],
            [(up, real(FRAC_1_SQRT_2)), (down, real(-FRAC_1_SQRT_2))],
        ),
    };
    let rotation2 = (family == Family::E).then_some(spec.rotation2);
    let make = |entries: [(usize, Complex64); 2], sign| SuperpositionMode {
        coefficients: Coefficients::new(entries),
        nominal_omega: spec.omega,
        family,
        sign,
        rotation: spec.rotation,
        rotation2,
    };
    Ok((make(plus, Sign::Plus), make(minus, Sign::Minus)))
}

/// b± = (a_{ω+Ωs,m,s} ± a_{ω−Ωs,m,−s})/√2: rotating polarization.
pub fn build_b_pair(basis: &mut ModeBasis, spec: &PairSpec) -> Result<(SuperpositionMode, SuperpositionMode)> {
    build_pair(basis, Family::B, spec)
}

/// c± = (a_{ω+Ωm,m,s} ± a_{ω−Ωm,−m,s})/√2: rotating transverse pattern.
pub fn build_c_pair(basis: &mut ModeBasis, spec: &PairSpec) -> Result<(SuperpositionMode, SuperpositionMode)> {
    build_pair(basis, Family::C, spec)
}

/// d±: pattern and polarization rotating together, shift Ω(m+s).
pub fn build_d_pair(basis: &mut ModeBasis, spec: &PairSpec) -> Result<(SuperpositionMode, SuperpositionMode)> {
    build_pair(basis, Family::D, spec)
}

/// e±: pattern at Ω and polarization at Ω′, shift Ωm + Ω′s.
pub fn build_e_pair(basis: &mut ModeBasis, spec: &PairSpec) -> Result<(SuperpositionMode, SuperpositionMode)> {
    build_pair(basis, Family::E, spec)
}

/// f± = (a_{ω+Ω,+1,−1} ± a_{ω−Ω,−1,+1})/√2. `spec.m` and `spec.s` are ignored.
pub fn build_f_pair(basis: &mut ModeBasis, spec: &PairSpec) -> Result<(SuperpositionMode, SuperpositionMode)> {
    build_pair(basis, Family::F, spec)
}

/// g± with θ-weights for Δ = Ωs; g+ has a constant-length rotating E field.
pub fn build_g_pair(basis: &mut ModeBasis, spec: &PairSpec) -> Result<(SuperpositionMode, SuperpositionMode)> {
    build_pair(basis, Family::G, spec)
}

/// h± with θ-weights for Δ = mΩ.
pub fn build_h_pair(basis: &mut ModeBasis, spec: &PairSpec) -> Result<(SuperpositionMode, SuperpositionMode)> {
    build_pair(basis, Family::H, spec)
}

/// θ-weights used by a g or h pair.
pub fn pair_theta(family: Family, spec: &PairSpec) -> Result<ThetaWeights> {
    theta_weights(spec.omega, spec.shift(family))
}

/// A single monochromatic mode (family `a`).
pub fn single_mode(basis: &mut ModeBasis, label: ModeLabel) -> SuperpositionMode {
    let index = basis.register(label);
    SuperpositionMode {
        coefficients: Coefficients::single(index),
        nominal_omega: label.omega(),
        family: Family::A,
        sign: Sign::Plus,
        rotation: 0.0,
        rotation2: None,
    }
}

/// Rows of a mode transformation `E'_i = Σ_j U_ij E_j`.
#[derive(Clone, Debug, Default)]
pub struct UnitaryModeMap {
    pub rows: Vec<Coefficients>,
}

impl UnitaryModeMap {
    pub fn new(rows: Vec<Coefficients>) -> Self {
        Self { rows }
    }

    pub fn from_pair(pair: &(SuperpositionMode, SuperpositionMode)) -> Self {
        Self { rows: vec![pair.0.coefficients.clone(), pair.1.coefficients.clone()] }
    }

    pub fn residual(&self) -> f64 {
        verify_unitary(&self.rows)
    }
}

/// Max entry of |G − I| for the row Gram matrix `G_ij = ⟨row_i|row_j⟩`.
pub fn verify_unitary(rows: &[Coefficients]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, ri) in rows.iter().enumerate() {
        for (j, rj) in rows.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((ri.overlap(rj) - target).norm());
        }
    }
    worst
}

/// A mode inverter (half-wave plate or mode converter) spinning at `angular_rate`.
/// The output pattern rotates at twice the plate rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotatingPlate {
    pub angular_rate: f64,
}

impl RotatingPlate {
    pub fn new(angular_rate: f64) -> Self {
        Self { angular_rate }
    }

    /// Rotation rate Ω imprinted on the output.
    pub fn mode_rotation_rate(&self) -> f64 {
        2.0 * self.angular_rate
    }
}

/// Rotating half-wave plate: (ω, m, s) → (ω − sΩ, m, −s).
pub fn inverter_map_polarization(label: &ModeLabel, plate: RotatingPlate) -> Result<ModeLabel> {
    let omega = label.omega() - f64::from(label.s()) * plate.mode_rotation_rate();
    ModeLabel::new(omega, label.m(), -label.s(), label.transverse(), label.site())
}

/// Rotating mode converter: (ω, m, s) → (ω − mΩ, −m, s).
pub fn inverter_map_orbital(label: &ModeLabel, plate: RotatingPlate) -> Result<ModeLabel> {
    let omega = label.omega() - f64::from(label.m()) * plate.mode_rotation_rate();
    ModeLabel::new(omega, -label.m(), label.s(), label.transverse(), label.site())
}

/// Applies a label map termwise to a superposition, registering new labels.
pub fn map_coefficients(
    basis: &mut ModeBasis,
    coefficients: &Coefficients,
    map: impl Fn(&ModeLabel) -> Result<ModeLabel>,
) -> Result<Coefficients> {
    let mut out = Vec::with_capacity(coefficients.len());
    for (i, c) in coefficients.iter() {
        let target = map(basis.label(i))?;
        out.push((basis.register(target), c));
    }
    Ok(Coefficients::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const T: TransverseIndex = TransverseIndex::Bessel { kt: 0.05 };

    fn spec(omega: f64, rot: f64, m: i32, s: i32) -> PairSpec {
        PairSpec::new(omega, rot, m, s, T)
    }

    #[test]
    fn b_pair_coefficients() {
        let mut basis = ModeBasis::new(0.0);
        let (bp, bm) = build_b_pair(&mut basis, &spec(1.0, 0.01, 0, 1)).unwrap();
        let idx: Vec<_> = bp.coefficients.indices().collect();
        let up = basis.label(idx[0]);
        let down = basis.label(idx[1]);
        assert!((up.omega() - 1.01).abs() < 1e-15 && up.s() == 1 && up.m() == 0);
        assert!((down.omega() - 0.99).abs() < 1e-15 && down.s() == -1);
        for (_, c) in bp.coefficients.iter() {
            assert!((c.re - FRAC_1_SQRT_2).abs() < 1e-16);
        }
        assert!(bp.coefficients.overlap(&bm.coefficients).norm() < 1e-16);
    }

    #[test]
    fn b_pair_static_limit_is_linear_polarization() {
        let mut basis = ModeBasis::new(0.0);
        let (bp, _) = build_b_pair(&mut basis, &spec(1.0, 0.0, 0, 1)).unwrap();
        let labels: Vec<_> = bp.coefficients.indices().map(|i| *basis.label(i)).collect();
        assert_eq!(labels[0].omega(), 1.0);
        assert_eq!(labels[1].omega(), 1.0);
        assert_eq!((labels[0].s(), labels[1].s()), (1, -1));
    }

    #[test]
    fn c_pair() {
        let mut basis = ModeBasis::new(0.0);
        let (cp, cm) = build_c_pair(&mut basis, &spec(1.0, 0.01, 2, 1)).unwrap();
        let labels: Vec<_> = cp.coefficients.indices().map(|i| *basis.label(i)).collect();
        assert!((labels[0].omega() - 1.02).abs() < 1e-15 && labels[0].m() == 2);
        assert!((labels[1].omega() - 0.98).abs() < 1e-15 && labels[1].m() == -2);
        assert!(cp.coefficients.overlap(&cm.coefficients).norm() < 1e-16);
        assert_eq!(
            build_c_pair(&mut basis, &spec(1.0, 0.01, 0, 1)).unwrap_err(),
            Error::DegenerateOrbitalPair
        );
    }

    #[test]
    fn d_e_f_pairs() {
        let mut basis = ModeBasis::new(0.0);
        let (fp, _) = build_f_pair(&mut basis, &spec(1.0, 0.01, 0, 1)).unwrap();
        let labels: Vec<_> = fp.coefficients.indices().map(|i| *basis.label(i)).collect();
        assert!((labels[0].omega() - 1.01).abs() < 1e-15);
        assert_eq!((labels[0].m(), labels[0].s()), (1, -1));
        assert!((labels[1].omega() - 0.99).abs() < 1e-15);
        assert_eq!((labels[1].m(), labels[1].s()), (-1, 1));

        let s = spec(1.0, 0.01, 2, 1);
        let d = build_d_pair(&mut basis, &s).unwrap();
        let e = build_e_pair(&mut basis, &s.with_rotation2(0.01)).unwrap();
        assert_eq!(d.0.coefficients, e.0.coefficients);
        assert_eq!(d.1.coefficients, e.1.coefficients);

        assert_eq!(build_d_pair(&mut basis, &spec(1.0, 0.01, 1, -1)).unwrap_err(), Error::DegeneratePair);
        assert_eq!(
            build_e_pair(&mut basis, &spec(1.0, 0.01, 1, 1).with_rotation2(-0.01)).unwrap_err(),
            Error::DegeneratePair
        );
    }

    #[test]
    fn shift_bounds() {
        let mut basis = ModeBasis::new(0.0);
        assert!(matches!(
            build_c_pair(&mut basis, &spec(1.0, 0.6, 2, 1)),
            Err(Error::ShiftExceedsFrequency { .. })
        ));
        assert!(matches!(
            build_b_pair(&mut basis, &spec(1.0, 1.0, 0, 1)),
            Err(Error::ShiftExceedsFrequency { .. })
        ));
    }

    #[test]
    fn g_pair_weights() {
        let mut basis = ModeBasis::new(0.0);
        let (gp, gm) = build_g_pair(&mut basis, &spec(100.0, 1.0, 0, 1)).unwrap();
        let w: Vec<_> = gp.coefficients.iter().map(|(_, c)| c.norm_sqr()).collect();
        // sin²θ = 99/200 on ω+Ω, cos²θ = 101/200 on ω−Ω
        assert!((w[0] - 99.0 / 200.0).abs() < 1e-15);
        assert!((w[1] - 101.0 / 200.0).abs() < 1e-15);
        assert!(gp.coefficients.overlap(&gm.coefficients).norm() < 1e-16);
        assert!(UnitaryModeMap::from_pair(&(gp, gm)).residual() < 1e-12);

        // Ω = 0: equal weights, same support as b with the ± rows in the same order.
        let (g0, _) = build_g_pair(&mut basis, &spec(1.0, 0.0, 0, 1)).unwrap();
        let (b0, _) = build_b_pair(&mut basis, &spec(1.0, 0.0, 0, 1)).unwrap();
        assert!(g0.coefficients.max_abs_diff(&b0.coefficients) < 1e-16);
    }

    #[test]
    fn h_pair_weights() {
        let mut basis = ModeBasis::new(0.0);
        let (hp, hm) = build_h_pair(&mut basis, &spec(100.0, 1.0, 2, 1)).unwrap();
        let w: Vec<_> = hp.coefficients.iter().map(|(_, c)| c.norm_sqr()).collect();
        assert!((w[0] - 98.0 / 200.0).abs() < 1e-15);
        assert!((w[1] - 102.0 / 200.0).abs() < 1e-15);
        assert!(hp.coefficients.overlap(&hm.coefficients).norm() < 1e-16);

        // m → −m: the sin θ label becomes (ω−2Ω, −2) with sin²θ = 102/200.
        let (hn, _) = build_h_pair(&mut basis, &spec(100.0, 1.0, -2, 1)).unwrap();
        let (i0, c0) = hn.coefficients.iter().next().unwrap();
        assert_eq!(basis.label(i0).m(), -2);
        assert!((basis.label(i0).omega() - 98.0).abs() < 1e-12);
        assert!((c0.norm_sqr() - 102.0 / 200.0).abs() < 1e-15);
    }

    #[test]
    fn unitarity_residual() {
        let rows = vec![Coefficients::single(0), Coefficients::single(0)];
        assert!((verify_unitary(&rows) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inverter_maps() {
        let plate = RotatingPlate::new(0.01);
        let l = ModeLabel::new(1.0, 0, 1, T, Site::Unassigned).unwrap();
        let out = inverter_map_polarization(&l, plate).unwrap();
        assert!((out.omega() - 0.98).abs() < 1e-15 && out.s() == -1 && out.m() == 0);
        let l = ModeLabel::new(1.0, 0, -1, T, Site::Unassigned).unwrap();
        let out = inverter_map_polarization(&l, plate).unwrap();
        assert!((out.omega() - 1.02).abs() < 1e-15 && out.s() == 1);

        let l = ModeLabel::new(1.0, 1, 1, T, Site::Unassigned).unwrap();
        let out = inverter_map_orbital(&l, plate).unwrap();
        assert!((out.omega() - 0.98).abs() < 1e-15 && out.m() == -1 && out.s() == 1);
        let l0 = ModeLabel::new(1.0, 0, 1, T, Site::Unassigned).unwrap();
        assert!(inverter_map_orbital(&l0, plate).unwrap().same_mode(&l0));

        let l = ModeLabel::new(0.01, 0, 1, TransverseIndex::LaguerreGauss { radial: 0, waist: 1.0 }, Site::A)
            .unwrap();
        assert!(matches!(inverter_map_polarization(&l, plate), Err(Error::NonPositiveFrequency(_))));
    }

    #[test]
    fn rotating_half_wave_plate_makes_b_plus() {
        let mut basis = ModeBasis::new(0.0);
        let omega = 1.0;
        let plate = RotatingPlate::new(0.005);
        let rot = plate.mode_rotation_rate();
        let p = ModeLabel::new(omega, 0, 1, T, Site::Unassigned).unwrap();
        let linear = Coefficients::new([
            (basis.register(p), real(FRAC_1_SQRT_2)),
            (basis.register(ModeLabel::new(omega, 0, -1, T, Site::Unassigned).unwrap()), real(FRAC_1_SQRT_2)),
        ]);
        let out = map_coefficients(&mut basis, &linear, |l| inverter_map_polarization(l, plate)).unwrap();
        let (bp, _) = build_b_pair(&mut basis, &spec(omega, rot, 0, 1)).unwrap();
        assert!(out.max_abs_diff(&bp.coefficients) < 1e-15);
    }

    #[test]
    fn rotating_mode_converter_makes_c_plus() {
        let mut basis = ModeBasis::new(0.0);
        let plate = RotatingPlate::new(0.005);
        let m = 2;
        let a = ModeLabel::new(1.0, m, 1, T, Site::Unassigned).unwrap();
        let b = ModeLabel::new(1.0, -m, 1, T, Site::Unassigned).unwrap();
        let input = Coefficients::new([
            (basis.register(a), real(FRAC_1_SQRT_2)),
            (basis.register(b), real(FRAC_1_SQRT_2)),
        ]);
        let out = map_coefficients(&mut basis, &input, |l| inverter_map_orbital(l, plate)).unwrap();
        let (cp, _) = build_c_pair(&mut basis, &spec(1.0, plate.mode_rotation_rate(), m, 1)).unwrap();
        assert!(out.max_abs_diff(&cp.coefficients) < 1e-15);
    }

    #[test]
    fn time_shift_swaps_b_modes() {
        let mut basis = ModeBasis::new(0.0);
        let (omega, rot) = (1.0, 0.01);
        let (bp, bm) = build_b_pair(&mut basis, &spec(omega, rot, 0, 1)).unwrap();
        let tau = PI / (2.0 * rot);
        let phase = Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, -PI * omega / (2.0 * rot));
        let shifted = bp.coefficients.evolved(&basis, tau);
        assert!(shifted.max_abs_diff(&bm.coefficients.scaled(phase)) < 1e-12);
        let shifted = bm.coefficients.evolved(&basis, tau);
        assert!(shifted.max_abs_diff(&bp.coefficients.scaled(phase)) < 1e-12);
    }

    #[test]
    fn time_shift_swaps_c_modes() {
        let mut basis = ModeBasis::new(0.0);
        let (omega, rot, m) = (1.0, 0.01, 3);
        let (cp, cm) = build_c_pair(&mut basis, &spec(omega, rot, m, 1)).unwrap();
        let tau = PI / (2.0 * f64::from(m) * rot);
        let phase = Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, -PI * omega / (2.0 * f64::from(m) * rot));
        assert!(cp.coefficients.evolved(&basis, tau).max_abs_diff(&cm.coefficients.scaled(phase)) < 1e-12);
        assert!(cm.coefficients.evolved(&basis, tau).max_abs_diff(&cp.coefficients.scaled(phase)) < 1e-12);
    }

    #[test]
    fn evolved_b_plus_decomposes_into_pair() {
        let mut basis = ModeBasis::new(0.0);
        let (omega, rot) = (1.0, 0.01);
        let (bp, bm) = build_b_pair(&mut basis, &spec(omega, rot, 0, 1)).unwrap();
        for k in 0..32 {
            let tau = f64::from(k) * 7.3;
            let evolved = bp.coefficients.evolved(&basis, tau);
            let global = Complex64::from_polar(1.0, -omega * tau);
            // Projections on b± have magnitudes |cos Ωτ| and |sin Ωτ|; the b−
            // component carries an extra −i relative to the real rotation.
            let expected = bp.coefficients.combine(
                global * (rot * tau).cos(),
                &bm.coefficients,
                global * Complex64::new(0.0, -(rot * tau).sin()),
            );
            assert!(evolved.max_abs_diff(&expected) < 1e-12);
        }
    }
}
