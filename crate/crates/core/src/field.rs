//! Reference-plane fields of superposition modes.
//!
//! The detection amplitude `⟨vac|Ê(r,t)|1⟩` of a photon in a mode with
//! coefficients `U_k` is `Σ_k U_k √ω_k e^{i m_k φ} e^{−i ω_k t} F_k(ρ,z) e_{s_k}`,
//! with the transverse profile `F` normalized in each transverse plane. The
//! vector potential swaps `√ω_k` for `−i/√ω_k`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mode::{ModeBasis, ModeLabel, TransverseIndex};
use crate::special::{bessel_j, laguerre};
use crate::transforms::Coefficients;

/// Bessel beams are not square integrable; each is normalized over a disk of
/// radius `BESSEL_APERTURE / k_T` and vanishes outside it.
pub const BESSEL_APERTURE: f64 = 40.0;

/// Global field prefactor multiplying `√ω` (ħ = c = ε₀ = 1 units).
pub const FIELD_PREFACTOR: f64 = 1.0;

/// Bins used by the azimuthal cross-correlation estimator.
pub const AZIMUTH_BINS: usize = 256;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Transverse field as Cartesian components `(E_x, E_y)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Jones {
    pub x: Complex64,
    pub y: Complex64,
}

impl Jones {
    pub fn new(x: Complex64, y: Complex64) -> Self {
        Self { x, y }
    }

    /// Circular basis vector e_s = (e_x + i s e_y)/√2.
    pub fn helicity(s: i32) -> Self {
        Self::new(Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(0.0, f64::from(s) * FRAC_1_SQRT_2))
    }

    /// Builds `E_+ e_+ + E_- e_-`.
    pub fn from_circular(plus: Complex64, minus: Complex64) -> Self {
        Self::new((plus + minus) * FRAC_1_SQRT_2, I * (plus - minus) * FRAC_1_SQRT_2)
    }

    /// `(E_+, E_-)` with `E_± = e_±* · E`.
    pub fn to_circular(self) -> (Complex64, Complex64) {
        ((self.x - I * self.y) * FRAC_1_SQRT_2, (self.x + I * self.y) * FRAC_1_SQRT_2)
    }

    pub fn scale(self, c: Complex64) -> Self {
        Self::new(self.x * c, self.y * c)
    }

    pub fn intensity(self) -> f64 {
        self.x.norm_sqr() + self.y.norm_sqr()
    }

    pub fn norm(self) -> f64 {
        self.intensity().sqrt()
    }

    /// Stokes parameters (S0, S1, S2, S3); S3 > 0 for positive helicity.
    pub fn stokes(self) -> [f64; 4] {
        let xy = self.x * self.y.conj();
        [
            self.intensity(),
            self.x.norm_sqr() - self.y.norm_sqr(),
            2.0 * xy.re,
            -2.0 * xy.im,
        ]
    }

    /// `|a · b*|`-style overlap of normalized polarizations, `|⟨b|a⟩|²`.
    pub fn polarization_overlap(self, other: Jones) -> f64 {
        let dot = self.x * other.x.conj() + self.y * other.y.conj();
        dot.norm_sqr() / (self.intensity() * other.intensity())
    }
}

impl std::ops::Add for Jones {
    type Output = Jones;
    fn add(self, rhs: Jones) -> Jones {
        Jones::new(self.x + rhs.x, self.y + rhs.y)
    }
}

/// Which field a mode sum evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Electric,
    VectorPotential,
}

impl FieldKind {
    fn weight(self, omega: f64) -> Complex64 {
        match self {
            FieldKind::Electric => Complex64::new(FIELD_PREFACTOR * omega.sqrt(), 0.0),
            FieldKind::VectorPotential => Complex64::new(0.0, -FIELD_PREFACTOR / omega.sqrt()),
        }
    }
}

fn bessel_norm(kt: f64, order: u32) -> f64 {
    let r = BESSEL_APERTURE / kt;
    let x = BESSEL_APERTURE;
    let below = if order == 0 { -bessel_j(1, x) } else { bessel_j(order - 1, x) };
    let radial = 0.5 * r * r * (bessel_j(order, x).powi(2) - below * bessel_j(order + 1, x));
    (2.0 * PI * radial).sqrt()
}

fn lg_norm(radial: u32, order: u32, waist: f64) -> f64 {
    // sqrt(2 p! / (π (p+|m|)!)) / w
    let ratio: f64 = (radial + 1..=radial + order).map(f64::from).product();
    (2.0 / (PI * ratio)).sqrt() / waist
}

/// Transverse profile `F(ρ, z)`; depends on |m| only.
pub fn mode_function(label: &ModeLabel, rho: f64, z: f64, z0: f64) -> Result<Complex64> {
    let order = label.m().unsigned_abs();
    match label.transverse() {
        TransverseIndex::Bessel { kt } => {
            if rho > BESSEL_APERTURE / kt {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let omega = label.omega();
            let kz = (omega * omega - kt * kt).sqrt();
            let amp = bessel_j(order, kt * rho) / bessel_norm(kt, order);
            Ok(Complex64::from_polar(amp, kz * (z - z0)))
        }
        TransverseIndex::LaguerreGauss { radial, waist } => {
            if (z - z0).abs() > 1e-12 * z0.abs().max(1.0) {
                return Err(Error::LgOffFocalPlane { z, z0 });
            }
            let u = rho / waist;
            let amp = lg_norm(radial, order, waist)
                * (std::f64::consts::SQRT_2 * u).powi(order as i32)
                * laguerre(radial, f64::from(order), 2.0 * u * u)
                * (-u * u).exp();
            Ok(Complex64::new(amp, 0.0))
        }
    }
}

/// Detection amplitude of a single photon in the mode `coefficients`.
pub fn detection_amplitude(
    basis: &ModeBasis,
    coefficients: &Coefficients,
    x: f64,
    y: f64,
    z: f64,
    t: f64,
    kind: FieldKind,
) -> Result<Jones> {
    let rho = x.hypot(y);
    let phi = y.atan2(x);
    let mut out = Jones::default();
    for (k, c) in coefficients.iter() {
        let label = basis.label(k);
        let omega = label.omega();
        let phase = Complex64::from_polar(1.0, f64::from(label.m()) * phi - omega * t);
        let scalar = c * kind.weight(omega) * phase * mode_function(label, rho, z, basis.z0())?;
        out = out + Jones::helicity(label.s()).scale(scalar);
    }
    Ok(out)
}

/// Square lattice of `points_per_side²` points spanning `[−extent, extent]²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub points_per_side: usize,
    pub extent: f64,
}

impl Grid {
    pub fn new(points_per_side: usize, extent: f64) -> Result<Self> {
        if points_per_side == 0 {
            return Err(Error::EmptyGrid);
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid extent must be positive, got {extent}")));
        }
        Ok(Self { points_per_side, extent })
    }

    /// 129 × 129 points over four transverse length scales.
    pub fn default_for(transverse: TransverseIndex) -> Self {
        Self { points_per_side: 129, extent: 4.0 * transverse.length_scale() }
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        if self.points_per_side == 1 {
            0.0
        } else {
            -self.extent + 2.0 * self.extent * i as f64 / (self.points_per_side - 1) as f64
        }
    }

    pub fn len(&self) -> usize {
        self.points_per_side * self.points_per_side
    }

    pub fn is_empty(&self) -> bool {
        self.points_per_side == 0
    }

    /// Row-major points, y outer and x inner.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.points_per_side)
            .flat_map(move |j| (0..self.points_per_side).map(move |i| (self.coordinate(i), self.coordinate(j))))
    }
}

/// Transverse field components tracked by the pattern estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    X,
    Y,
    Total,
}

/// Field on a grid at one instant, with per-point intensity and ellipse.
#[derive(Clone, Debug, Serialize)]
pub struct FieldSnapshot {
    pub grid: Grid,
    pub t: f64,
    pub z: f64,
    pub values: Vec<Jones>,
    pub intensity: Vec<f64>,
    /// Orientation ψ ∈ (−π/2, π/2]; 0 where the field vanishes.
    pub psi: Vec<f64>,
    /// Ellipticity χ ∈ [−π/4, π/4]; 0 where the field vanishes.
    pub chi: Vec<f64>,
}

impl FieldSnapshot {
    fn from_values(grid: Grid, t: f64, z: f64, values: Vec<Jones>) -> Self {
        let intensity = values.iter().map(|v| v.intensity()).collect();
        let (psi, chi) = values.iter().map(|v| polarization_ellipse(*v).unwrap_or((0.0, 0.0))).unzip();
        Self { grid, t, z, values, intensity, psi, chi }
    }

    pub fn component_intensity(&self, component: Component) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| match component {
                Component::X => v.x.norm_sqr(),
                Component::Y => v.y.norm_sqr(),
                Component::Total => v.intensity(),
            })
            .collect()
    }

    /// Mirror image under x → −x.
    pub fn mirrored(&self) -> Self {
        let n = self.grid.points_per_side;
        let mut values = self.values.clone();
        for j in 0..n {
            for i in 0..n {
                let v = self.values[j * n + (n - 1 - i)];
                // E_x flips sign under the reflection; intensities do not care.
                values[j * n + i] = Jones::new(-v.x, v.y);
            }
        }
        Self::from_values(self.grid, self.t, self.z, values)
    }
}

/// Evaluates the detection amplitude on every grid point in the reference plane.
pub fn snapshot(
    basis: &ModeBasis,
    coefficients: &Coefficients,
    grid: &Grid,
    t: f64,
    kind: FieldKind,
) -> Result<FieldSnapshot> {
    if grid.points_per_side == 0 {
        return Err(Error::EmptyGrid);
    }
    let z = basis.z0();
    let n = grid.points_per_side;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|p| detection_amplitude(basis, coefficients, grid.coordinate(p % n), grid.coordinate(p / n), z, t, kind))
        .collect::<Result<Vec<_>>>()?;
    Ok(FieldSnapshot::from_values(*grid, t, z, values))
}

/// Orientation ψ and ellipticity χ of a polarization ellipse from its Stokes vector.
pub fn polarization_ellipse(field: Jones) -> Result<(f64, f64)> {
    let [s0, s1, s2, s3] = field.stokes();
    if !(s0 > 0.0) {
        return Err(Error::NullField);
    }
    let mut psi = 0.5 * s2.atan2(s1);
    if psi <= -FRAC_PI_2 {
        psi += PI;
    }
    let chi = 0.5 * (s3 / s0).clamp(-1.0, 1.0).asin();
    Ok((psi, chi))
}

fn bilinear(grid: &Grid, values: &[f64], x: f64, y: f64) -> f64 {
    let n = grid.points_per_side;
    let h = 2.0 * grid.extent / (n - 1) as f64;
    let fx = ((x + grid.extent) / h).clamp(0.0, (n - 1) as f64);
    let fy = ((y + grid.extent) / h).clamp(0.0, (n - 1) as f64);
    let (i, j) = ((fx as usize).min(n - 2), (fy as usize).min(n - 2));
    let (tx, ty) = (fx - i as f64, fy - j as f64);
    let v = |i: usize, j: usize| values[j * n + i];
    (1.0 - ty) * ((1.0 - tx) * v(i, j) + tx * v(i + 1, j)) + ty * ((1.0 - tx) * v(i, j + 1) + tx * v(i + 1, j + 1))
}

/// Area-weighted angular profile, resampled onto polar rings inside the grid.
fn azimuthal_profile(snap: &FieldSnapshot, component: Component) -> Result<Vec<f64>> {
    let n = snap.grid.points_per_side;
    if n < 3 {
        return Err(Error::NoAzimuthalStructure);
    }
    let values = snap.component_intensity(component);
    let rings = n / 2;
    let mut profile = vec![0.0; AZIMUTH_BINS];
    for (b, out) in profile.iter_mut().enumerate() {
        let phi = (b as f64 + 0.5) * 2.0 * PI / AZIMUTH_BINS as f64;
        let (c, s) = (phi.cos(), phi.sin());
        *out = (0..rings)
            .map(|r| {
                let rho = snap.grid.extent * (r as f64 + 0.5) / rings as f64;
                rho * bilinear(&snap.grid, &values, rho * c, rho * s)
            })
            .sum();
    }
    Ok(profile)
}

/// Whether grid points at exactly equal radius carry different intensities.
///
/// Points are grouped by the integer key (2i−n+1)² + (2j−n+1)², so groups
/// include radii shared by points unrelated by the grid's own symmetry,
/// e.g. index offsets (3, 4) and (5, 0).
pub fn has_azimuthal_structure(snap: &FieldSnapshot, component: Component) -> bool {
    let n = snap.grid.points_per_side as i64;
    let values = snap.component_intensity(component);
    let peak = values.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return false;
    }
    let mut groups: std::collections::HashMap<i64, (f64, f64)> = std::collections::HashMap::new();
    for (p, v) in values.iter().enumerate() {
        let (i, j) = (p as i64 % n, p as i64 / n);
        let (u, w) = (2 * i - n + 1, 2 * j - n + 1);
        let e = groups.entry(u * u + w * w).or_insert((*v, *v));
        e.0 = e.0.min(*v);
        e.1 = e.1.max(*v);
    }
    groups.values().any(|(lo, hi)| hi - lo > 1e-9 * peak)
}

/// Azimuthal rotation (radians, in (−π, π]) carrying `a`'s pattern onto `b`'s.
pub fn pattern_rotation_angle(a: &FieldSnapshot, b: &FieldSnapshot, component: Component) -> Result<f64> {
    let pa = azimuthal_profile(a, component)?;
    let pb = azimuthal_profile(b, component)?;
    if !has_azimuthal_structure(a, component) || !has_azimuthal_structure(b, component) {
        return Err(Error::NoAzimuthalStructure);
    }
    let mean = |p: &[f64]| p.iter().sum::<f64>() / p.len() as f64;
    let (ma, mb) = (mean(&pa), mean(&pb));
    let n = AZIMUTH_BINS;
    let corr: Vec<f64> = (0..n)
        .map(|k| (0..n).map(|j| (pa[j] - ma) * (pb[(j + k) % n] - mb)).sum())
        .collect();
    let best = corr.iter().cloned().fold(f64::MIN, f64::max);
    let lag = |k: usize| if k > n / 2 { k as i64 - n as i64 } else { k as i64 };
    // Periodic patterns correlate equally at several lags; take the peak
    // nearest zero.
    let k = (0..n)
        .filter(|&k| {
            let (l, r) = (corr[(k + n - 1) % n], corr[(k + 1) % n]);
            corr[k] >= l && corr[k] >= r && corr[k] >= best - 1e-3 * best.abs()
        })
        .min_by_key(|&k| lag(k).abs())
        .ok_or(Error::NoAzimuthalStructure)?;
    let (l, c, r) = (corr[(k + n - 1) % n], corr[k], corr[(k + 1) % n]);
    let denom = l - 2.0 * c + r;
    let frac = if denom != 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
    Ok((lag(k) as f64 + frac) * 2.0 * PI / n as f64)
}

/// Signed angular velocity of the intensity pattern between two snapshots.
pub fn estimate_pattern_rotation(a: &FieldSnapshot, b: &FieldSnapshot, component: Component) -> Result<f64> {
    let dt = b.t - a.t;
    if dt == 0.0 {
        return Err(Error::InvalidParameter("snapshots share the same time".into()));
    }
    Ok(pattern_rotation_angle(a, b, component)? / dt)
}

/// Mean pattern rotation rate over consecutive snapshot pairs.
pub fn estimate_pattern_rotation_series(snapshots: &[FieldSnapshot], component: Component) -> Result<f64> {
    if snapshots.len() < 2 {
        return Err(Error::InvalidParameter("need at least two snapshots".into()));
    }
    let rates = snapshots
        .windows(2)
        .map(|w| estimate_pattern_rotation(&w[0], &w[1], component))
        .collect::<Result<Vec<_>>>()?;
    Ok(rates.iter().sum::<f64>() / rates.len() as f64)
}

/// Unwraps orientation angles (period π) into a continuous series.
pub fn unwrap_orientation(psi: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(psi.len());
    let mut offset = 0.0;
    for (i, &p) in psi.iter().enumerate() {
        if i > 0 {
            let prev = psi[i - 1];
            let d = p - prev;
            if d > FRAC_PI_2 {
                offset -= PI;
            } else if d < -FRAC_PI_2 {
                offset += PI;
            }
        }
        out.push(p + offset);
    }
    out
}

/// Least-squares slope of `ys` against `xs`.
pub fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Orientation rate dψ/dt from a time series of local fields.
pub fn orientation_rate(times: &[f64], fields: &[Jones]) -> Result<f64> {
    if times.len() < 2 || times.len() != fields.len() {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let psi = fields.iter().map(|f| polarization_ellipse(*f).map(|p| p.0)).collect::<Result<Vec<_>>>()?;
    Ok(linear_slope(times, &unwrap_orientation(&psi)))
}

/// Rotation rate of the local polarization axis at a fixed reference-plane point.
pub fn estimate_polarization_rotation(
    basis: &ModeBasis,
    coefficients: &Coefficients,
    point: (f64, f64),
    times: &[f64],
    kind: FieldKind,
) -> Result<f64> {
    let fields = times
        .iter()
        .map(|&t| detection_amplitude(basis, coefficients, point.0, point.1, basis.z0(), t, kind))
        .collect::<Result<Vec<_>>>()?;
    orientation_rate(times, &fields)
}

/// Phases of a rotating-frame operator `e^{iΩ(m+s)t} a_{ω,m,s}(t)` and of
/// the shifted free mode `a_{ω−Ω(m+s),m,s}(t)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FrameCheck {
    pub phase_frame: Complex64,
    pub phase_shifted: Complex64,
    /// True only when both describe the same mode, i.e. the shift vanishes.
    pub mode_functions_equal: bool,
}

pub fn frame_rotation_phase_check(label: &ModeLabel, rotation: f64, t: f64) -> Result<FrameCheck> {
    let shift = rotation * f64::from(label.m() + label.s());
    let shifted = label.with_omega(label.omega() - shift)?;
    let phase_frame = Complex64::from_polar(1.0, shift * t) * Complex64::from_polar(1.0, -label.omega() * t);
    let phase_shifted = Complex64::from_polar(1.0, -shifted.omega() * t);
    Ok(FrameCheck { phase_frame, phase_shifted, mode_functions_equal: shifted.same_mode(label) })
}
