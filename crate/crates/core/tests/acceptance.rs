//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rotomode::atom::{absorb, stored_entanglement, AtomConfig};
use rotomode::field::{
    detection_amplitude, estimate_pattern_rotation_series, estimate_polarization_rotation, orientation_rate,
    polarization_ellipse, snapshot, Component, FieldKind, Grid,
};
use rotomode::fock::{annihilate, create, expect, inner, moments, FockState, Observable};
use rotomode::interference::{
    dominant_frequency, hom_delays, hom_sweep, make_gaussian_spectrum, wavepacket_field_quadrature,
};
use rotomode::protocols::{
    bb84_simulate, build_singlet, mub_overlap_matrix, singlet_report, Bb84Basis, Bb84Config, Eavesdropper, Flavor,
    SingletBasis, SingletSpec,
};
use rotomode::transforms::UnitaryModeMap;
use rotomode::{build_pair, Family, ModeBasis, PairSpec, TransverseIndex};

const BESSEL: TransverseIndex = TransverseIndex::Bessel { kt: 0.05 };

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn one_photon(basis: &ModeBasis, coefficients: &rotomode::Coefficients) -> FockState {
    create(&FockState::vacuum(basis, 1).unwrap(), coefficients).unwrap().0
}

/// 1. Closed-form ⟨Sz⟩, ⟨Lz⟩, ⟨E⟩ of g± and h± within 1e-12, under 1 s.
fn closed_form_expectations() -> Outcome {
    let start = Instant::now();
    let spec = PairSpec::new(100.0, 1.0, 2, 1, BESSEL);
    let mut basis = ModeBasis::new(0.0);
    let (gp, gm) = build_pair(&mut basis, Family::G, &spec).unwrap();
    let (hp, hm) = build_pair(&mut basis, Family::H, &spec).unwrap();
    let mut worst: f64 = 0.0;
    for (mode, obs, want) in [
        (&gp, Observable::Sz, -0.01),
        (&gm, Observable::Sz, 0.01),
        (&gp, Observable::Energy, 99.99),
        (&gm, Observable::Energy, 100.01),
        (&hp, Observable::Lz, -0.04),
        (&hm, Observable::Lz, 0.04),
        (&hp, Observable::Energy, 99.96),
        (&hm, Observable::Energy, 100.04),
    ] {
        let got = expect(&basis, &one_photon(&basis, &mode.coefficients), obs).unwrap();
        worst = worst.max((got - want).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(worst < 1e-12 && elapsed < 1.0, format!("max residual {worst:.2e}, {elapsed:.3} s"))
}

/// 2. Balanced families carry zero angular momentum of their kind and energy ω.
fn balanced_families() -> Outcome {
    let spec = PairSpec::new(100.0, 1.0, 2, 1, BESSEL);
    let mut worst: f64 = 0.0;
    for family in [Family::B, Family::C, Family::D, Family::E, Family::F] {
        let mut basis = ModeBasis::new(0.0);
        let (p, m) = build_pair(&mut basis, family, &spec).unwrap();
        for mode in [p, m] {
            let mo = moments(&basis, &one_photon(&basis, &mode.coefficients)).unwrap();
            let relevant: &[f64] = match family {
                Family::B => &[mo.sz],
                Family::C => &[mo.lz],
                _ => &[mo.sz, mo.lz, mo.jz],
            };
            for r in relevant {
                worst = worst.max(r.abs());
            }
            worst = worst.max((mo.energy - 100.0).abs());
        }
    }
    outcome(worst < 1e-12, format!("max deviation {worst:.2e} over b, c, d, e, f (both signs)"))
}

/// 3. Gram residuals of every pair and vanishing cross commutators [u+, u−†].
fn unitarity_and_commutators() -> Outcome {
    let mut gram: f64 = 0.0;
    let mut commutator: f64 = 0.0;
    for spec in [PairSpec::new(100.0, 1.0, 2, 1, BESSEL), PairSpec::new(3.0, 0.4, -1, -1, BESSEL).with_rotation2(0.3)] {
        for family in Family::ROTATING {
            let mut basis = ModeBasis::new(0.0);
            let pair = build_pair(&mut basis, family, &spec).unwrap();
            gram = gram.max(UnitaryModeMap::from_pair(&pair).residual());
            // [Σ conj(u) a, Σ v a†] = ⟨u|v⟩, and u annihilates a photon in v
            commutator = commutator.max(pair.0.coefficients.overlap(&pair.1.coefficients).norm());
            let v = one_photon(&basis, &pair.1.coefficients);
            commutator = commutator.max(annihilate(&v, &pair.0.coefficients).1);
        }
    }
    outcome(gram < 1e-12 && commutator < 1e-12, format!("Gram {gram:.2e}, commutator {commutator:.2e}"))
}

/// 4. E±(t + τ) = −i e^{−iωτ} E∓(t) on a 129² grid for b (τ = π/2Ω) and c (τ = π/2mΩ).
fn time_shift_identities() -> Outcome {
    let (omega, rot) = (1.0, 0.01);
    let mut worst: f64 = 0.0;
    for (family, m) in [(Family::B, 0), (Family::C, 1), (Family::C, 2)] {
        let mut basis = ModeBasis::new(0.0);
        let (p, mi) = build_pair(&mut basis, family, &PairSpec::new(omega, rot, m, 1, BESSEL)).unwrap();
        let tau = PI / (2.0 * rot * f64::from(m.max(1)));
        let phase = Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, -omega * tau);
        let grid = Grid::default_for(BESSEL);
        for t in [0.0, 37.0] {
            for (a, b) in [(&p, &mi), (&mi, &p)] {
                let shifted = snapshot(&basis, &a.coefficients, &grid, t + tau, FieldKind::Electric).unwrap();
                let base = snapshot(&basis, &b.coefficients, &grid, t, FieldKind::Electric).unwrap();
                for (x, y) in shifted.values.iter().zip(&base.values) {
                    let y = y.scale(phase);
                    worst = worst.max((x.x - y.x).norm()).max((x.y - y.y).norm());
                }
            }
        }
    }
    outcome(worst < 1e-10, format!("max pointwise deviation {worst:.2e}"))
}

/// 5. |E| of g+ and |A| of g− constant at 16 points over a period; both linearly polarized.
fn constant_shape_rotation() -> Outcome {
    let (omega, rot) = (1.0, 0.01);
    let mut basis = ModeBasis::new(0.0);
    let (gp, gm) = build_pair(&mut basis, Family::G, &PairSpec::new(omega, rot, 0, 1, BESSEL)).unwrap();
    let mut spread: f64 = 0.0;
    let mut ellipticity: f64 = 0.0;
    for (mode, kind) in [(&gp, FieldKind::Electric), (&gm, FieldKind::VectorPotential)] {
        for p in 0..16 {
            let (r, phi) = (3.0 + 2.5 * p as f64, 0.7 * p as f64);
            let values: Vec<_> = (0..64)
                .map(|k| {
                    let t = k as f64 * 2.0 * PI / (64.0 * rot);
                    detection_amplitude(&basis, &mode.coefficients, r * phi.cos(), r * phi.sin(), 0.0, t, kind)
                        .unwrap()
                })
                .collect();
            let mags: Vec<f64> = values.iter().map(|v| v.norm()).collect();
            let hi = mags.iter().cloned().fold(0.0, f64::max);
            let lo = mags.iter().cloned().fold(f64::MAX, f64::min);
            spread = spread.max((hi - lo) / hi);
            for v in values {
                ellipticity = ellipticity.max(polarization_ellipse(v).unwrap().1.abs());
            }
        }
    }
    outcome(
        spread < 1e-10 && ellipticity < 1e-10,
        format!("relative magnitude spread {spread:.2e}, max |chi| {ellipticity:.2e}"),
    )
}

/// 6. f+: pattern rotates at +Ω, polarization at −Ω, over Ωt = nπ/5.
fn counter_rotation() -> Outcome {
    let (omega, rot) = (1.0, 0.01);
    let mut basis = ModeBasis::new(0.0);
    let (fp, _) = build_pair(&mut basis, Family::F, &PairSpec::new(omega, rot, 0, 1, BESSEL)).unwrap();
    let times: Vec<f64> = (0..6).map(|n| n as f64 * PI / (5.0 * rot)).collect();
    let grid = Grid::default_for(BESSEL);
    let snaps: Vec<_> =
        times.iter().map(|&t| snapshot(&basis, &fp.coefficients, &grid, t, FieldKind::Electric).unwrap()).collect();
    let pattern = estimate_pattern_rotation_series(&snaps, Component::X).unwrap();
    let polarization =
        estimate_polarization_rotation(&basis, &fp.coefficients, (16.0, 12.0), &times, FieldKind::Electric).unwrap();
    let ok = (pattern - rot).abs() < 0.01 * rot && (polarization + rot).abs() < 0.01 * rot;
    outcome(ok, format!("pattern {:+.6}·Ω, polarization {:+.6}·Ω", pattern / rot, polarization / rot))
}

/// 7. HOM coincidences match (1 − cos²Ωτ)/2 at 64 delays; DFT peak at 2Ω.
fn hom() -> Outcome {
    let rot = 1.0;
    let spec = PairSpec::new(100.0, rot, 0, 1, BESSEL);
    let taus = hom_delays(Family::B, &spec, 64, 1.0).unwrap();
    let rows = hom_sweep(Family::B, &spec, &taus).unwrap();
    let worst = rows
        .iter()
        .map(|r| (r.bruteforce - 0.5 * (1.0 - (rot * r.tau).cos().powi(2))).abs())
        .fold(0.0, f64::max);
    let curve: Vec<f64> = rows.iter().map(|r| r.bruteforce).collect();
    let peak = dominant_frequency(&curve, taus[1] - taus[0]).unwrap();
    outcome(worst < 1e-10 && (peak - 2.0 * rot).abs() < 1e-9, format!("max deviation {worst:.2e}, peak {peak:.6}·Ω"))
}

/// 8. Singlet equivalence, totals, conditional anticorrelation and co-rotation; orbital analog.
fn singlets() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (flavor, m) in [(Flavor::Polarization, 0), (Flavor::Orbital, 1)] {
        let spec = SingletSpec { flavor, omega: 100.0, rotation: 1.0, m, s: 1, transverse: BESSEL, n_max: 2 };
        let mut basis = ModeBasis::new(0.0);
        let w = build_singlet(&mut basis, &spec, SingletBasis::Weighted).unwrap();
        let b = build_singlet(&mut basis, &spec, SingletBasis::Balanced).unwrap();
        let l = build_singlet(&mut basis, &spec, SingletBasis::Labels).unwrap();
        let wb = inner(&w, &b).unwrap().norm();
        let wl = inner(&w, &l).unwrap().norm();
        ok &= (wb - 1.0).abs() < 1e-12 && (wl - 1.0).abs() < 1e-12;
        let total = moments(&basis, &w).unwrap();
        let zero = if flavor == Flavor::Polarization { total.jz } else { total.lz };
        ok &= zero.abs() < 1e-12 && (total.energy - 200.0).abs() < 1e-12;

        let report = singlet_report(&spec).unwrap();
        let probe = if flavor == Flavor::Polarization { ["g+", "g-"] } else { ["h+", "h-"] };
        for (name, sign) in probe.iter().zip([1.0, -1.0]) {
            let c = &report.correlations.iter().find(|c| c.probe == *name).unwrap().result;
            let (local, remote) = match flavor {
                Flavor::Polarization => (c.local.sz, c.remote.sz),
                Flavor::Orbital => (c.local.lz, c.remote.lz),
            };
            let expected = sign * f64::from(m.max(1)).powi(2) * 0.01;
            ok &= (remote - expected).abs() < 1e-12 && (local + expected).abs() < 1e-12;
            let (lr, rr) = (c.local_rotation.unwrap_or(f64::NAN), c.remote_rotation.unwrap_or(f64::NAN));
            ok &= lr.signum() == rr.signum() && lr.is_finite() && rr.is_finite();
        }
        notes.push(format!("{flavor:?}: |<w|b>|={wb:.15}, |<w|a>|={wl:.15}"));
    }
    outcome(ok, notes.join("; "))
}

/// 9. Mutually unbiased bases, intercept-resend QBER ≈ 1/4, clean QBER 0, under 10 s.
fn qkd() -> Outcome {
    let start = Instant::now();
    let config = |eavesdrop| Bb84Config { omega: 100.0, rotation: 1.0, transverse: BESSEL, trials: 100_000, eavesdrop, seed: 2024 };
    let mub = mub_overlap_matrix(&config(Eavesdropper::None)).unwrap();
    let eve = bb84_simulate(&config(Eavesdropper::InterceptResend(Bb84Basis::Rotating))).unwrap();
    let clean = bb84_simulate(&config(Eavesdropper::None)).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let ok = mub.max_bias < 1e-12
        && (0.24..=0.26).contains(&eve.qber)
        && (0.49..=0.51).contains(&eve.sifted_fraction)
        && clean.qber == 0.0
        && elapsed < 10.0;
    outcome(
        ok,
        format!(
            "MUB bias {:.1e}, QBER {:.4}, sifted {:.4}, clean QBER {}, {elapsed:.2} s",
            mub.max_bias, eve.qber, eve.sifted_fraction, clean.qber
        ),
    )
}

/// 10. Atom storage: Ω = 0 symmetry, resonance balance, entropy endpoints and monotonicity.
fn atom_storage() -> Outcome {
    let cfg = AtomConfig { omega_a: 100.0, gamma: 0.2, z_prime: 0.3, p0: 0.1, motional_sigma: 1.0 };
    let f = make_gaussian_spectrum(100.0, 0.5).unwrap();
    let still = absorb(&f, 0.0, &cfg).unwrap();
    let resonant = absorb(&f, 1.3, &cfg).unwrap();
    let balance = (resonant.c_plus.norm() - resonant.c_minus.norm()).abs();
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let max_ent = stored_entanglement(h, h, Complex64::new(0.0, 0.0));
    let no_ent = stored_entanglement(h, h, Complex64::new(1.0, 0.0));
    let sweep: Vec<f64> =
        (0..20).map(|k| stored_entanglement(h, h, Complex64::new(k as f64 / 19.0, 0.0))).collect();
    let monotone = sweep.windows(2).all(|w| w[1] < w[0]);
    let ok = still.c_plus == still.c_minus && balance < 1e-10 && max_ent == 1.0 && no_ent == 0.0 && monotone;
    outcome(ok, format!("| |c+|-|c-| | = {balance:.1e}, entropy endpoints ({max_ent}, {no_ent}), monotone {monotone}"))
}

/// 11. Parseval, and packet polarization rotating at Ω over its FWHM.
fn wavepackets() -> Outcome {
    let rot = 1.0;
    let f = make_gaussian_spectrum(100.0, 0.1).unwrap();
    let parseval = (f.norm_sqr() - 1.0).abs().max((f.time_norm_sqr() - 1.0).abs());
    let fwhm = f.duration_fwhm().unwrap();
    let visible = f.rotation_visible(rot).unwrap();
    let times: Vec<f64> = (0..201).map(|k| -0.5 * fwhm + fwhm * k as f64 / 200.0).collect();
    let fields: Vec<_> = times.iter().map(|&t| wavepacket_field_quadrature(&f, rot, t)).collect();
    let rate = orientation_rate(&times, &fields).unwrap();
    let ok = parseval < 1e-8 && visible && (rate - rot).abs() < 1e-3 * rot;
    outcome(ok, format!("Parseval residual {parseval:.1e}, FWHM {fwhm:.3} > 2π/Ω, rate {rate:.9}·Ω"))
}

fn run_cli(bin: &str, args: &[&str], threads: &str) -> bool {
    Command::new(bin).args(args).env("ROTOMODE_THREADS", threads).status().map(|s| s.success()).unwrap_or(false)
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

/// 12. Byte-identical CLI outputs across repeated runs and thread counts.
fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_rotomode");
    let root = tempfile::tempdir().unwrap();
    let mut all_ok = true;
    let mut runs = Vec::new();
    for (i, threads) in ["1", "4", "4"].iter().enumerate() {
        let dir = root.path().join(format!("run{i}"));
        std::fs::create_dir_all(&dir).unwrap();
        let d = dir.to_str().unwrap();
        let out = |name: &str| format!("{d}/{name}");
        all_ok &= run_cli(
            bin,
            &["qkd", "--eavesdrop", "intercept-resend", "--trials", "20000", "--seed", "11", "--out", &out("qkd.json")],
            threads,
        );
        all_ok &= run_cli(bin, &["hom", "--omega", "100", "--Omega", "1", "--out", &out("hom.csv")], threads);
        all_ok &= run_cli(
            bin,
            &["snapshot", "--family", "g", "--sign", "+", "--omega", "1", "--Omega", "0.01", "--times", "0,50,100",
                "--grid", "41", "--out-dir", d],
            threads,
        );
        all_ok &= run_cli(bin, &["atom", "--omega0", "100", "--sigma", "0.5", "--Omega", "1", "--out", &out("atom.json")], threads);
        runs.push(read_dir_bytes(&dir));
    }
    let identical = runs.windows(2).all(|w| w[0] == w[1]);
    outcome(all_ok && identical, format!("{} files per run, 3 runs (1 and 4 threads)", runs[0].len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("closed-form expectations of g and h", closed_form_expectations),
        ("zero angular momentum of b, c, d, e, f", balanced_families),
        ("unitarity and commutators", unitarity_and_commutators),
        ("time-shift identities on fields", time_shift_identities),
        ("constant-shape rotation of g+ and g-", constant_shape_rotation),
        ("counter-rotation of f+", counter_rotation),
        ("HOM modulation and 2Ω oscillation", hom),
        ("rotating singlet equivalence and correlations", singlets),
        ("QKD unbiasedness and intercept-resend QBER", qkd),
        ("atom storage amplitudes and entanglement", atom_storage),
        ("wavepacket Parseval and rotation rate", wavepackets),
        ("CLI determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = std::panic::catch_unwind(check)
            .unwrap_or_else(|_| outcome(false, "panicked"));
        if !o.pass {
            failures += 1;
        }
        println!("acceptance {:>2} {}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, name, o.detail);
    }
    println!("acceptance: {}/12 criteria passed", 12 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
