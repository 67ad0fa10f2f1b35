//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::atom::{absorb, AtomConfig, StorageResult};
use crate::error::Error;
use crate::field::{
    estimate_pattern_rotation_series, estimate_polarization_rotation, snapshot, Component, FieldKind, FieldSnapshot,
    Grid,
};
use crate::fock::{closed_form_moments, create, moments, FockState, Moments};
use crate::interference::{hom_delays, hom_sweep, make_gaussian_spectrum};
use crate::mode::{ModeBasis, TransverseIndex};
use crate::protocols::{
    bb84_simulate, measurement_complementarity, mub_overlap_matrix, probe_radius, singlet_report, Bb84Basis,
    Bb84Config, Complementarity, Eavesdropper, Flavor, MubReport, SingletReport, SingletSpec,
};
use crate::transforms::{build_pair, Family, PairSpec, Sign, SuperpositionMode};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "rotomode", version, about = "Rotating light modes: expectations, fields and protocols")]
pub struct Cli {
    /// Field normalization convention; only `standard` is implemented.
    #[arg(long, global = true, default_value = "standard")]
    pub convention: Convention,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    Standard,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reference-plane field snapshots (one CSV per time) and rotation estimates.
    #[command(allow_negative_numbers = true)]
    Snapshot(SnapshotArgs),
    /// Brute-force energy and angular-momentum expectations of one photon.
    #[command(allow_negative_numbers = true)]
    Expect(ExpectArgs),
    /// Hong-Ou-Mandel coincidence sweep, analytic against brute force.
    #[command(allow_negative_numbers = true)]
    Hom(HomArgs),
    /// Rotating singlet in three bases with conditional correlations.
    #[command(allow_negative_numbers = true)]
    Singlet(SingletArgs),
    /// Rotating-basis BB84 simulation.
    #[command(allow_negative_numbers = true)]
    Qkd(QkdArgs),
    /// Storage of a rotating photon in a single atom.
    #[command(allow_negative_numbers = true)]
    Atom(AtomArgs),
    /// List the label decomposition of every rotating family.
    #[command(allow_negative_numbers = true)]
    Modes(ModesArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    B,
    C,
    D,
    E,
    F,
    G,
    H,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::B => Family::B,
            FamilyArg::C => Family::C,
            FamilyArg::D => Family::D,
            FamilyArg::E => Family::E,
            FamilyArg::F => Family::F,
            FamilyArg::G => Family::G,
            FamilyArg::H => Family::H,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    #[value(name = "+")]
    Plus,
    #[value(name = "-")]
    Minus,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TransverseArg {
    Bessel,
    Lg,
}

#[derive(Debug, Clone, Args)]
pub struct TransverseArgs {
    #[arg(long, value_enum, default_value = "bessel")]
    pub transverse: TransverseArg,
    /// Bessel transverse wavenumber.
    #[arg(long, default_value_t = 0.05)]
    pub kt: f64,
    /// Laguerre-Gauss waist.
    #[arg(long, default_value_t = 1.0)]
    pub waist: f64,
    /// Laguerre-Gauss radial index.
    #[arg(long, default_value_t = 0)]
    pub radial: u32,
}

impl TransverseArgs {
    fn index(&self) -> Result<TransverseIndex, CliError> {
        match self.transverse {
            TransverseArg::Bessel if self.kt > 0.0 && self.kt.is_finite() => Ok(TransverseIndex::Bessel { kt: self.kt }),
            TransverseArg::Lg if self.waist > 0.0 && self.waist.is_finite() => {
                Ok(TransverseIndex::LaguerreGauss { radial: self.radial, waist: self.waist })
            }
            TransverseArg::Bessel => Err(CliError::Usage("--kt must be positive".into())),
            TransverseArg::Lg => Err(CliError::Usage("--waist must be positive".into())),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModeArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long, value_enum)]
    pub sign: SignArg,
    #[arg(long)]
    pub omega: f64,
    /// Rotation rate Ω.
    #[arg(long = "Omega")]
    pub rotation: f64,
    /// Second rotation rate Ω′ (family e); defaults to Ω.
    #[arg(long = "Omega2")]
    pub rotation2: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub m: i32,
    #[arg(long, default_value_t = 1)]
    pub s: i32,
    #[command(flatten)]
    pub transverse: TransverseArgs,
}

impl ModeArgs {
    fn spec(&self) -> Result<PairSpec, CliError> {
        let spec = PairSpec::new(self.omega, self.rotation, self.m, self.s, self.transverse.index()?);
        Ok(match self.rotation2 {
            Some(r2) => spec.with_rotation2(r2),
            None => spec,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Electric,
    VectorPotential,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ComponentArg {
    X,
    Y,
    Total,
}

#[derive(Debug, Clone, Args)]
pub struct SnapshotArgs {
    #[command(flatten)]
    pub mode: ModeArgs,
    /// Comma-separated snapshot times.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub times: Vec<f64>,
    /// Points per grid side.
    #[arg(long, default_value_t = 129, value_parser = clap::value_parser!(u32).range(1..))]
    pub grid: u32,
    /// Half-width of the grid; defaults to four transverse length scales.
    #[arg(long)]
    pub extent: Option<f64>,
    #[arg(long, value_enum, default_value = "electric")]
    pub kind: KindArg,
    /// Intensity component tracked by the pattern-rotation estimator.
    #[arg(long, value_enum, default_value = "total")]
    pub component: ComponentArg,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, default_value = "snapshot")]
    pub prefix: String,
}

#[derive(Debug, Clone, Args)]
pub struct ExpectArgs {
    #[command(flatten)]
    pub mode: ModeArgs,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct HomArgs {
    #[arg(long, value_enum, default_value = "b")]
    pub family: FamilyArg,
    #[arg(long)]
    pub omega: f64,
    #[arg(long = "Omega")]
    pub rotation: f64,
    #[arg(long, default_value_t = 0)]
    pub m: i32,
    #[arg(long, default_value_t = 1)]
    pub s: i32,
    /// Number of delays.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..))]
    pub points: u32,
    /// Sweep length in rotation periods 2π/Δ.
    #[arg(long, default_value_t = 1.0)]
    pub periods: f64,
    #[command(flatten)]
    pub transverse: TransverseArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FlavorArg {
    Polarization,
    Orbital,
}

#[derive(Debug, Clone, Args)]
pub struct SingletArgs {
    #[arg(long, value_enum, default_value = "polarization")]
    pub flavor: FlavorArg,
    #[arg(long)]
    pub omega: f64,
    #[arg(long = "Omega")]
    pub rotation: f64,
    #[arg(long, default_value_t = 0)]
    pub m: i32,
    #[arg(long, default_value_t = 1)]
    pub s: i32,
    #[command(flatten)]
    pub transverse: TransverseArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EavesdropArg {
    None,
    /// Intercept-resend in the rotating {b+, b−} basis.
    InterceptResend,
    /// Intercept-resend in the frequency-label basis.
    InterceptResendFrequency,
    /// Intercept-resend in a random basis per photon.
    InterceptResendRandom,
}

#[derive(Debug, Clone, Args)]
pub struct QkdArgs {
    #[arg(long, default_value_t = 100.0)]
    pub omega: f64,
    #[arg(long = "Omega", default_value_t = 1.0)]
    pub rotation: f64,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "none")]
    pub eavesdrop: EavesdropArg,
    #[command(flatten)]
    pub transverse: TransverseArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AtomArgs {
    /// Spectrum center ω₀.
    #[arg(long)]
    pub omega0: f64,
    /// Spectral rms width σ.
    #[arg(long)]
    pub sigma: f64,
    #[arg(long = "Omega")]
    pub rotation: f64,
    /// Raman resonance ω_A; defaults to ω₀.
    #[arg(long)]
    pub omega_a: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub z_prime: f64,
    #[arg(long, default_value_t = 0.0)]
    pub p0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub motional_sigma: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ModesArgs {
    #[arg(long)]
    pub omega: f64,
    #[arg(long = "Omega")]
    pub rotation: f64,
    #[arg(long = "Omega2")]
    pub rotation2: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub m: i32,
    #[arg(long, default_value_t = 1)]
    pub s: i32,
    #[command(flatten)]
    pub transverse: TransverseArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Compute(_) | CliError::Io(_) => EXIT_COMPUTE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Compute(e) => write!(f, "computation failed: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("rotomode: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Snapshot(a) => cmd_snapshot(a),
        Command::Expect(a) => cmd_expect(a),
        Command::Hom(a) => cmd_hom(a),
        Command::Singlet(a) => cmd_singlet(a),
        Command::Qkd(a) => cmd_qkd(a),
        Command::Atom(a) => cmd_atom(a),
        Command::Modes(a) => cmd_modes(a),
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(out: &Option<PathBuf>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, contents.as_bytes())?,
        None => std::io::stdout().write_all(contents.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn build(mode: &ModeArgs) -> Result<(ModeBasis, SuperpositionMode, PairSpec), CliError> {
    let spec = mode.spec()?;
    let mut basis = ModeBasis::new(0.0);
    let (plus, minus) = build_pair(&mut basis, mode.family.into(), &spec)?;
    let chosen = match mode.sign {
        SignArg::Plus => plus,
        SignArg::Minus => minus,
    };
    Ok((basis, chosen, spec))
}

/// Full-precision CSV float; negative zero prints as zero.
fn num(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

/// Snapshot rows in the CSV layout.
pub fn snapshot_csv(snap: &FieldSnapshot) -> String {
    let mut out = String::from("x,y,re_Ex,im_Ex,re_Ey,im_Ey,intensity,psi,chi\n");
    for (p, (x, y)) in snap.grid.points().enumerate() {
        let v = snap.values[p];
        let row = [x, y, v.x.re, v.x.im, v.y.re, v.y.im, snap.intensity[p], snap.psi[p], snap.chi[p]];
        let _ = writeln!(out, "{}", row.map(num).join(","));
    }
    out
}

#[derive(Serialize)]
struct SnapshotSidecar {
    family: String,
    sign: String,
    omega: f64,
    rotation: f64,
    kind: FieldKind,
    component: Component,
    grid: Grid,
    times: Vec<f64>,
    files: Vec<String>,
    pattern_rotation_rate: Option<f64>,
    pattern_rotation_note: Option<String>,
    polarization_probe: (f64, f64),
    polarization_rotation_rate: Option<f64>,
    polarization_rotation_note: Option<String>,
}

fn optional_rate(r: crate::error::Result<f64>) -> Result<(Option<f64>, Option<String>), CliError> {
    match r {
        Ok(v) => Ok((Some(v), None)),
        Err(e @ (Error::NoAzimuthalStructure | Error::NullField | Error::InvalidParameter(_))) => {
            Ok((None, Some(e.to_string())))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_snapshot(a: &SnapshotArgs) -> Result<(), CliError> {
    if let Some(x) = a.extent {
        if !(x > 0.0 && x.is_finite()) {
            return Err(CliError::Usage("--extent must be positive".into()));
        }
    }
    if a.times.iter().any(|t| !t.is_finite()) {
        return Err(CliError::Usage("--times must be finite".into()));
    }
    let (basis, mode, spec) = build(&a.mode)?;
    let grid = Grid::new(
        a.grid as usize,
        a.extent.unwrap_or_else(|| Grid::default_for(spec.transverse).extent),
    )?;
    let kind = match a.kind {
        KindArg::Electric => FieldKind::Electric,
        KindArg::VectorPotential => FieldKind::VectorPotential,
    };
    let component = match a.component {
        ComponentArg::X => Component::X,
        ComponentArg::Y => Component::Y,
        ComponentArg::Total => Component::Total,
    };
    std::fs::create_dir_all(&a.out_dir)?;
    let width = a.times.len().to_string().len().max(2);
    let mut snaps = Vec::with_capacity(a.times.len());
    let mut files = Vec::with_capacity(a.times.len());
    for (i, &t) in a.times.iter().enumerate() {
        let snap = snapshot(&basis, &mode.coefficients, &grid, t, kind)?;
        let name = format!("{}_{:0width$}.csv", a.prefix, i);
        write_atomic(&a.out_dir.join(&name), snapshot_csv(&snap).as_bytes())?;
        files.push(name);
        snaps.push(snap);
    }
    let (pattern_rotation_rate, pattern_rotation_note) =
        optional_rate(estimate_pattern_rotation_series(&snaps, component))?;
    let r = probe_radius(spec.transverse);
    let probe = (0.8 * r, 0.6 * r);
    let (polarization_rotation_rate, polarization_rotation_note) =
        optional_rate(estimate_polarization_rotation(&basis, &mode.coefficients, probe, &a.times, kind))?;
    let sidecar = SnapshotSidecar {
        family: mode.family.to_string(),
        sign: mode.sign.to_string(),
        omega: spec.omega,
        rotation: spec.rotation,
        kind,
        component,
        grid,
        times: a.times.clone(),
        files,
        pattern_rotation_rate,
        pattern_rotation_note,
        polarization_probe: probe,
        polarization_rotation_rate,
        polarization_rotation_note,
    };
    write_atomic(&a.out_dir.join(format!("{}.json", a.prefix)), to_json(&sidecar).as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
pub struct ExpectRecord {
    pub family: String,
    pub sign: String,
    pub omega: f64,
    pub rotation: f64,
    pub m: i32,
    pub s: i32,
    pub sz: f64,
    pub lz: f64,
    pub jz: f64,
    pub energy: f64,
    pub closed_form: Moments,
    pub closed_form_residuals: Moments,
}

pub fn expect_record(mode: &ModeArgs) -> Result<ExpectRecord, CliError> {
    let (basis, chosen, spec) = build(mode)?;
    let vacuum = FockState::vacuum(&basis, 1)?;
    let (state, _) = create(&vacuum, &chosen.coefficients)?;
    let brute = moments(&basis, &state)?;
    let closed = closed_form_moments(chosen.family, chosen.sign, &spec)?;
    Ok(ExpectRecord {
        family: chosen.family.to_string(),
        sign: chosen.sign.to_string(),
        omega: spec.omega,
        rotation: spec.rotation,
        m: spec.m,
        s: spec.s,
        sz: brute.sz,
        lz: brute.lz,
        jz: brute.jz,
        energy: brute.energy,
        closed_form: closed,
        closed_form_residuals: Moments {
            energy: (brute.energy - closed.energy).abs(),
            sz: (brute.sz - closed.sz).abs(),
            lz: (brute.lz - closed.lz).abs(),
            jz: (brute.jz - closed.jz).abs(),
        },
    })
}

fn cmd_expect(a: &ExpectArgs) -> Result<(), CliError> {
    emit(&a.out, &to_json(&expect_record(&a.mode)?))
}

fn cmd_hom(a: &HomArgs) -> Result<(), CliError> {
    if !(a.periods > 0.0 && a.periods.is_finite()) {
        return Err(CliError::Usage("--periods must be positive".into()));
    }
    let family: Family = a.family.into();
    let spec = PairSpec::new(a.omega, a.rotation, a.m, a.s, a.transverse.index()?);
    let taus = hom_delays(family, &spec, a.points as usize, a.periods)?;
    let rows = hom_sweep(family, &spec, &taus)?;
    let mut out = String::from("tau,analytic,bruteforce,abs_diff\n");
    for r in rows {
        let _ = writeln!(out, "{}", [r.tau, r.analytic, r.bruteforce, r.abs_diff].map(num).join(","));
    }
    emit(&a.out, &out)
}

fn cmd_singlet(a: &SingletArgs) -> Result<(), CliError> {
    let spec = SingletSpec {
        flavor: match a.flavor {
            FlavorArg::Polarization => Flavor::Polarization,
            FlavorArg::Orbital => Flavor::Orbital,
        },
        omega: a.omega,
        rotation: a.rotation,
        m: a.m,
        s: a.s,
        transverse: a.transverse.index()?,
        n_max: 2,
    };
    let report: SingletReport = singlet_report(&spec)?;
    emit(&a.out, &to_json(&report))
}

#[derive(Serialize)]
struct QkdRecord {
    trials: u64,
    seed: u64,
    eavesdrop: Eavesdropper,
    sifted: u64,
    errors: u64,
    sifted_fraction: f64,
    qber: f64,
    mub: MubReport,
    complementarity: Complementarity,
}

fn cmd_qkd(a: &QkdArgs) -> Result<(), CliError> {
    let config = Bb84Config {
        omega: a.omega,
        rotation: a.rotation,
        transverse: a.transverse.index()?,
        trials: a.trials,
        eavesdrop: match a.eavesdrop {
            EavesdropArg::None => Eavesdropper::None,
            EavesdropArg::InterceptResend => Eavesdropper::InterceptResend(Bb84Basis::Rotating),
            EavesdropArg::InterceptResendFrequency => Eavesdropper::InterceptResend(Bb84Basis::Frequency),
            EavesdropArg::InterceptResendRandom => Eavesdropper::InterceptResendRandom,
        },
        seed: a.seed,
    };
    let stats = bb84_simulate(&config)?;
    let record = QkdRecord {
        trials: stats.trials,
        seed: config.seed,
        eavesdrop: config.eavesdrop,
        sifted: stats.sifted,
        errors: stats.errors,
        sifted_fraction: stats.sifted_fraction,
        qber: stats.qber,
        mub: mub_overlap_matrix(&config)?,
        complementarity: measurement_complementarity(&config)?,
    };
    emit(&a.out, &to_json(&record))
}

#[derive(Serialize)]
struct AtomRecord {
    omega0: f64,
    sigma: f64,
    rotation: f64,
    config: AtomConfig,
    result: StorageResult,
}

fn cmd_atom(a: &AtomArgs) -> Result<(), CliError> {
    let spectrum = make_gaussian_spectrum(a.omega0, a.sigma)?;
    let config = AtomConfig {
        omega_a: a.omega_a.unwrap_or(a.omega0),
        gamma: a.gamma,
        z_prime: a.z_prime,
        p0: a.p0,
        motional_sigma: a.motional_sigma,
    };
    let result = absorb(&spectrum, a.rotation, &config)?;
    emit(&a.out, &to_json(&AtomRecord { omega0: a.omega0, sigma: a.sigma, rotation: a.rotation, config, result }))
}

#[derive(Serialize)]
struct LabelEntry {
    omega: f64,
    m: i32,
    s: i32,
    coefficient: num_complex::Complex64,
}

#[derive(Serialize)]
struct ModeEntry {
    family: String,
    sign: String,
    labels: Vec<LabelEntry>,
    closed_form: Moments,
}

#[derive(Serialize)]
struct SkippedFamily {
    family: String,
    reason: String,
}

#[derive(Serialize)]
struct ModesRecord {
    modes: Vec<ModeEntry>,
    skipped: Vec<SkippedFamily>,
}

fn cmd_modes(a: &ModesArgs) -> Result<(), CliError> {
    let mut spec = PairSpec::new(a.omega, a.rotation, a.m, a.s, a.transverse.index()?);
    if let Some(r2) = a.rotation2 {
        spec = spec.with_rotation2(r2);
    }
    let mut record = ModesRecord { modes: Vec::new(), skipped: Vec::new() };
    for family in Family::ROTATING {
        let mut basis = ModeBasis::new(0.0);
        match build_pair(&mut basis, family, &spec) {
            Ok((plus, minus)) => {
                for mode in [plus, minus] {
                    let labels = mode
                        .coefficients
                        .iter()
                        .map(|(k, c)| {
                            let l = basis.label(k);
                            LabelEntry { omega: l.omega(), m: l.m(), s: l.s(), coefficient: c }
                        })
                        .collect();
                    record.modes.push(ModeEntry {
                        family: family.to_string(),
                        sign: mode.sign.to_string(),
                        labels,
                        closed_form: closed_form_moments(family, mode.sign, &spec)?,
                    });
                }
            }
            Err(e) => record.skipped.push(SkippedFamily { family: family.to_string(), reason: e.to_string() }),
        }
    }
    emit(&a.out, &to_json(&record))
}

/// Sizes the global rayon pool from `ROTOMODE_THREADS`.
pub fn configure_threads() -> Result<(), CliError> {
    match std::env::var("ROTOMODE_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| CliError::Usage(format!("ROTOMODE_THREADS must be a positive integer, got {v:?}")))?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Usage(e.to_string()))
        }
        Err(_) => Ok(()),
    }
}
