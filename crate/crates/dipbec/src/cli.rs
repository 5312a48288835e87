//! Command-line front end: every toolkit operation as a subcommand with
//! TOML config support and machine-readable CSV/JSON outputs. Flag values
//! override config-file values, which override built-in defaults; the
//! resolved configuration is echoed into every output header so a run can
//! be reproduced from its files alone.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, ComplexWidthState, EvolveOptions, Outcome};
use crate::error::Error;
use crate::exceptional;
use crate::poincare::{self, SectionOptions};
use crate::stationary::{self, ContinuationControl, Stability, StationaryState};
use crate::units::{self, AtomSpec, TrapParams};

const KAPPA_NOTE: &str = "kappa = sigma_z/sigma_r = sqrt(A_r/A_z)";
const UNIT_NOTE: &str =
    "dipole units; widths are N^2 A (inverse squared dipole lengths), energies and chemical potentials are N^2-scaled";

#[derive(Parser, Debug)]
#[command(
    name = "dipbec",
    version,
    about = "Gaussian variational toolkit for dipolar condensates"
)]
struct Cli {
    /// TOML config file supplying defaults for parameters and options.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV/JSON files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for map/sweep commands (default: available
    /// parallelism; also via DIPBEC_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct ParamArgs {
    /// Scaled mean trap frequency N²γ̄ (with --lambda).
    #[arg(long)]
    gbar: Option<f64>,
    /// Trap aspect ratio λ = γ_z/γ_r.
    #[arg(long)]
    lambda: Option<f64>,
    /// Scaled radial trap frequency N²γ_r (with --gamma-z).
    #[arg(long)]
    gamma_r: Option<f64>,
    /// Scaled axial trap frequency N²γ_z.
    #[arg(long)]
    gamma_z: Option<f64>,
    /// Scattering length over dipole length, a/a_d.
    #[arg(long)]
    a: Option<f64>,
    /// Lab style: particle number.
    #[arg(long)]
    n: Option<u64>,
    /// Lab style: radial trap frequency f_r = ω_r/2π in Hz.
    #[arg(long)]
    fr: Option<f64>,
    /// Lab style: axial trap frequency f_z = ω_z/2π in Hz.
    #[arg(long)]
    fz: Option<f64>,
    /// Lab style: isotropic mean trap frequency in Hz (sets fr = fz).
    #[arg(long)]
    fbar: Option<f64>,
    /// Lab style: scattering length in Bohr radii.
    #[arg(long)]
    a_bohr: Option<f64>,
    /// Species shortcut (`cr` = chromium-52 with μ = 6 μ_B).
    #[arg(long)]
    element: Option<String>,
    /// Species mass ratio m/m_e.
    #[arg(long)]
    mass_ratio: Option<f64>,
    /// Species magnetic moment μ/μ_B.
    #[arg(long)]
    mu: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dipole units for a species; scaled trap parameters from lab numbers.
    Units(UnitsArgs),
    /// Ground and excited stationary state with stability tags.
    Stationary(StationaryArgs),
    /// Both stationary branches over a scattering-length range.
    Branches(BranchesArgs),
    /// Critical scattering length for one trap.
    Crit(CritArgs),
    /// Critical scattering length over a (N²γ̄, λ) grid.
    CritMap(CritMapArgs),
    /// Complex-plane circle around the fold: exceptional-point test.
    EpCircle(EpCircleArgs),
    /// Linearization spectra of the two stationary states.
    Stability(StabilityArgs),
    /// Time evolution of a complex-width state.
    Evolve(EvolveArgs),
    /// Poincaré surfaces of section at fixed energies.
    Poincare(PoincareArgs),
}

#[derive(Args, Debug)]
struct UnitsArgs {
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args, Debug)]
struct StationaryArgs {
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args, Debug)]
struct BranchesArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Lower end of the a/a_d range.
    #[arg(long)]
    a_min: Option<f64>,
    /// Upper end of the a/a_d range (must sit above the fold).
    #[arg(long)]
    a_max: Option<f64>,
    /// Maximum continuation arclength step.
    #[arg(long)]
    max_step: Option<f64>,
}

#[derive(Args, Debug)]
struct CritArgs {
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args, Debug)]
struct CritMapArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    gbar_min: Option<f64>,
    #[arg(long)]
    gbar_max: Option<f64>,
    #[arg(long)]
    gbar_count: Option<usize>,
    #[arg(long)]
    lambda_min: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    lambda_count: Option<usize>,
}

#[derive(Args, Debug)]
struct EpCircleArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Circle centre in the a/a_d plane, or `auto` for the computed fold.
    #[arg(long, default_value = "auto")]
    center: String,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args, Debug)]
struct StabilityArgs {
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Initial state: multiply the ground widths by these factors.
    #[arg(long)]
    scale_ar: Option<f64>,
    #[arg(long)]
    scale_az: Option<f64>,
    /// Initial imaginary parts as fractions of the real widths.
    #[arg(long)]
    im_ar: Option<f64>,
    #[arg(long)]
    im_az: Option<f64>,
    /// Window length in axial breathing periods 2π/(4 N²γ_z).
    #[arg(long)]
    periods: Option<f64>,
    /// Integration tolerance (abs = rel).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct PoincareArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Comma-separated list of scaled energies; default is the seven-panel
    /// ladder in multiples of the ground-state energy.
    #[arg(long)]
    energies: Option<String>,
    /// Trajectories per panel.
    #[arg(long)]
    seeds: Option<usize>,
    /// Window length as a multiple of the default (≥500 crossings) window.
    #[arg(long)]
    window: Option<f64>,
    /// RNG seed for the box sampling.
    #[arg(long)]
    rng_seed: Option<u64>,
}

// --- config file -------------------------------------------------------------

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    params: ParamConfig,
    output: OutputConfig,
    branches: BranchesConfig,
    crit_map: CritMapConfig,
    ep_circle: EpCircleConfig,
    evolve: EvolveConfig,
    poincare: PoincareConfig,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ParamConfig {
    gbar: Option<f64>,
    lambda: Option<f64>,
    gamma_r: Option<f64>,
    gamma_z: Option<f64>,
    a: Option<f64>,
    n: Option<u64>,
    fr: Option<f64>,
    fz: Option<f64>,
    fbar: Option<f64>,
    a_bohr: Option<f64>,
    element: Option<String>,
    mass_ratio: Option<f64>,
    mu: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OutputConfig {
    dir: Option<PathBuf>,
    workers: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BranchesConfig {
    a_min: Option<f64>,
    a_max: Option<f64>,
    max_step: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CritMapConfig {
    gbar_min: Option<f64>,
    gbar_max: Option<f64>,
    gbar_count: Option<usize>,
    lambda_min: Option<f64>,
    lambda_max: Option<f64>,
    lambda_count: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EpCircleConfig {
    center: Option<f64>,
    radius: Option<f64>,
    steps: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EvolveConfig {
    scale_ar: Option<f64>,
    scale_az: Option<f64>,
    im_ar: Option<f64>,
    im_az: Option<f64>,
    periods: Option<f64>,
    tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PoincareConfig {
    energies: Option<Vec<f64>>,
    seeds: Option<usize>,
    window: Option<f64>,
    rng_seed: Option<u64>,
}

/// Parameter style after resolution, kept for the echoed config.
#[derive(Debug, Clone, Serialize)]
struct ResolvedParams {
    style: &'static str,
    scattering_ratio: f64,
    scaled_gamma_r: f64,
    scaled_gamma_z: f64,
    scaled_gamma_bar: f64,
    lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    atom: Option<AtomSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_atoms: Option<u64>,
}

fn resolve_atom(p: &ParamArgs) -> Result<AtomSpec, Error> {
    if let Some(el) = &p.element {
        let base = match el.to_ascii_lowercase().as_str() {
            "cr" | "cr52" | "chromium" => AtomSpec::chromium_52(),
            other => {
                return Err(Error::Config(format!("unknown element '{other}'; use --mass-ratio")))
            }
        };
        let mu = p.mu.unwrap_or(base.magnetic_moment);
        return AtomSpec::new(p.mass_ratio.unwrap_or(base.mass_ratio), mu);
    }
    match (p.mass_ratio, p.mu) {
        (Some(m), Some(mu)) => AtomSpec::new(m, mu),
        _ => Err(Error::Config(
            "lab-style parameters need --element or both --mass-ratio and --mu".into(),
        )),
    }
}

/// Merge CLI-level parameters over the config file and normalize to
/// TrapParams. Exactly one parameter style must be in play.
fn resolve_params(cli: &ParamArgs, file: &ParamConfig) -> Result<(TrapParams, ResolvedParams), Error> {
    let merged = ParamArgs {
        gbar: cli.gbar.or(file.gbar),
        lambda: cli.lambda.or(file.lambda),
        gamma_r: cli.gamma_r.or(file.gamma_r),
        gamma_z: cli.gamma_z.or(file.gamma_z),
        a: cli.a.or(file.a),
        n: cli.n.or(file.n),
        fr: cli.fr.or(file.fr),
        fz: cli.fz.or(file.fz),
        fbar: cli.fbar.or(file.fbar),
        a_bohr: cli.a_bohr.or(file.a_bohr),
        element: cli.element.clone().or_else(|| file.element.clone()),
        mass_ratio: cli.mass_ratio.or(file.mass_ratio),
        mu: cli.mu.or(file.mu),
    };
    let scaled_style = merged.gbar.is_some() || merged.gamma_r.is_some();
    let lab_style = merged.n.is_some();
    if scaled_style && lab_style {
        return Err(Error::Config("use either scaled or lab parameters, not both".into()));
    }
    if lab_style {
        let n = merged.n.unwrap();
        let atom = resolve_atom(&merged)?;
        let (fr, fz) = match (merged.fr, merged.fz, merged.fbar) {
            (Some(fr), Some(fz), _) => (fr, fz),
            (None, None, Some(fbar)) => (fbar, fbar),
            _ => {
                return Err(Error::Config(
                    "lab-style parameters need --fr and --fz, or --fbar".into(),
                ))
            }
        };
        let p = units::scale_lab_to_params(n, fr, fz, merged.a_bohr.unwrap_or(0.0), &atom)?;
        let resolved = ResolvedParams {
            style: "lab",
            scattering_ratio: p.scattering_ratio,
            scaled_gamma_r: p.scaled_gamma_r,
            scaled_gamma_z: p.scaled_gamma_z,
            scaled_gamma_bar: p.scaled_gamma_bar(),
            lambda: p.lambda(),
            atom: Some(atom),
            n_atoms: Some(n),
        };
        return Ok((p, resolved));
    }
    let a = merged.a.unwrap_or(0.0);
    let p = match (merged.gamma_r, merged.gamma_z, merged.gbar, merged.lambda) {
        (Some(gr), Some(gz), None, None) => TrapParams::new(a, gr, gz)?,
        (None, None, Some(gbar), Some(lambda)) => TrapParams::from_mean(a, gbar, lambda)?,
        (None, None, None, None) => {
            return Err(Error::Config(
                "trap parameters missing: --gbar/--lambda, --gamma-r/--gamma-z, or lab style".into(),
            ))
        }
        _ => {
            return Err(Error::Config(
                "give either --gbar with --lambda or --gamma-r with --gamma-z".into(),
            ))
        }
    };
    let resolved = ResolvedParams {
        style: "scaled",
        scattering_ratio: p.scattering_ratio,
        scaled_gamma_r: p.scaled_gamma_r,
        scaled_gamma_z: p.scaled_gamma_z,
        scaled_gamma_bar: p.scaled_gamma_bar(),
        lambda: p.lambda(),
        atom: None,
        n_atoms: None,
    };
    Ok((p, resolved))
}

// --- output helpers ------------------------------------------------------------

struct Report {
    command: String,
    config: serde_json::Value,
}

impl Report {
    fn new(command: &str, config: serde_json::Value) -> Self {
        Self { command: command.to_string(), config }
    }

    fn header(&self) -> String {
        format!(
            "# dipbec v{}\n# command: {}\n# units: {}\n# kappa: {}\n# config: {}\n",
            env!("CARGO_PKG_VERSION"),
            self.command,
            UNIT_NOTE,
            KAPPA_NOTE,
            self.config
        )
    }

    fn write_csv(&self, path: &Path, columns: &str, rows: &[String], footer: &[String]) -> Result<(), Error> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut f = fs::File::create(path)?;
        f.write_all(self.header().as_bytes())?;
        writeln!(f, "{columns}")?;
        for r in rows {
            writeln!(f, "{r}")?;
        }
        for line in footer {
            writeln!(f, "# {line}")?;
        }
        Ok(())
    }

    fn write_json(&self, path: &Path, value: &serde_json::Value) -> Result<(), Error> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let doc = serde_json::json!({
            "tool": format!("dipbec v{}", env!("CARGO_PKG_VERSION")),
            "command": self.command,
            "units": UNIT_NOTE,
            "kappa": KAPPA_NOTE,
            "config": self.config,
            "result": value,
        });
        fs::write(path, serde_json::to_string_pretty(&doc).map_err(|e| Error::Config(e.to_string()))?)?;
        Ok(())
    }
}

fn stability_word(s: Stability) -> &'static str {
    match s {
        Stability::Stable => "stable",
        Stability::Unstable => "unstable",
        Stability::Unclassified => "unclassified",
    }
}

fn outcome_word(o: Outcome) -> &'static str {
    match o {
        Outcome::Bounded => "bounded",
        Outcome::Collapsed => "collapsed",
        Outcome::EscapedWindow => "escaped-integration-window",
    }
}

fn state_row(label: &str, a: f64, st: &StationaryState) -> String {
    format!(
        "{label},{a},{},{},{},{},{}",
        st.widths.a_r,
        st.widths.a_z,
        st.chem_potential,
        st.energy,
        stability_word(st.stability)
    )
}

// --- command implementations -----------------------------------------------------

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, Error> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn cmd_units(args: &UnitsArgs, file: &FileConfig, out: &Option<PathBuf>) -> Result<(), Error> {
    let merged_atom = {
        let mut p = args.params.clone();
        if p.element.is_none() {
            p.element = file.params.element.clone();
        }
        p.mass_ratio = p.mass_ratio.or(file.params.mass_ratio);
        p.mu = p.mu.or(file.params.mu);
        p
    };
    let atom = resolve_atom(&merged_atom)?;
    let a_d = units::dipole_length(&atom);
    let derived = units::derived_units(&atom);
    let mut result = serde_json::json!({
        "atom": atom,
        "dipole_length_bohr": a_d,
        "energy_unit_ev": derived.energy_ev,
        "frequency_unit_hz": derived.frequency_hz(),
    });
    println!(
        "a_d = {:.4} a_0   E_d = {:.4e} eV   omega_d/2pi = {:.4e} Hz",
        a_d,
        derived.energy_ev,
        derived.frequency_hz()
    );
    let n = args.params.n.or(file.params.n);
    let fr = args.params.fr.or(file.params.fr);
    let fz = args.params.fz.or(file.params.fz);
    let fbar = args.params.fbar.or(file.params.fbar);
    if let Some(n) = n {
        let (fr, fz) = match (fr, fz, fbar) {
            (Some(a), Some(b), _) => (a, b),
            (None, None, Some(f)) => (f, f),
            _ => return Err(Error::Config("units with --n needs --fr/--fz or --fbar".into())),
        };
        let a_bohr = args.params.a_bohr.or(file.params.a_bohr).unwrap_or(0.0);
        let p = units::scale_lab_to_params(n, fr, fz, a_bohr, &atom)?;
        println!(
            "N^2 gbar = {:.4e}   N^2 gamma_r = {:.4e}   N^2 gamma_z = {:.4e}   lambda = {:.4}   D = {:.4e}   a/a_d = {:.6}",
            p.scaled_gamma_bar(),
            p.scaled_gamma_r,
            p.scaled_gamma_z,
            p.lambda(),
            units::d_parameter(&p),
            p.scattering_ratio
        );
        result["trap"] = serde_json::json!({
            "scaled_gamma_bar": p.scaled_gamma_bar(),
            "scaled_gamma_r": p.scaled_gamma_r,
            "scaled_gamma_z": p.scaled_gamma_z,
            "lambda": p.lambda(),
            "d_parameter": units::d_parameter(&p),
            "scattering_ratio": p.scattering_ratio,
        });
    }
    if let Some(dir) = out {
        let report = Report::new("units", serde_json::json!({ "atom": atom, "n": n, "fr": fr, "fz": fz, "fbar": fbar }));
        report.write_json(&dir.join("units.json"), &result)?;
    }
    Ok(())
}

fn cmd_stationary(args: &StationaryArgs, file: &FileConfig, out: &Option<PathBuf>) -> Result<(), Error> {
    let (p, resolved) = resolve_params(&args.params, &file.params)?;
    let (g, e) = stationary::stationary_pair(&p)?;
    let g = dynamics::classify_state(&g, &p);
    let e = dynamics::classify_state(&e, &p);
    println!(
        "ground:  A_r = {:.6e}  A_z = {:.6e}  N^2E = {:.6e}  N^2eps = {:.6e}  [{}]",
        g.widths.a_r,
        g.widths.a_z,
        g.energy,
        g.chem_potential,
        stability_word(g.stability)
    );
    println!(
        "excited: A_r = {:.6e}  A_z = {:.6e}  N^2E = {:.6e}  N^2eps = {:.6e}  [{}]",
        e.widths.a_r,
        e.widths.a_z,
        e.energy,
        e.chem_potential,
        stability_word(e.stability)
    );
    println!("energy ratio E_es/E_gs = {:.6}", e.energy / g.energy);
    if let Some(dir) = out {
        let report = Report::new("stationary", serde_json::to_value(&resolved).unwrap());
        report.write_csv(
            &dir.join("stationary.csv"),
            "branch,a_ratio,a_r,a_z,chem_potential,energy,stability",
            &[
                state_row("ground", p.scattering_ratio, &g),
                state_row("excited", p.scattering_ratio, &e),
            ],
            &[],
        )?;
        report.write_json(
            &dir.join("stationary.json"),
            &serde_json::json!({ "ground": g, "excited": e }),
        )?;
    }
    Ok(())
}

fn cmd_branches(args: &BranchesArgs, file: &FileConfig, out: &Option<PathBuf>) -> Result<(), Error> {
    let (p, resolved) = resolve_params(&args.params, &file.params)?;
    let a_min = args.a_min.or(file.branches.a_min).unwrap_or(-0.05);
    let a_max = args.a_max.or(file.branches.a_max).unwrap_or(0.1);
    let mut ctl = ContinuationControl::default();
    if let Some(ms) = args.max_step.or(file.branches.max_step) {
        ctl.max_step = ms;
        ctl.initial_step = ctl.initial_step.min(ms);
    }
    let pair = stationary::trace_branches(&p, (a_min, a_max), &ctl)?;
    match &pair.fold {
        Some(f) => println!(
            "fold at a/a_d = {:.8}  (A_r = {:.5e}, A_z = {:.5e}); ground {} pts, excited {} pts",
            f.scattering_ratio,
            f.widths.a_r,
            f.widths.a_z,
            pair.ground.states.len(),
            pair.excited.states.len()
        ),
        None => println!(
            "no fold inside [{a_min}, {a_max}]; ground {} pts, excited {} pts",
            pair.ground.states.len(),
            pair.excited.states.len()
        ),
    }
    if let Some(dir) = out {
        let mut config = serde_json::to_value(&resolved).unwrap();
        config["a_min"] = a_min.into();
        config["a_max"] = a_max.into();
        let report = Report::new("branches", config);
        let mut rows = Vec::new();
        for (s, st) in pair.ground.scattering.iter().zip(&pair.ground.states) {
            rows.push(state_row("ground", *s, st));
        }
        for (s, st) in pair.excited.scattering.iter().zip(&pair.excited.states) {
            rows.push(state_row("excited", *s, st));
        }
        let footer = match &pair.fold {
            Some(f) => vec![format!(
                "fold: a_crit/a_d = {}, A_r = {}, A_z = {}",
                f.scattering_ratio, f.widths.a_r, f.widths.a_z
            )],
            None => vec!["fold: none in range".to_string()],
        };
        report.write_csv(
            &dir.join("branches.csv"),
            "branch,a_ratio,a_r,a_z,chem_potential,energy,stability",
            &rows,
            &footer,
        )?;
    }
    Ok(())
}

fn cmd_crit(args: &CritArgs, file: &FileConfig, out: &Option<PathBuf>) -> Result<(), Error> {
    let (p, resolved) = resolve_params(&args.params, &file.params)?;
    let fold = stationary::critical_fold(
        &p,
        crate::meanfield::Couplings::FULL,
        (-1.0, 1.0 / 6.0 - 1e-9),
    )?;
    println!("a_crit/a_d = {:.6}", fold.scattering_ratio);
    if let Some(dir) = out {
        let report = Report::new("crit", serde_json::to_value(&resolved).unwrap());
        report.write_json(
            &dir.join("crit.json"),
            &serde_json::json!({
                "a_crit_over_a_d": fold.scattering_ratio,
                "fold_widths": { "a_r": fold.widths.a_r, "a_z": fold.widths.a_z },
            }),
        )?;
    }
    Ok(())
}

fn cmd_crit_map(args: &CritMapArgs, file: &FileConfig, out: &Option<PathBuf>) -> Result<i32, Error> {
    let gbar_min = args.gbar_min.or(file.crit_map.gbar_min).unwrap_or(1e2);
    let gbar_max = args.gbar_max.or(file.crit_map.gbar_max).unwrap_or(1e6);
    let gbar_count = args.gbar_count.or(file.crit_map.gbar_count).unwrap_or(20);
    let lambda_min = args.lambda_min.or(file.crit_map.lambda_min).unwrap_or(0.1);
    let lambda_max = args.lambda_max.or(file.crit_map.lambda_max).unwrap_or(6.0);
    let lambda_count = args.lambda_count.or(file.crit_map.lambda_count).unwrap_or(20);
    if gbar_count < 1 || lambda_count < 1 || !(gbar_max >= gbar_min) || !(lambda_max >= lambda_min)
    {
        return Err(Error::Config("invalid crit-map grid".into()));
    }
    let logspace = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        if n == 1 {
            return vec![lo];
        }
        (0..n)
            .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
            .collect()
    };
    let gbars = logspace(gbar_min, gbar_max, gbar_count);
    let lambdas = logspace(lambda_min, lambda_max, lambda_count);
    let cells = stationary::threshold_map(&gbars, &lambdas);
    let failures = cells.iter().filter(|c| c.a_crit.is_none()).count();
    println!(
        "threshold map {}x{}: {} cells, {} failed",
        gbar_count,
        lambda_count,
        cells.len(),
        failures
    );
    if let Some(dir) = out {
        let config = serde_json::json!({
            "gbar": { "min": gbar_min, "max": gbar_max, "count": gbar_count },
            "lambda": { "min": lambda_min, "max": lambda_max, "count": lambda_count },
        });
        let report = Report::new("crit-map", config);
        let rows: Vec<String> = cells
            .iter()
            .map(|c| {
                format!(
                    "{},{},{},{}",
                    c.scaled_gamma_bar,
                    c.lambda,
                    c.a_crit.map(|v| v.to_string()).unwrap_or_else(|| "nan".into()),
                    c.error.clone().unwrap_or_else(|| "ok".into())
                )
            })
            .collect();
        report.write_csv(&dir.join("crit_map.csv"), "gbar,lambda,a_crit,status", &rows, &[])?;
    }
    for c in cells.iter().filter(|c| c.error.is_some()) {
        eprintln!(
            "warning: cell (gbar = {:.4e}, lambda = {:.4}) failed: {}",
            c.scaled_gamma_bar,
            c.lambda,
            c.error.as_ref().unwrap()
        );
    }
    Ok(0)
}

fn cmd_ep_circle(args: &EpCircleArgs, file: &FileConfig, out: &Option<PathBuf>) -> Result<(), Error> {
    let (p, resolved) = resolve_params(&args.params, &file.params)?;
    let radius = args.radius.or(file.ep_circle.radius).unwrap_or(1e-3);
    let steps = args.steps.or(file.ep_circle.steps).unwrap_or(64);
    let center = if args.center == "auto" {
        match file.ep_circle.center {
            Some(c) => c,
            None => {
                stationary::critical_fold(
                    &p,
                    crate::meanfield::Couplings::FULL,
                    (-1.0, 1.0 / 6.0 - 1e-9),
                )?
                .scattering_ratio
            }
        }
    } else {
        args.center
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("--center must be a number or 'auto', got {}", args.center)))?
    };
    let res = exceptional::encircle(&p, center, radius, steps)?;
    println!("permuted: {}", res.permuted);
    if let Some(dir) = out {
        let mut config = serde_json::to_value(&resolved).unwrap();
        config["center"] = center.into();
        config["radius"] = radius.into();
        config["steps"] = steps.into();
        let report = Report::new("ep-circle", config);
        let rows: Vec<String> = res
            .samples
            .iter()
            .map(|s| {
                format!(
                    "{},{},{},{},{},{},{}",
                    s.phi,
                    s.scattering.re,
                    s.scattering.im,
                    s.states[0].chem_potential.re,
                    s.states[0].chem_potential.im,
                    s.states[1].chem_potential.re,
                    s.states[1].chem_potential.im
                )
            })
            .collect();
        report.write_csv(
            &dir.join("ep_circle.csv"),
            "phi,re_a,im_a,re_eps_1,im_eps_1,re_eps_2,im_eps_2",
            &rows,
            &[format!("permuted: {}", res.permuted)],
        )?;
    }
    Ok(())
}

fn cmd_stability(args: &StabilityArgs, file: &FileConfig, out: &Option<PathBuf>) -> Result<(), Error> {
    let (p, resolved) = resolve_params(&args.params, &file.params)?;
    let (g, e) = stationary::stationary_pair(&p)?;
    let sg = dynamics::linearize(&g, &p);
    let se = dynamics::linearize(&e, &p);
    let show = |label: &str, spectrum: &dynamics::StabilitySpectrum| {
        let words: Vec<String> = spectrum
            .eigenvalues
            .iter()
            .map(|k| format!("{:+.6e}{:+.6e}i", k.re, k.im))
            .collect();
        println!(
            "{label}: {} -> {:?}",
            words.join("  "),
            spectrum.classification
        );
    };
    show("ground ", &sg);
    show("excited", &se);
    if let Some(dir) = out {
        let report = Report::new("stability", serde_json::to_value(&resolved).unwrap());
        let mut rows = Vec::new();
        for (label, spectrum) in [("ground", &sg), ("excited", &se)] {
            for k in spectrum.eigenvalues {
                rows.push(format!("{label},{},{}", k.re, k.im));
            }
        }
        report.write_csv(&dir.join("stability.csv"), "branch,re_kappa,im_kappa", &rows, &[])?;
        report.write_json(
            &dir.join("stability.json"),
            &serde_json::json!({ "ground": sg, "excited": se }),
        )?;
    }
    Ok(())
}

fn cmd_evolve(args: &EvolveArgs, file: &FileConfig, out: &Option<PathBuf>) -> Result<(), Error> {
    let (p, resolved) = resolve_params(&args.params, &file.params)?;
    let ground = stationary::find_ground(&p)?;
    let scale_ar = args.scale_ar.or(file.evolve.scale_ar).unwrap_or(1.05);
    let scale_az = args.scale_az.or(file.evolve.scale_az).unwrap_or(0.97);
    let im_ar = args.im_ar.or(file.evolve.im_ar).unwrap_or(0.0);
    let im_az = args.im_az.or(file.evolve.im_az).unwrap_or(0.0);
    let periods = args.periods.or(file.evolve.periods).unwrap_or(100.0);
    let tol = args.tol.or(file.evolve.tol).unwrap_or(1e-10);
    let s0 = ComplexWidthState::new(
        Complex64::new(scale_ar * ground.widths.a_r, im_ar * ground.widths.a_r),
        Complex64::new(scale_az * ground.widths.a_z, im_az * ground.widths.a_z),
    )?;
    let t_end = periods * 2.0 * std::f64::consts::PI / (4.0 * p.scaled_gamma_z);
    let opts = EvolveOptions { rtol: tol, atol: tol, ..Default::default() };
    let traj = dynamics::evolve(&s0, &p, t_end, &opts)?;
    let e0 = traj.energy_series[0];
    let drift = traj
        .energy_series
        .iter()
        .map(|e| ((e - e0) / e0).abs())
        .fold(0.0, f64::max);
    println!(
        "evolved to t = {:.6e} in {} steps: outcome {}, max energy drift {:.3e}",
        traj.times.last().unwrap(),
        traj.times.len() - 1,
        outcome_word(traj.outcome),
        drift
    );
    if let Some(dir) = out {
        let mut config = serde_json::to_value(&resolved).unwrap();
        config["initial"] = serde_json::json!({
            "scale_ar": scale_ar, "scale_az": scale_az, "im_ar": im_ar, "im_az": im_az,
        });
        config["periods"] = periods.into();
        config["tol"] = tol.into();
        let report = Report::new("evolve", config);
        let rows: Vec<String> = traj
            .times
            .iter()
            .zip(&traj.states)
            .zip(&traj.energy_series)
            .map(|((t, s), e)| {
                format!(
                    "{},{},{},{},{},{}",
                    t, s.a_r.re, s.a_r.im, s.a_z.re, s.a_z.im, e
                )
            })
            .collect();
        report.write_csv(
            &dir.join("trajectory.csv"),
            "t,re_a_r,im_a_r,re_a_z,im_a_z,energy",
            &rows,
            &[format!("outcome: {}", outcome_word(traj.outcome))],
        )?;
    }
    Ok(())
}

fn cmd_poincare(args: &PoincareArgs, file: &FileConfig, out: &Option<PathBuf>) -> Result<i32, Error> {
    let (p, resolved) = resolve_params(&args.params, &file.params)?;
    let ground = stationary::find_ground(&p)?;
    let energies: Vec<f64> = match (&args.energies, &file.poincare.energies) {
        (Some(list), _) => list
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad energy '{tok}'")))
            })
            .collect::<Result<_, _>>()?,
        (None, Some(v)) => v.clone(),
        (None, None) => poincare::panel_energy_ladder(ground.energy),
    };
    let n_seeds = args.seeds.or(file.poincare.seeds).unwrap_or(24);
    let window_mult = args.window.or(file.poincare.window).unwrap_or(1.0);
    let mut opts = SectionOptions::default();
    if let Some(seed) = args.rng_seed.or(file.poincare.rng_seed) {
        opts.rng_seed = seed;
    }
    let t_end = window_mult * poincare::default_window(&p);
    let panels = poincare::panel_sweep(&p, &energies, n_seeds, t_end, &opts)?;
    let mut failures = 0;
    for (i, panel) in panels.iter().enumerate() {
        match panel {
            Ok(ds) => {
                let collapsed = ds
                    .outcomes
                    .iter()
                    .filter(|r| r.outcome == Outcome::Collapsed)
                    .count();
                println!(
                    "panel {}: E = {:.4e}, {} trajectories, {} points, {} collapsed",
                    i + 1,
                    ds.energy,
                    ds.outcomes.len(),
                    ds.points.len(),
                    collapsed
                );
            }
            Err(e) => {
                failures += 1;
                eprintln!("warning: panel {} failed: {e}", i + 1);
            }
        }
    }
    if let Some(dir) = out {
        for (i, panel) in panels.iter().enumerate() {
            let Ok(ds) = panel else { continue };
            let mut config = serde_json::to_value(&resolved).unwrap();
            config["energy"] = ds.energy.into();
            config["seeds"] = n_seeds.into();
            config["window"] = t_end.into();
            config["rng_seed"] = opts.rng_seed.into();
            config["crossing_direction"] = "Im(A_z) = 0, d Im(A_z)/dt > 0".into();
            config["az_branch"] = "lower root, continuously connected to the ground state".into();
            let report = Report::new("poincare", config.clone());
            let rows: Vec<String> = ds
                .points
                .iter()
                .map(|pt| {
                    format!(
                        "{},{},{},{}",
                        pt.trajectory_id, pt.crossing_time, pt.re_a_r, pt.im_a_r
                    )
                })
                .collect();
            let base = dir.join(format!("poincare_panel{}", i + 1));
            report.write_csv(
                &base.with_extension("csv"),
                "trajectory_id,crossing_time,re_a_r,im_a_r",
                &rows,
                &[],
            )?;
            report.write_json(
                &base.with_extension("json"),
                &serde_json::json!({
                    "energy": ds.energy,
                    "outcomes": ds.outcomes.iter().map(|r| serde_json::json!({
                        "trajectory_id": r.trajectory_id,
                        "outcome": outcome_word(r.outcome),
                        "crossings": r.crossings,
                    })).collect::<Vec<_>>(),
                }),
            )?;
        }
    }
    Ok(if failures > 0 { 0 } else { 0 })
}

/// Entry point for the `dipbec` binary: parse, dispatch, map errors to exit
/// codes (2 config, 3 numerical).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version as "errors" with success status
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let workers = cli
        .workers
        .or_else(|| std::env::var("DIPBEC_WORKERS").ok().and_then(|v| v.parse().ok()));
    if let Some(n) = workers {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let file = match load_config(&cli.config) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let out = cli.out.or_else(|| file.output.dir.clone());
    let result: Result<i32, Error> = match &cli.command {
        Command::Units(a) => cmd_units(a, &file, &out).map(|_| 0),
        Command::Stationary(a) => cmd_stationary(a, &file, &out).map(|_| 0),
        Command::Branches(a) => cmd_branches(a, &file, &out).map(|_| 0),
        Command::Crit(a) => cmd_crit(a, &file, &out).map(|_| 0),
        Command::CritMap(a) => cmd_crit_map(a, &file, &out),
        Command::EpCircle(a) => cmd_ep_circle(a, &file, &out).map(|_| 0),
        Command::Stability(a) => cmd_stability(a, &file, &out).map(|_| 0),
        Command::Evolve(a) => cmd_evolve(a, &file, &out).map(|_| 0),
        Command::Poincare(a) => cmd_poincare(a, &file, &out),
    };
    match result {
        Ok(code) => code,
        Err(e @ Error::Config(_)) | Err(e @ Error::InvalidInput(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            3
        }
    }
}
