//! Batch front-end: a JSON run configuration, one subcommand per figure or
//! budget, deterministic CSV/JSON output with a provenance sidecar.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::blockade::{
    local_fermi_wavevector, suppression_homogeneous, suppression_mc, suppression_series, suppression_trapped,
    SuppressionResult,
};
use crate::error::{Error, Result};
use crate::gas::constants::ATOMIC_MASS_UNIT;
use crate::gas::{derive_scales, GasScales, GasState, SpeciesParams, TrapGeometry};
use crate::observables::{
    angle_to_k, angular_map, lifetime_factor, prepulse_relaxation_mc, sweep, ApertureAveraging, DetectionAxis,
    EmissionWeighting, PrepulseSpec, SweepSpec, SweepVariable, SweepTable,
};
use crate::optics::{optical_density, photon_budget, scattering_rate, DriveParams};
use crate::profile::{blocked_scattering_profile, format_sig, gaussian_blur, radial_average, GridSpec};

/// Environment variable that fixes the worker thread count.
pub const THREADS_ENV: &str = "PAULI_BLOCKADE_THREADS";

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// The default configuration with the experimental parameters filled in.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/reference.json");

#[derive(Debug, Parser)]
#[command(name = "pauli-blockade", version, about = "Pauli blocking of light scattering in a trapped Fermi gas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Suppression factor at every detection axis and any extra transfers
    Suppression(CommonArgs),
    /// S versus T/T_F at fixed k_F/k_R for each detection axis
    SweepTemperature(CommonArgs),
    /// S versus k_F/k_R at fixed T/T_F for each detection axis
    SweepFermi(CommonArgs),
    /// S versus scattering angle
    AngularMap(CommonArgs),
    /// Emission-averaged S and the lifetime multiplier
    Lifetime(CommonArgs),
    /// Column-density, blocked and ratio maps plus radial profiles
    RadialProfile(CommonArgs),
    /// Pre-pulse Fermi-sea destruction Monte Carlo
    Prepulse(CommonArgs),
    /// Scattering rate, optical density and photon budget
    Budget(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Suppression(_) => "suppression",
            Command::SweepTemperature(_) => "sweep-temperature",
            Command::SweepFermi(_) => "sweep-fermi",
            Command::AngularMap(_) => "angular-map",
            Command::Lifetime(_) => "lifetime",
            Command::RadialProfile(_) => "radial-profile",
            Command::Prepulse(_) => "prepulse",
            Command::Budget(_) => "budget",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Suppression(a)
            | Command::SweepTemperature(a)
            | Command::SweepFermi(a)
            | Command::AngularMap(a)
            | Command::Lifetime(a)
            | Command::RadialProfile(a)
            | Command::Prepulse(a)
            | Command::Budget(a) => a,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Run configuration (JSON)
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Overrides the seed of the task block
    #[arg(long)]
    pub seed: Option<u64>,
    /// Evaluation method for `suppression`
    #[arg(long, value_enum, default_value_t = MethodArg::Quadrature)]
    pub method: MethodArg,
    /// Table format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Quadrature,
    Mc,
    Series,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub species: SpeciesBlock,
    pub trap: TrapBlock,
    pub state: StateBlock,
    pub drive: DriveBlock,
    pub detection: Vec<DetectionBlock>,
    pub task: TaskBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesBlock {
    pub mass_u: f64,
    pub wavelength_nm: f64,
    /// `Gamma / 2 pi`
    pub linewidth_mhz: f64,
    pub i_sat_mw_per_cm2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapBlock {
    pub freq_x_hz: f64,
    pub freq_y_hz: f64,
    pub freq_z_hz: f64,
    pub n_per_spin: u64,
    pub n_spins: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateBlock {
    pub t_over_tf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveBlock {
    pub saturation: f64,
    pub detuning_gamma: f64,
    pub duration_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionBlock {
    pub alpha_deg: f64,
    pub na: f64,
    pub qe: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskBlock {
    pub seed: u64,
    pub suppression: Option<SuppressionTask>,
    pub sweep_temperature: Option<SweepTask>,
    pub sweep_fermi: Option<SweepTask>,
    pub angular_map: Option<AngularTask>,
    pub lifetime: Option<LifetimeTask>,
    pub radial_profile: Option<ProfileTask>,
    pub prepulse: Option<PrepulseTask>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuppressionTask {
    /// Transfers evaluated in addition to the detection axes.
    pub extra_k_over_kf: Vec<f64>,
    pub mc_samples: u64,
    pub series_terms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepTask {
    pub grid: Vec<f64>,
    pub averaging: ApertureAveraging,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngularTask {
    pub n_alpha: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifetimeTask {
    pub temperatures: Vec<f64>,
    pub weighting: EmissionWeighting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileTask {
    pub t_over_tf: f64,
    pub probe_alpha_deg: f64,
    pub nx: usize,
    pub ny: usize,
    pub pixel_um: f64,
    pub blur_e2_um: f64,
    pub bin_um: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrepulseTask {
    pub temperatures: Vec<f64>,
    pub probe_alpha_deg: f64,
    pub scatter_rate_per_s: f64,
    pub durations_us: Vec<f64>,
    pub n_atoms_sim: u64,
    pub kick_histories: u32,
}

/// Validated physical setup derived from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Setup {
    pub species: SpeciesParams,
    pub trap: TrapGeometry,
    pub scales: GasScales,
    pub state: GasState,
    pub drive: DriveParams,
    pub axes: Vec<(DetectionAxis, f64)>,
    pub n_spins: u32,
}

// Domain errors raised while reading or evaluating a task trace back to the
// configuration.
fn config_err(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Config(m),
        other => other,
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// SHA-256 of the canonical serialization.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn setup(&self) -> Result<Setup> {
        let s = &self.species;
        let species = SpeciesParams::new(
            s.mass_u * ATOMIC_MASS_UNIT,
            s.wavelength_nm * 1e-9,
            2.0 * std::f64::consts::PI * s.linewidth_mhz * 1e6,
            s.i_sat_mw_per_cm2 * 10.0,
        )
        .map_err(config_err)?;
        let t = &self.trap;
        let trap = TrapGeometry::from_hz(t.freq_x_hz, t.freq_y_hz, t.freq_z_hz).map_err(config_err)?;
        if t.n_spins == 0 {
            return Err(Error::Config("n_spins must be at least 1".into()));
        }
        let scales = derive_scales(&trap, t.n_per_spin, &species).map_err(config_err)?;
        let state = GasState::new(self.state.t_over_tf).map_err(config_err)?;
        let d = &self.drive;
        let drive = DriveParams::new(d.saturation, d.detuning_gamma, d.duration_us * 1e-6).map_err(config_err)?;
        if self.detection.is_empty() {
            return Err(Error::Config("at least one detection axis is required".into()));
        }
        let mut axes = Vec::new();
        for a in &self.detection {
            let axis = DetectionAxis::new(a.alpha_deg, a.na).map_err(config_err)?;
            if !(a.qe > 0.0 && a.qe <= 1.0) {
                return Err(Error::Config(format!("quantum efficiency must lie in (0, 1], got {}", a.qe)));
            }
            axes.push((axis, a.qe));
        }
        Ok(Setup { species, trap, scales, state, drive, axes, n_spins: t.n_spins })
    }
}

impl Setup {
    fn axis(&self, alpha_deg: f64) -> Result<DetectionAxis> {
        self.axes
            .iter()
            .map(|(a, _)| *a)
            .find(|a| a.alpha_deg == alpha_deg)
            .ok_or_else(|| Error::Config(format!("no detection axis at {alpha_deg} degrees")))
    }
}

fn task<'a, T>(block: &'a Option<T>, name: &str) -> Result<&'a T> {
    block.as_ref().ok_or_else(|| Error::Config(format!("config has no task.{name} block")))
}

/// A rectangular table with named columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_sig(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<SweepTable> for Table {
    fn from(t: SweepTable) -> Self {
        Table {
            columns: t.columns,
            rows: t.rows.into_iter().map(|r| r.into_iter().map(Cell::Num).collect()).collect(),
        }
    }
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// JSON form; numbers carry the same nine significant digits as the CSV.
    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<serde_json::Value>> = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| match c {
                        Cell::Num(v) => serde_json::Value::from(format_sig(*v).parse::<f64>().unwrap_or(*v)),
                        Cell::Int(v) => serde_json::Value::from(*v),
                        Cell::Text(s) => serde_json::Value::from(s.clone()),
                    })
                    .collect()
            })
            .collect();
        let value = serde_json::json!({ "columns": self.columns, "rows": rows });
        serde_json::to_string_pretty(&value).expect("table serializes") + "\n"
    }
}

/// Everything a subcommand produced, before anything touches the disk.
#[derive(Debug, Default)]
pub struct Output {
    /// `(file name, contents)`
    pub files: Vec<(String, String)>,
    /// Subcommand-specific provenance entries.
    pub meta: serde_json::Map<String, serde_json::Value>,
}

impl Output {
    fn table(&mut self, stem: &str, table: &Table, format: Format) {
        match format {
            Format::Csv => self.files.push((format!("{stem}.csv"), table.to_csv())),
            Format::Json => self.files.push((format!("{stem}.json"), table.to_json())),
        }
    }

    fn note(&mut self, key: &str, value: impl Serialize) {
        self.meta.insert(key.to_string(), serde_json::to_value(value).expect("meta serializes"));
    }
}

fn provenance(config: &RunConfig, command: &str, seed: Option<u64>, args: &CommonArgs, extra: &serde_json::Map<String, serde_json::Value>) -> serde_json::Value {
    let mut meta = serde_json::json!({
        "subcommand": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config_sha256": config.digest(),
        "seed": seed,
        "method": args.method,
        "format": args.format,
    });
    meta.as_object_mut().expect("object").extend(extra.clone());
    meta
}

/// Evaluates one subcommand into memory.
pub fn execute(command: &Command, config: &RunConfig) -> Result<Output> {
    let args = command.args();
    let setup = config.setup()?;
    let seed = args.seed.unwrap_or(config.task.seed);
    let ratio = setup.scales.ratio_kf_kr;
    let mut out = Output::default();
    out.note("kf_over_kr", ratio);
    out.note("fermi_energy_nk", setup.scales.fermi_energy_nk);
    out.note("recoil_energy_nk", setup.scales.recoil_energy_nk);

    match command {
        Command::Suppression(_) => {
            let t = task(&config.task.suppression, "suppression")?;
            let mut transfers: Vec<(String, f64)> = setup
                .axes
                .iter()
                .map(|(a, _)| (a.label(), angle_to_k(a.alpha_deg, ratio)))
                .collect();
            transfers.extend(t.extra_k_over_kf.iter().map(|k| ("extra".to_string(), *k)));
            let mut table = Table::new(&[
                "label", "method", "t_over_tf", "k_over_kf", "s_value", "std_error", "error_estimate", "evaluations",
            ]);
            let mut skipped = Vec::new();
            for (label, k) in transfers {
                for result in suppression_methods(k, &setup.state, args.method, t, seed, &mut skipped)? {
                    table.rows.push(vec![
                        Cell::Text(label.clone()),
                        Cell::Text(result.method.as_str().to_string()),
                        Cell::Num(setup.state.t_over_tf()),
                        Cell::Num(k),
                        Cell::Num(result.s_value),
                        Cell::Num(result.std_error),
                        Cell::Num(result.error_estimate),
                        Cell::Int(result.evaluations),
                    ]);
                }
            }
            out.note("skipped", skipped);
            out.table("suppression", &table, args.format);
        }
        Command::SweepTemperature(_) | Command::SweepFermi(_) => {
            let temperature = matches!(command, Command::SweepTemperature(_));
            let (name, block) = if temperature {
                ("sweep_temperature", &config.task.sweep_temperature)
            } else {
                ("sweep_fermi", &config.task.sweep_fermi)
            };
            let t = task(block, name)?;
            let spec = SweepSpec {
                variable: if temperature { SweepVariable::TOverTf } else { SweepVariable::KfOverKr },
                fixed: if temperature { ratio } else { setup.state.t_over_tf() },
                grid: t.grid.clone(),
                axes: setup.axes.iter().map(|(a, _)| *a).collect(),
                averaging: t.averaging,
            };
            let table: Table = sweep(&spec).map_err(config_err)?.into();
            out.note("fixed", spec.fixed);
            out.table(name, &table, args.format);
        }
        Command::AngularMap(_) => {
            let t = task(&config.task.angular_map, "angular_map")?;
            let points = angular_map(&setup.state, ratio, t.n_alpha).map_err(config_err)?;
            let mut table = Table::new(&["alpha_deg", "k_over_kf", "s_value"]);
            for p in points {
                table.rows.push(vec![Cell::Num(p.alpha_deg), Cell::Num(p.k_over_kf), Cell::Num(p.s_value)]);
            }
            out.table("angular_map", &table, args.format);
        }
        Command::Lifetime(_) => {
            let t = task(&config.task.lifetime, "lifetime")?;
            let mut table = Table::new(&["t_over_tf", "mean_s", "multiplier"]);
            for &temp in &t.temperatures {
                let state = GasState::new(temp).map_err(config_err)?;
                let l = lifetime_factor(&state, ratio, t.weighting)?;
                table.rows.push(vec![Cell::Num(temp), Cell::Num(l.mean_s), Cell::Num(l.multiplier)]);
            }
            out.note("weighting", t.weighting);
            out.table("lifetime", &table, args.format);
        }
        Command::RadialProfile(_) => radial_profile(&setup, config, args, &mut out)?,
        Command::Prepulse(_) => {
            let t = task(&config.task.prepulse, "prepulse")?;
            let probe = setup.axis(t.probe_alpha_deg)?;
            let mut columns = vec!["duration_us".to_string()];
            let mut per_temp = Vec::new();
            for &temp in &t.temperatures {
                let state = GasState::new(temp).map_err(config_err)?;
                let spec = PrepulseSpec {
                    kf_over_kr: ratio,
                    scatter_rate: t.scatter_rate_per_s,
                    durations: t.durations_us.iter().map(|d| d * 1e-6).collect(),
                    probe,
                    seed,
                    n_atoms_sim: t.n_atoms_sim,
                    kick_histories: t.kick_histories,
                };
                per_temp.push(prepulse_relaxation_mc(&state, &spec).map_err(config_err)?);
                for c in ["s_raw", "std_error", "s_normalized"] {
                    columns.push(format!("{c}_t{temp}"));
                }
            }
            let mut table = Table { columns, rows: vec![] };
            for (i, &d) in t.durations_us.iter().enumerate() {
                let mut row = vec![Cell::Num(d)];
                for rows in &per_temp {
                    row.extend([Cell::Num(rows[i].s_raw), Cell::Num(rows[i].std_error), Cell::Num(rows[i].s_normalized)]);
                }
                table.rows.push(row);
            }
            out.note("normalization", "mean of the two longest durations");
            out.table("prepulse", &table, args.format);
        }
        Command::Budget(_) => {
            let scattering = scattering_rate(&setup.drive, &setup.species);
            let od = optical_density(&setup.scales, &setup.state, &setup.trap, &setup.species, &setup.drive, setup.n_spins)?;
            let n_total = setup.scales.n_per_spin * u64::from(setup.n_spins);
            let mut photons = serde_json::Map::new();
            for (axis, qe) in &setup.axes {
                photons.insert(axis.label().replacen("s_", "photons_", 1), photon_budget(&scattering, axis, *qe, n_total)?.into());
            }
            let report = serde_json::json!({
                "estimate_quality": "order of magnitude (two-level cross section, tens of percent)",
                "scattering_rate_per_s": scattering.rate,
                "excitation_fraction": scattering.excitation_fraction,
                "linear_regime": scattering.linear_regime,
                "od_resonant": od.od_resonant,
                "od_effective": od.od_effective,
                "transmission": od.transmission,
                "peak_column_density_m2": od.peak_column_density,
                "n_atoms_total": n_total,
                "detected_photons": photons,
            });
            out.files.push(("budget.json".into(), serde_json::to_string_pretty(&report)? + "\n"));
        }
    }
    let seeded = matches!(command, Command::Prepulse(_))
        || (matches!(command, Command::Suppression(_)) && matches!(args.method, MethodArg::Mc | MethodArg::All));
    let meta = provenance(config, command.name(), seeded.then_some(seed), args, &out.meta);
    out.meta = meta.as_object().cloned().unwrap_or_default();
    Ok(out)
}

fn suppression_methods(
    k: f64,
    state: &GasState,
    method: MethodArg,
    task: &SuppressionTask,
    seed: u64,
    skipped: &mut Vec<String>,
) -> Result<Vec<SuppressionResult>> {
    let mut results = Vec::new();
    if matches!(method, MethodArg::Quadrature | MethodArg::All) {
        results.push(suppression_trapped(k, state)?);
    }
    if matches!(method, MethodArg::Mc | MethodArg::All) {
        results.push(suppression_mc(k, state, task.mc_samples, seed).map_err(config_err)?);
    }
    match method {
        MethodArg::Series => results.push(suppression_series(k, state, task.series_terms).map_err(config_err)?),
        MethodArg::All => match suppression_series(k, state, task.series_terms) {
            Ok(r) => results.push(r),
            Err(Error::Domain(reason)) => skipped.push(format!("series at k/k_F = {k}: {reason}")),
            Err(e) => return Err(e),
        },
        _ => {}
    }
    if method == MethodArg::All {
        let x = k / local_fermi_wavevector(state)?;
        results.push(suppression_homogeneous(x, state)?);
    }
    Ok(results)
}

fn radial_profile(setup: &Setup, config: &RunConfig, args: &CommonArgs, out: &mut Output) -> Result<()> {
    let t = task(&config.task.radial_profile, "radial_profile")?;
    let probe = setup.axis(t.probe_alpha_deg)?;
    let state = GasState::new(t.t_over_tf).map_err(config_err)?;
    let grid = GridSpec::centered(t.nx, t.ny, t.pixel_um * 1e-6);
    grid.validate().map_err(config_err)?;
    let k = angle_to_k(probe.alpha_deg, setup.scales.ratio_kf_kr);
    let maps = blocked_scattering_profile(&setup.scales, &state, &setup.trap, k, &grid)?;

    let blocked = gaussian_blur(&maps.blocked, t.blur_e2_um * 1e-6).map_err(config_err)?;
    let unblocked = gaussian_blur(&maps.unblocked, t.blur_e2_um * 1e-6).map_err(config_err)?;
    let bin = t.bin_um * 1e-6;
    let pb = radial_average(&blocked, grid.center, bin).map_err(config_err)?;
    let pu = radial_average(&unblocked, grid.center, bin).map_err(config_err)?;

    let mut table = Table::new(&["r_um", "blocked", "unblocked", "ratio", "count"]);
    for i in 0..pb.bin_centers.len() {
        table.rows.push(vec![
            Cell::Num(pb.bin_centers[i] * 1e6),
            Cell::Num(pb.means[i]),
            Cell::Num(pu.means[i]),
            Cell::Num(if pu.means[i] > 0.0 { pb.means[i] / pu.means[i] } else { 1.0 }),
            Cell::Int(pb.counts[i] as u64),
        ]);
    }
    out.table("radial_profile", &table, args.format);
    for (stem, map) in [("column_density", &maps.unblocked), ("blocked", &maps.blocked), ("ratio", &maps.ratio)] {
        let mut csv = Vec::new();
        map.write_csv(&mut csv)?;
        out.files.push((format!("{stem}.csv"), String::from_utf8(csv).expect("ascii")));
        out.files.push((format!("{stem}.json"), serde_json::to_string_pretty(&map.sidecar())? + "\n"));
    }
    out.note("t_over_tf", t.t_over_tf);
    out.note("k_over_kf", k);
    out.note("global_ratio", maps.global_ratio());
    out.note("blur_e2_um", t.blur_e2_um);
    Ok(())
}

/// Writes every file plus one `<subcommand>.meta.json` provenance sidecar.
pub fn write_output(dir: &Path, command: &str, output: &Output) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, contents) in &output.files {
        std::fs::write(dir.join(name), contents)?;
    }
    let mut meta = output.meta.clone();
    meta.insert(
        "files".into(),
        serde_json::Value::from(output.files.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>()),
    );
    std::fs::write(
        dir.join(format!("{command}.meta.json")),
        serde_json::to_string_pretty(&serde_json::Value::Object(meta))? + "\n",
    )?;
    Ok(())
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Domain(_) | Error::Json(_) => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_NUMERICAL,
    }
}

fn kind(err: &Error) -> &'static str {
    match exit_code(err) {
        EXIT_CONFIG => "config",
        EXIT_IO => "io",
        _ => "numerical",
    }
}

/// Parses, evaluates and writes. Returns the process exit code; failures are
/// reported on stderr as a one-line JSON object.
pub fn run(cli: &Cli) -> i32 {
    let command = &cli.command;
    let args = command.args();
    let result = RunConfig::load(&args.config)
        .and_then(|config| execute(command, &config))
        .and_then(|output| write_output(&args.out, command.name(), &output));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let report = serde_json::json!({ "error": kind(&e), "message": e.to_string() });
            eprintln!("{report}");
            exit_code(&e)
        }
    }
}

/// Applies the thread-count environment variable, if set.
pub fn configure_threads() -> std::result::Result<(), String> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v.parse().map_err(|_| format!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| e.to_string())
        }
        Err(_) => Ok(()),
    }
}
