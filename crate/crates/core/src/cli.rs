//! Command-line front end: reads a JSON run configuration (optionally seeded
//! from a named figure preset) and writes one CSV per command.
//!
//! Exit codes: 0 on success, 2 for configuration and I/O errors, 3 when a
//! computation fails.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::achievable::{
    best_symmetric_lower, etw_ic_rate, region_frontier, symmetric_rate_cor5, LowerConfig, SamplerConfig,
};
use crate::bounds::{
    bound_envelope, covariance_samples, cutset_sum_bound, envelope_of, maric_sum_bound, outer_region, BoundCurvePoint,
    BoundKind, BoundsConfig, CovarianceSearch, MaricForm, S2Convention,
};
use crate::error::Error;
use crate::gap::{gap_map, symmetric_upper, GapConfig, GapGridSpec};
use crate::model::{db_to_linear, ChannelGains, CovarianceParams, SymmetricChannel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Sum-rate bounds over a power sweep.
    SweepBounds,
    /// Achievable region and outer-bound regions at one power.
    Region,
    /// Symmetric lower and upper rates over a power sweep.
    SymRate,
    /// Gap between symmetric upper and lower rates over an (a, b) grid.
    GapMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

#[derive(Debug, Parser)]
#[command(
    name = "icfdr",
    version,
    about = "Bounds and achievable rates for the interference channel with a full-duplex relay"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run configuration; its fields override the preset's.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn numeric_err(e: Error) -> CliError {
    CliError::Numeric(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSweep {
    pub p_db_min: f64,
    pub p_db_max: f64,
    pub p_db_step: f64,
}

impl PowerSweep {
    /// Powers from min to max inclusive; the last step may be shorter.
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let (lo, hi, step) = (self.p_db_min, self.p_db_max, self.p_db_step);
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(CliError::Config(format!("sweep bounds must be finite and ordered, got {lo}..{hi}")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(CliError::Config(format!("sweep step must be > 0, got {step}")));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        let mut out: Vec<f64> = (0..=count).map(|k| lo + step * k as f64).collect();
        if hi - out[count] > 1e-9 * step {
            out.push(hi);
        }
        Ok(out)
    }
}

/// Grid of the gap map, with the power in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub a_min: f64,
    pub a_max: f64,
    pub a_steps: usize,
    pub b_min: f64,
    pub b_max: f64,
    pub b_steps: usize,
    pub hd: f64,
    pub hr: f64,
    pub p_db: f64,
}

impl GridConfig {
    pub fn spec(&self) -> GapGridSpec {
        GapGridSpec {
            a_min: self.a_min,
            a_max: self.a_max,
            a_steps: self.a_steps,
            b_min: self.b_min,
            b_max: self.b_max,
            b_steps: self.b_steps,
            hd: self.hd,
            hr: self.hr,
            power: db_to_linear(self.p_db),
        }
    }
}

/// Which bounds enter the sweeps and region plots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundSelection {
    pub cs: bool,
    pub m: bool,
    pub s1: bool,
    pub s2: bool,
}

impl Default for BoundSelection {
    fn default() -> Self {
        Self { cs: true, m: true, s1: true, s2: true }
    }
}

impl BoundSelection {
    pub fn includes(&self, kind: BoundKind) -> bool {
        match kind {
            BoundKind::Cs => self.cs,
            BoundKind::M => self.m,
            BoundKind::S1 => self.s1,
            BoundKind::S2 => self.s2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundOptions {
    pub covariance_search: CovarianceSearch,
    pub maric_form: MaricForm,
    pub maric_box: f64,
    pub s2_convention: S2Convention,
    pub s1_relabeled: bool,
}

impl Default for BoundOptions {
    fn default() -> Self {
        let d = BoundsConfig::default();
        Self {
            covariance_search: d.covariance_search,
            maric_form: d.maric_form,
            maric_box: d.maric_box,
            s2_convention: d.s2_convention,
            s1_relabeled: d.s1_relabeled,
        }
    }
}

impl BoundOptions {
    pub fn bounds_config(&self) -> BoundsConfig {
        BoundsConfig {
            covariance_search: self.covariance_search,
            maric_form: self.maric_form,
            maric_box: self.maric_box,
            s2_convention: self.s2_convention,
            s1_relabeled: self.s1_relabeled,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<ChannelGains>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetric: Option<SymmetricChannel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<PowerSweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub bounds: BoundSelection,
    #[serde(default)]
    pub bound_options: BoundOptions,
    #[serde(default)]
    pub sampler: SamplerConfig,
    /// Include the sampled achievable region in symmetric lower bounds.
    #[serde(default = "yes")]
    pub use_region: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn yes() -> bool {
    true
}

fn fig2_gains() -> ChannelGains {
    ChannelGains {
        h11: 1.0,
        h22: 1.0,
        hr2: 1.0,
        hr1: 2.0,
        h12: 2.0,
        h21: 5f64.sqrt(),
        h1r: 10f64.sqrt(),
        h2r: 10f64.sqrt(),
    }
}

fn fig3_gains() -> ChannelGains {
    ChannelGains { h11: 2.0, h22: 2.0, hr1: 0.2, hr2: 0.2, h12: 0.5, h21: 0.5, h1r: 0.2, h2r: 0.2 }
}

/// The figure presets as JSON documents.
pub fn preset_value(preset: Preset) -> Value {
    match preset {
        Preset::Fig2 => json!({
            "command": "sweep-bounds",
            "gains": fig2_gains(),
            "sweep": { "p_db_min": 0.0, "p_db_max": 50.0, "p_db_step": 5.0 },
        }),
        Preset::Fig3 => json!({
            "command": "sweep-bounds",
            "gains": fig3_gains(),
            "sweep": { "p_db_min": -10.0, "p_db_max": 50.0, "p_db_step": 5.0 },
        }),
        Preset::Fig4 => json!({ "command": "region", "gains": fig2_gains(), "p_db": 20.0 }),
        Preset::Fig5 => json!({
            "command": "gap-map",
            "grid": {
                "a_min": 0.0, "a_max": 2.0, "a_steps": 21,
                "b_min": 0.0, "b_max": 2.0, "b_steps": 21,
                "hd": 1.0, "hr": 1.0, "p_db": 30.0,
            },
        }),
    }
}

/// Preset fields, overridden field by field by the file, then by the
/// command line. A `command` in the file must agree with the one invoked.
pub fn resolve_config(
    command: Command,
    preset: Option<Preset>,
    file: Option<&Path>,
    out: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<RunConfig, CliError> {
    let mut merged = preset.map(preset_value).unwrap_or_else(|| json!({}));
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let doc: Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let Value::Object(fields) = doc else {
            return Err(CliError::Config(format!("{}: expected a JSON object", path.display())));
        };
        if let Some(c) = fields.get("command") {
            let named: Command = serde_json::from_value(c.clone()).map_err(config_err)?;
            if named != command {
                return Err(CliError::Config(format!("config names command {named:?} but {command:?} was invoked")));
            }
        }
        let target = merged.as_object_mut().expect("presets are objects");
        target.extend(fields);
    }
    let mut config: RunConfig = serde_json::from_value(merged).map_err(config_err)?;
    config.command = Some(command);
    if out.is_some() {
        config.out = out;
    }
    if seed.is_some() {
        config.seed = seed;
    }
    if let Some(s) = config.seed {
        config.sampler.seed = s;
    }
    Ok(config)
}

/// Six decimals; `+inf`, NaN and not-applicable values become an empty field.
pub fn fmt_value(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => {
            let s = format!("{x:.6}");
            if s == "-0.000000" {
                "0.000000".into()
            } else {
                s
            }
        }
        _ => String::new(),
    }
}

fn fmt(v: f64) -> String {
    fmt_value(Some(v))
}

fn only_gains(config: &RunConfig) -> Result<ChannelGains, CliError> {
    let g = match (config.gains, config.symmetric) {
        (Some(g), None) => g,
        (None, Some(s)) => s.gains(),
        (Some(_), Some(_)) => return Err(CliError::Config("give either gains or symmetric, not both".into())),
        (None, None) => return Err(CliError::Config("missing channel: set gains or symmetric".into())),
    };
    g.validate().map_err(config_err)?;
    Ok(g)
}

fn only_symmetric(config: &RunConfig) -> Result<SymmetricChannel, CliError> {
    let sym = match (config.gains, config.symmetric) {
        (None, Some(s)) => s,
        (Some(g), None) => SymmetricChannel::from_gains(&g)
            .ok_or_else(|| CliError::Config("sym-rate needs a symmetric channel".into()))?,
        (Some(_), Some(_)) => return Err(CliError::Config("give either gains or symmetric, not both".into())),
        (None, None) => return Err(CliError::Config("missing channel: set symmetric".into())),
    };
    sym.validate().map_err(config_err)?;
    Ok(sym)
}

fn sweep_of(config: &RunConfig) -> Result<Vec<f64>, CliError> {
    let p_dbs = config.sweep.ok_or_else(|| CliError::Config("missing sweep".into()))?.values()?;
    for p_db in &p_dbs {
        power_of(*p_db)?;
    }
    Ok(p_dbs)
}

fn single_power(config: &RunConfig) -> Result<f64, CliError> {
    let p_db = config.p_db.ok_or_else(|| CliError::Config("missing p_db".into()))?;
    power_of(p_db)
}

fn power_of(p_db: f64) -> Result<f64, CliError> {
    let p = db_to_linear(p_db);
    if !(p.is_finite() && p > 0.0) {
        return Err(CliError::Config(format!("p_db = {p_db} gives no finite positive power")));
    }
    Ok(p)
}

/// One row per power, with deselected bounds blank and left out of the envelope.
pub fn sweep_bounds_rows(
    gains: &ChannelGains,
    p_dbs: &[f64],
    selection: &BoundSelection,
    config: &BoundsConfig,
) -> crate::Result<Vec<BoundCurvePoint>> {
    p_dbs
        .par_iter()
        .map(|&p_db| {
            let mut row = bound_envelope(gains, db_to_linear(p_db), config)?;
            row.p_db = p_db;
            for kind in BoundKind::ALL {
                if !selection.includes(kind) {
                    match kind {
                        BoundKind::Cs => row.r_cs = f64::INFINITY,
                        BoundKind::M => row.r_m = f64::INFINITY,
                        BoundKind::S1 => row.r_s1 = f64::INFINITY,
                        BoundKind::S2 => row.r_s2 = f64::INFINITY,
                    }
                }
            }
            let (envelope, active) = envelope_of(&row);
            row.envelope = envelope;
            row.active = active;
            Ok(row)
        })
        .collect()
}

pub fn render_sweep_bounds(rows: &[BoundCurvePoint]) -> String {
    let mut out = String::from("p_db,r_cs,r_m,r_s1,r_s2,envelope,active\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt(r.p_db),
            fmt(r.r_cs),
            fmt(r.r_m),
            fmt(r.r_s1),
            fmt(r.r_s2),
            fmt(r.envelope),
            r.active.map_or("", |k| k.label())
        );
    }
    out
}

/// A named polyline of rate pairs.
pub type Curve = (&'static str, Vec<[f64; 2]>);

/// Curves of the region plot: the achievable frontier, then each selected
/// outer region among cut-set, Marić and `S1`.
pub fn region_curves(
    gains: &ChannelGains,
    power: f64,
    selection: &BoundSelection,
    bounds: &BoundsConfig,
    sampler: &SamplerConfig,
) -> crate::Result<Vec<Curve>> {
    let frontier = region_frontier(gains, power, sampler)?;
    let mut curves = vec![("ach", frontier.hull.vertices.clone())];

    let mut covs = covariance_samples(power, 12, 48);
    for opt in [cutset_sum_bound(gains, power, bounds), maric_sum_bound(gains, power, bounds)] {
        match opt {
            Ok(b) if b.cov.p1 == power && b.cov.p2 == power && b.cov.pr == power => covs.push(b.cov),
            Ok(_) | Err(Error::NotApplicable(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let norm = gains.h11.hypot(gains.h21);
    if norm > 0.0 {
        covs.push(CovarianceParams::full_power(gains.h11 / norm, gains.h21 / norm, power));
    }
    for kind in [BoundKind::Cs, BoundKind::M, BoundKind::S1] {
        if selection.includes(kind) {
            curves.push((kind.label(), outer_region(gains, kind, &covs, bounds)?.vertices));
        }
    }
    Ok(curves)
}

pub fn render_region(curves: &[(&str, Vec<[f64; 2]>)]) -> String {
    let mut out = String::from("r1,r2,curve\n");
    for (name, pts) in curves {
        for p in pts {
            let _ = writeln!(out, "{},{},{}", fmt(p[0]), fmt(p[1]), name);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymRateRow {
    pub p_db: f64,
    pub r_cor5: Option<f64>,
    pub r_ic: f64,
    pub lower: f64,
    pub upper: f64,
    pub delta: f64,
}

pub fn sym_rate_rows(sym: &SymmetricChannel, p_dbs: &[f64], config: &GapConfig) -> crate::Result<Vec<SymRateRow>> {
    p_dbs
        .par_iter()
        .map(|&p_db| {
            let p = db_to_linear(p_db);
            let r_cor5 = match symmetric_rate_cor5(sym, p) {
                Ok(v) => Some(v),
                Err(Error::NotApplicable(_)) => None,
                Err(e) => return Err(e),
            };
            let lower = best_symmetric_lower(sym, p, &config.lower)?;
            let upper = symmetric_upper(sym, p, &config.bounds)?;
            Ok(SymRateRow {
                p_db,
                r_cor5,
                r_ic: etw_ic_rate(sym.hd, sym.hc, p)?,
                lower: lower.value,
                upper: upper.value,
                delta: upper.value - lower.value,
            })
        })
        .collect()
}

pub fn render_sym_rate(rows: &[SymRateRow]) -> String {
    let mut out = String::from("p_db,r_cor5,r_ic,lower,upper,delta\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt(r.p_db),
            fmt_value(r.r_cor5),
            fmt(r.r_ic),
            fmt(r.lower),
            fmt(r.upper),
            fmt(r.delta)
        );
    }
    out
}

pub fn render_gap_map(cells: &[crate::gap::GapCell]) -> String {
    let mut out = String::from("a,b,upper,lower,delta,active_bound,active_lower\n");
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt(c.a),
            fmt(c.b),
            fmt(c.upper),
            fmt(c.lower),
            fmt(c.delta),
            c.active_bound.map_or("", |k| k.label()),
            c.active_lower.label()
        );
    }
    out
}

fn gap_config(config: &RunConfig) -> GapConfig {
    GapConfig {
        bounds: config.bound_options.bounds_config(),
        lower: LowerConfig { use_region: config.use_region, sampler: config.sampler },
    }
}

/// Runs the configured command and returns the CSV text.
pub fn execute(config: &RunConfig) -> Result<String, CliError> {
    let command = config.command.ok_or_else(|| CliError::Config("missing command".into()))?;
    let bounds = config.bound_options.bounds_config();
    if !(bounds.maric_box.is_finite() && bounds.maric_box > 0.0) {
        return Err(CliError::Config(format!("maric_box = {} must be finite and > 0", bounds.maric_box)));
    }
    match command {
        Command::SweepBounds => {
            let gains = only_gains(config)?;
            let p_dbs = sweep_of(config)?;
            let rows = sweep_bounds_rows(&gains, &p_dbs, &config.bounds, &bounds).map_err(numeric_err)?;
            Ok(render_sweep_bounds(&rows))
        }
        Command::Region => {
            let gains = only_gains(config)?;
            let power = single_power(config)?;
            let curves = region_curves(&gains, power, &config.bounds, &bounds, &config.sampler).map_err(numeric_err)?;
            Ok(render_region(&curves))
        }
        Command::SymRate => {
            let sym = only_symmetric(config)?;
            let p_dbs = sweep_of(config)?;
            let rows = sym_rate_rows(&sym, &p_dbs, &gap_config(config)).map_err(numeric_err)?;
            Ok(render_sym_rate(&rows))
        }
        Command::GapMap => {
            if config.gains.is_some() || config.symmetric.is_some() {
                return Err(CliError::Config("gap-map takes its channel from grid, not gains/symmetric".into()));
            }
            let spec = config.grid.ok_or_else(|| CliError::Config("missing grid".into()))?.spec();
            spec.validate().map_err(config_err)?;
            let cells = gap_map(&spec, &gap_config(config)).map_err(numeric_err)?;
            Ok(render_gap_map(&cells))
        }
    }
}

/// Settings that shape the numbers but do not appear in the CSV.
pub fn run_metadata(config: &RunConfig) -> Value {
    json!({
        "command": config.command,
        "seed": config.sampler.seed,
        "sampler": config.sampler,
        "bound_options": config.bound_options,
        "use_region": config.use_region,
    })
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let config = resolve_config(cli.command, cli.preset, cli.config.as_deref(), cli.out, cli.seed)?;
    let csv = execute(&config)?;
    let meta = serde_json::to_string_pretty(&run_metadata(&config)).expect("metadata serializes");
    match &config.out {
        Some(path) => {
            std::fs::write(path, csv).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let mut meta_path = path.clone().into_os_string();
            meta_path.push(".meta.json");
            std::fs::write(&meta_path, meta + "\n")
                .map_err(|e| CliError::Config(format!("{}: {e}", PathBuf::from(&meta_path).display())))?;
        }
        None => {
            print!("{csv}");
            eprintln!("{}", serde_json::to_string(&run_metadata(&config)).expect("metadata serializes"));
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("icfdr: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_formatting() {
        assert_eq!(fmt(1.0 / 3.0), "0.333333");
        assert_eq!(fmt(-1e-9), "0.000000");
        assert_eq!(fmt(f64::INFINITY), "");
        assert_eq!(fmt(f64::NAN), "");
        assert_eq!(fmt_value(None), "");
    }

    #[test]
    fn sweep_values() {
        let s = PowerSweep { p_db_min: 0.0, p_db_max: 50.0, p_db_step: 5.0 };
        assert_eq!(s.values().unwrap().len(), 11);
        let ragged = PowerSweep { p_db_min: 0.0, p_db_max: 7.0, p_db_step: 5.0 };
        assert_eq!(ragged.values().unwrap(), vec![0.0, 5.0, 7.0]);
        assert!(PowerSweep { p_db_min: 1.0, p_db_max: 0.0, p_db_step: 1.0 }.values().is_err());
        assert!(PowerSweep { p_db_min: 0.0, p_db_max: 1.0, p_db_step: 0.0 }.values().is_err());
    }

    #[test]
    fn presets_parse() {
        for (p, cmd) in [
            (Preset::Fig2, Command::SweepBounds),
            (Preset::Fig3, Command::SweepBounds),
            (Preset::Fig4, Command::Region),
            (Preset::Fig5, Command::GapMap),
        ] {
            let c = resolve_config(cmd, Some(p), None, None, None).unwrap();
            assert_eq!(c.command, Some(cmd));
            assert_eq!(c.sampler.seed, 0);
        }
        let c = resolve_config(Command::SweepBounds, Some(Preset::Fig2), None, None, Some(9)).unwrap();
        assert_eq!((c.seed, c.sampler.seed), (Some(9), 9));
    }

    #[test]
    fn file_overrides_preset_and_command_must_agree() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"sweep": {"p_db_min": 10, "p_db_max": 20, "p_db_step": 10}}"#).unwrap();
        let c = resolve_config(Command::SweepBounds, Some(Preset::Fig2), Some(&path), None, None).unwrap();
        assert_eq!(c.sweep.unwrap().values().unwrap(), vec![10.0, 20.0]);
        assert_eq!(c.gains, Some(fig2_gains()));

        std::fs::write(&path, r#"{"command": "region"}"#).unwrap();
        let e = resolve_config(Command::SweepBounds, None, Some(&path), None, None).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        std::fs::write(&path, r#"{"unknown_field": 1}"#).unwrap();
        assert!(resolve_config(Command::SweepBounds, None, Some(&path), None, None).is_err());
        let missing = dir.path().join("missing.json");
        assert!(resolve_config(Command::SweepBounds, None, Some(&missing), None, None).is_err());
    }

    #[test]
    fn zero_gain_sweep() {
        let config = RunConfig {
            gains: Some(ChannelGains::zero()),
            sweep: Some(PowerSweep { p_db_min: 0.0, p_db_max: 10.0, p_db_step: 10.0 }),
            ..resolve_config(Command::SweepBounds, None, None, None, None).unwrap()
        };
        let csv = execute(&config).unwrap();
        assert_eq!(
            csv,
            "p_db,r_cs,r_m,r_s1,r_s2,envelope,active\n\
             0.000000,0.000000,0.000000,0.000000,0.000000,0.000000,cs\n\
             10.000000,0.000000,0.000000,0.000000,0.000000,0.000000,cs\n"
        );
    }

    #[test]
    fn config_errors_map_to_exit_code_two() {
        let base = resolve_config(Command::SweepBounds, None, None, None, None).unwrap();
        assert_eq!(execute(&base).unwrap_err().exit_code(), 2);
        let both = RunConfig {
            gains: Some(fig2_gains()),
            symmetric: Some(SymmetricChannel { hd: 1.0, hc: 1.0, hr: 1.0, hsr: 1.0 }),
            sweep: Some(PowerSweep { p_db_min: 0.0, p_db_max: 1.0, p_db_step: 1.0 }),
            ..base.clone()
        };
        assert_eq!(execute(&both).unwrap_err().exit_code(), 2);
        let asym = RunConfig { command: Some(Command::SymRate), gains: Some(fig2_gains()), ..both.clone() };
        let asym = RunConfig { symmetric: None, ..asym };
        assert_eq!(execute(&asym).unwrap_err().exit_code(), 2);
        let mut flat = resolve_config(Command::GapMap, Some(Preset::Fig5), None, None, None).unwrap();
        flat.grid.as_mut().unwrap().p_db = 0.0;
        assert!(matches!(execute(&flat), Err(CliError::Config(m)) if m.contains("hd^2 P")));
    }

    #[test]
    fn cli_parsing() {
        assert_eq!(main_with_args(["icfdr", "no-such-command"]), 2);
        assert_eq!(main_with_args(["icfdr", "sweep-bounds", "--preset", "fig9"]), 2);
        assert_eq!(main_with_args(["icfdr", "--help"]), 0);
        let cli = Cli::try_parse_from(["icfdr", "gap-map", "--preset", "fig5", "--seed", "3"]).unwrap();
        assert_eq!((cli.command, cli.preset, cli.seed), (Command::GapMap, Some(Preset::Fig5), Some(3)));
    }
}
