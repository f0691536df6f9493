//! Command-line front end. Every command resolves its flags into a parameter
//! struct, runs, writes its outputs atomically and records the parameters in
//! a manifest next to the primary output; `replay` re-runs a manifest.
//!
//! Exit codes: 0 on success, 1 for numerical or domain failures, 2 for I/O,
//! parse and schema errors (clap usage errors also exit with 2).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::convex::{optimize_convex, ConvexConfig};
use crate::direct::{optimize_direct, DirectConfig};
use crate::dynamics::{evolve_on_path, sweep_csv, EvolveOptions, SweepRow};
use crate::error::{Result, SpoError};
use crate::experiments::{
    compare_schedules, epsilon_sweep, mine_hard_instances, run_perturbation_study, summary_table_csv, Histogram,
    MiningConfig, PerturbationConfig, SpoMethod, SpoSettings,
};
use crate::hamiltonian::PathHamiltonian;
use crate::instance::QuboInstance;
use crate::manifest::{write_atomic, RunManifest};
use crate::schedule::{sig9, Schedule};
use crate::spectrum::{profile_on_path, ProfileOptions};

/// Tolerance when re-validating schedules read back from 9-digit CSV.
const CSV_SLACK: f64 = 1e-8;

/// Parameter keys that are outputs of a study rather than inputs.
const DERIVED_KEYS: [&str; 2] = ["hist_omega_edges", "hist_delta_p_edges"];

#[derive(Debug, Parser)]
#[command(name = "spo", version, about = "Schedule path optimization for adiabatic QUBO annealing")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate seeded random QUBO instances.
    Gen(GenArgs),
    /// Spectrum and gap profile along a schedule.
    Gap(GapArgs),
    /// Maximize the minimum gap.
    Optimize(OptimizeArgs),
    /// Success probability over a list of total times.
    Evolve(EvolveArgs),
    /// Run one of the studies.
    Study(StudyArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Qubits per instance.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Seed of the first instance; instance k uses seed + k.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// A `.json` file when count is 1, otherwise a directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct LimitArgs {
    /// Slew limit: largest change of a schedule per unit s.
    #[arg(long, default_value_t = 2.5)]
    pub eps: f64,
    /// Amplitude cap (default: largest |h_i| or |J_ij| of the instance).
    #[arg(long)]
    pub fbound: Option<f64>,
    /// Grid intervals.
    #[arg(long = "N", default_value_t = 50)]
    pub intervals: usize,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Schedule CSV or JSON (default: linear interpolation).
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    #[command(flatten)]
    pub limits: LimitArgs,
    /// Eigenvalues per grid point.
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Direct,
    Convex,
}

impl From<MethodArg> for SpoMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Direct => SpoMethod::Direct,
            MethodArg::Convex => SpoMethod::Convex,
        }
    }
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Convex)]
    pub method: MethodArg,
    #[command(flatten)]
    pub limits: LimitArgs,
    /// Excited eigenvectors per grid point in the convex surrogate.
    #[arg(long, default_value_t = 5)]
    pub p: usize,
    /// Initial trust-region radius (default: f_bound / 10).
    #[arg(long)]
    pub eta: Option<f64>,
    /// Stopping tolerance on the minimum gap.
    #[arg(long, default_value_t = 1e-4)]
    pub xi: f64,
    /// Output schedule CSV; the report goes to `<stem>.report.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    #[command(flatten)]
    pub limits: LimitArgs,
    /// Total annealing times, comma separated.
    #[arg(long = "T", value_delimiter = ',', required = true)]
    pub times: Vec<f64>,
    /// Fixed propagator substeps per grid interval (default: adaptive).
    #[arg(long)]
    pub substeps: Option<usize>,
    /// Also run with halved steps and write `<stem>.doubling.csv`.
    #[arg(long)]
    pub doubling: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum StudyKind {
    Perturb,
    Mine,
    EpsSweep,
    Compare,
}

impl StudyKind {
    fn name(self) -> &'static str {
        match self {
            StudyKind::Perturb => "perturb",
            StudyKind::Mine => "mine",
            StudyKind::EpsSweep => "eps_sweep",
            StudyKind::Compare => "compare",
        }
    }
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[arg(value_enum)]
    pub kind: StudyKind,
    /// Study parameters as a manifest; missing keys take their defaults.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Overrides the base seed of the study.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write to this path (file or directory, as in the original command)
    /// instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

// ---- resolved parameters, as stored in manifests ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenParams {
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapParams {
    pub instance: PathBuf,
    pub schedule: Option<PathBuf>,
    pub eps: f64,
    pub fbound: Option<f64>,
    #[serde(rename = "N")]
    pub intervals: usize,
    pub k: usize,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeParams {
    pub instance: PathBuf,
    pub method: SpoMethod,
    pub eps: f64,
    pub fbound: Option<f64>,
    #[serde(rename = "N")]
    pub intervals: usize,
    pub p: usize,
    pub eta: Option<f64>,
    pub xi: f64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveParams {
    pub instance: PathBuf,
    pub schedule: Option<PathBuf>,
    pub eps: f64,
    pub fbound: Option<f64>,
    #[serde(rename = "N")]
    pub intervals: usize,
    #[serde(rename = "T")]
    pub times: Vec<f64>,
    pub substeps: Option<usize>,
    pub doubling: bool,
    pub out: PathBuf,
}

/// Instance selection shared by the single-instance studies: a file, or a
/// seeded random instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpsSweepParams {
    pub instance: Option<PathBuf>,
    pub n_qubits: usize,
    pub instance_seed: u64,
    pub eps_list: Vec<f64>,
    pub f_bound: Option<f64>,
    pub intervals: usize,
    pub p: usize,
    pub xi: f64,
}

impl Default for EpsSweepParams {
    fn default() -> Self {
        Self {
            instance: None,
            n_qubits: 6,
            instance_seed: 0,
            eps_list: vec![0.25, 0.5, 1.0, 2.5, 5.0],
            f_bound: None,
            intervals: 50,
            p: 5,
            xi: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareParams {
    pub instance: Option<PathBuf>,
    pub n_qubits: usize,
    pub instance_seed: u64,
    pub method: SpoMethod,
    #[serde(rename = "T")]
    pub times: Vec<f64>,
    pub eps: f64,
    pub f_bound: Option<f64>,
    pub intervals: usize,
    pub p: usize,
}

impl Default for CompareParams {
    fn default() -> Self {
        Self {
            instance: None,
            n_qubits: 6,
            instance_seed: 0,
            method: SpoMethod::Convex,
            times: vec![5.0, 10.0, 20.0, 40.0],
            eps: 2.5,
            f_bound: None,
            intervals: 50,
            p: 5,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| SpoError::parse("command line", e.to_string()))?;
    execute(cli)
}

/// Entry point of the `spo` binary.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(err: &SpoError) -> ExitCode {
    if err.is_io_or_schema() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        // a second build in the same process (tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    match cli.command {
        Command::Gen(a) => cmd_gen(&GenParams {
            n: a.n,
            count: a.count,
            seed: a.seed,
            out: a.out,
        }),
        Command::Gap(a) => cmd_gap(&GapParams {
            instance: a.instance,
            schedule: a.schedule,
            eps: a.limits.eps,
            fbound: a.limits.fbound,
            intervals: a.limits.intervals,
            k: a.k,
            out: a.out,
        }),
        Command::Optimize(a) => cmd_optimize(&OptimizeParams {
            instance: a.instance,
            method: a.method.into(),
            eps: a.limits.eps,
            fbound: a.limits.fbound,
            intervals: a.limits.intervals,
            p: a.p,
            eta: a.eta,
            xi: a.xi,
            out: a.out,
        }),
        Command::Evolve(a) => cmd_evolve(&EvolveParams {
            instance: a.instance,
            schedule: a.schedule,
            eps: a.limits.eps,
            fbound: a.limits.fbound,
            intervals: a.limits.intervals,
            times: a.times,
            substeps: a.substeps,
            doubling: a.doubling,
            out: a.out,
        }),
        Command::Study(a) => {
            let mut params = match &a.manifest {
                Some(path) => RunManifest::load(path)?.parameters,
                None => BTreeMap::new(),
            };
            if let Some(seed) = a.seed {
                let key = match a.kind {
                    StudyKind::Mine => "base_seed",
                    _ => "instance_seed",
                };
                params.insert(key.into(), Value::from(seed));
            }
            cmd_study(a.kind, params, &a.out)
        }
        Command::Replay(a) => replay(&a.manifest, a.out.as_deref()),
    }
}

/// Re-runs the command recorded in a manifest, optionally redirecting output.
pub fn replay(manifest_path: &Path, out: Option<&Path>) -> Result<()> {
    let m = RunManifest::load(manifest_path)?;
    let mut params = m.parameters.clone();
    if let Some(out) = out {
        params.insert("out".into(), serde_json::to_value(out)?);
    }
    match m.command.as_str() {
        "gen" => cmd_gen(&from_params(params)?),
        "gap" => cmd_gap(&from_params(params)?),
        "optimize" => cmd_optimize(&from_params(params)?),
        "evolve" => cmd_evolve(&from_params(params)?),
        "study" => {
            let kind: StudyKind = take_key(&mut params, "kind")?
                .ok_or_else(|| SpoError::parse("manifest", "missing key `kind`"))?;
            let dir: PathBuf = take_key(&mut params, "out")?
                .ok_or_else(|| SpoError::parse("manifest", "missing key `out`"))?;
            for key in DERIVED_KEYS {
                params.remove(key);
            }
            cmd_study(kind, params, &dir)
        }
        other => Err(SpoError::parse("manifest", format!("unknown command `{other}`"))),
    }
}

fn from_params<T: DeserializeOwned>(params: BTreeMap<String, Value>) -> Result<T> {
    let value = Value::Object(params.into_iter().collect::<Map<_, _>>());
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            SpoError::parse("manifest", inner.to_string())
        } else {
            SpoError::parse("manifest", format!("key `{path}`: {inner}"))
        }
    })
}

fn take_key<T: DeserializeOwned>(params: &mut BTreeMap<String, Value>, key: &str) -> Result<Option<T>> {
    match params.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v)
            .map(Some)
            .map_err(|e| SpoError::parse("manifest", format!("key `{key}`: {e}"))),
    }
}

fn params_of<T: Serialize>(p: &T) -> Result<BTreeMap<String, Value>> {
    match serde_json::to_value(p)? {
        Value::Object(map) => Ok(map.into_iter().collect()),
        _ => unreachable!("parameter structs serialize to objects"),
    }
}

fn manifest_for<T: Serialize>(command: &str, params: &T) -> Result<RunManifest> {
    let mut m = RunManifest::new(command);
    m.parameters = params_of(params)?;
    Ok(m)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| SpoError::io(dir, e))?;
    }
    write_atomic(path, text.as_bytes())
}

fn finish(mut m: RunManifest, primary: &Path, start: Instant) -> Result<()> {
    m.wall_time_s = start.elapsed().as_secs_f64();
    m.write_beside(primary)?;
    Ok(())
}

/// `dir/name.ext` -> `dir/name.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn caps(inst: &QuboInstance, fbound: Option<f64>, eps: f64) -> (f64, f64) {
    (fbound.unwrap_or_else(|| inst.max_coefficient()), eps)
}

fn load_schedule(
    path: Option<&Path>,
    inst: &QuboInstance,
    fbound: Option<f64>,
    eps: f64,
    intervals: usize,
) -> Result<Schedule> {
    let (f_bound, slew) = caps(inst, fbound, eps);
    let sched = match path {
        None => return Schedule::linear(inst.n_qubits(), intervals, f_bound, slew),
        Some(p) => Schedule::load(p, Some((f_bound, slew)))?,
    };
    if sched.n_qubits() != inst.n_qubits() {
        return Err(SpoError::QubitMismatch {
            expected: inst.n_qubits(),
            actual: sched.n_qubits(),
        });
    }
    if let Some(v) = sched.validate_with_tolerance(CSV_SLACK).first() {
        return Err(SpoError::ScheduleRejected(v.to_string()));
    }
    Ok(sched)
}

pub fn cmd_gen(p: &GenParams) -> Result<()> {
    let start = Instant::now();
    if p.count == 0 {
        return Err(SpoError::InvalidArgument("count must be at least 1".into()));
    }
    let single_file = p.count == 1 && p.out.extension().is_some_and(|e| e == "json");
    let mut m = manifest_for("gen", p)?;
    let mut outputs = Vec::with_capacity(p.count);
    for k in 0..p.count as u64 {
        let seed = p.seed + k;
        let inst = QuboInstance::random(p.n, seed)?;
        let path = if single_file {
            p.out.clone()
        } else {
            p.out.join(format!("instance_{seed}.json"))
        };
        write_text(&path, &inst.to_json()?)?;
        m = m.seed(seed).output(&path);
        outputs.push(path);
    }
    let primary = if single_file {
        p.out.clone()
    } else {
        p.out.join("instances")
    };
    finish(m, &primary, start)
}

pub fn cmd_gap(p: &GapParams) -> Result<()> {
    let start = Instant::now();
    let inst = QuboInstance::load(&p.instance)?;
    let sched = load_schedule(p.schedule.as_deref(), &inst, p.fbound, p.eps, p.intervals)?;
    let path = PathHamiltonian::new(&inst);
    let k = p.k.min(path.dim());
    let profile = profile_on_path(&path, &sched, &ProfileOptions::new(k))?;
    write_text(&p.out, &profile.to_csv())?;
    let mut m = manifest_for("gap", p)?.seed(inst.seed()).input(&p.instance).output(&p.out);
    if let Some(s) = &p.schedule {
        m = m.input(s);
    }
    finish(m, &p.out, start)
}

pub fn cmd_optimize(p: &OptimizeParams) -> Result<()> {
    let start = Instant::now();
    let inst = QuboInstance::load(&p.instance)?;
    let (f_bound, slew) = caps(&inst, p.fbound, p.eps);
    let report_path = sibling(&p.out, "report.json");
    let (schedule, report) = match p.method {
        SpoMethod::Direct => {
            let init = Schedule::linear(inst.n_qubits(), p.intervals, f_bound, slew)?;
            let r = optimize_direct(&inst, &init, &DirectConfig::default())?;
            let json = r.report_json()?;
            (r.schedule, json)
        }
        SpoMethod::Convex => {
            let cfg = ConvexConfig {
                intervals: p.intervals,
                f_bound,
                slew,
                p: p.p,
                eta: p.eta,
                xi: p.xi,
                ..ConvexConfig::for_instance(&inst)
            };
            let r = optimize_convex(&inst, &cfg)?;
            let json = r.report_json()?;
            (r.schedule, json)
        }
    };
    if let Some(v) = schedule.validate().first() {
        return Err(SpoError::ScheduleRejected(format!("optimizer returned an infeasible schedule: {v}")));
    }
    write_text(&p.out, &schedule.to_csv())?;
    write_text(&report_path, &report)?;
    let m = manifest_for("optimize", p)?
        .seed(inst.seed())
        .input(&p.instance)
        .output(&p.out)
        .output(&report_path);
    finish(m, &p.out, start)
}

pub fn cmd_evolve(p: &EvolveParams) -> Result<()> {
    let start = Instant::now();
    if p.times.is_empty() {
        return Err(SpoError::InvalidArgument("need at least one total time".into()));
    }
    let inst = QuboInstance::load(&p.instance)?;
    let sched = load_schedule(p.schedule.as_deref(), &inst, p.fbound, p.eps, p.intervals)?;
    let path = PathHamiltonian::new(&inst);
    // drift is checked per row below instead of aborting the sweep
    let opts = EvolveOptions {
        substeps: p.substeps,
        drift_tolerance: f64::INFINITY,
        ..EvolveOptions::default()
    };
    let limit = EvolveOptions::default().drift_tolerance;
    let mut rows = Vec::with_capacity(p.times.len());
    let mut drifted = Vec::new();
    let mut doubled = String::from("T,p_succ,p_succ_refined,delta\n");
    for &t in &p.times {
        let r = evolve_on_path(&path, &sched, t, &opts)?;
        if r.norm_drift > limit {
            drifted.push((t, r.norm_drift));
        }
        if p.doubling {
            let fine = EvolveOptions {
                substeps: p.substeps.map(|s| 2 * s),
                step_norm: opts.step_norm / 2.0,
                ..opts
            };
            let q = evolve_on_path(&path, &sched, t, &fine)?;
            doubled.push_str(&format!(
                "{},{},{},{}\n",
                sig9(t),
                sig9(r.p_succ),
                sig9(q.p_succ),
                sig9(q.p_succ - r.p_succ)
            ));
        }
        rows.push(SweepRow::from(&r));
    }
    write_text(&p.out, &sweep_csv(&rows))?;
    let mut m = manifest_for("evolve", p)?.seed(inst.seed()).input(&p.instance).output(&p.out);
    if let Some(s) = &p.schedule {
        m = m.input(s);
    }
    if p.doubling {
        let dpath = sibling(&p.out, "doubling.csv");
        write_text(&dpath, &doubled)?;
        m = m.output(&dpath);
    }
    finish(m, &p.out, start)?;
    for &(t, drift) in &drifted {
        eprintln!("warning: T = {t}: norm drift {drift:.3e} exceeds {limit:.1e}");
    }
    match drifted.first() {
        Some(&(_, drift)) => Err(SpoError::NormDrift { drift, tolerance: limit }),
        None => Ok(()),
    }
}

fn study_instance(file: Option<&Path>, n: usize, seed: u64) -> Result<QuboInstance> {
    match file {
        Some(f) => QuboInstance::load(f),
        None => QuboInstance::random(n, seed),
    }
}

/// Runs a study from (possibly partial) parameters and writes its outputs
/// into `dir`.
pub fn cmd_study(kind: StudyKind, mut params: BTreeMap<String, Value>, dir: &Path) -> Result<()> {
    let start = Instant::now();
    params.remove("kind");
    params.remove("out");
    let record = |m: RunManifest| -> RunManifest { m.param("kind", kind.name()).param("out", dir) };
    match kind {
        StudyKind::Perturb => {
            let bins: usize = take_key(&mut params, "bins")?.unwrap_or(40);
            let cfg: PerturbationConfig = from_params(params)?;
            let out = run_perturbation_study(&cfg)?;
            let omega = Histogram::from_values(&out.omegas(), bins)?;
            let dp = Histogram::from_values(&out.delta_ps(), bins)?;
            let results = dir.join("results.csv");
            let paths = [
                dir.join("summary.csv"),
                dir.join("summary.json"),
                dir.join("hist_omega.csv"),
                dir.join("hist_delta_p.csv"),
            ];
            write_text(&results, &out.records_csv())?;
            write_text(&paths[0], &summary_table_csv(std::slice::from_ref(&out.summary)))?;
            write_text(&paths[1], &(serde_json::to_string_pretty(&out.summary)? + "\n"))?;
            write_text(&paths[2], &omega.to_csv())?;
            write_text(&paths[3], &dp.to_csv())?;
            let mut m = record(manifest_for("study", &cfg)?)
                .param("bins", bins)
                .param("hist_omega_edges", &omega.edges)
                .param("hist_delta_p_edges", &dp.edges)
                .output(&results);
            for s in cfg.instance_seeds() {
                m = m.seed(s);
            }
            m = m.seed(cfg.perturbation_seed);
            for p in &paths {
                m = m.output(p);
            }
            finish(m, &results, start)
        }
        StudyKind::Mine => {
            let cfg: MiningConfig = from_params(params)?;
            let out = mine_hard_instances(&cfg)?;
            let kept = dir.join("kept.csv");
            let pool = dir.join("pool.csv");
            write_text(&kept, &out.kept_csv())?;
            let mut text = String::from("seed,p_succ,min_gap,i_min,s_min\n");
            for m in &out.pool {
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    m.seed,
                    sig9(m.p_succ),
                    sig9(m.min_gap),
                    m.i_min,
                    sig9(m.s_min)
                ));
            }
            write_text(&pool, &text)?;
            let m = record(manifest_for("study", &cfg)?)
                .seed(cfg.base_seed)
                .output(&kept)
                .output(&pool);
            finish(m, &kept, start)
        }
        StudyKind::EpsSweep => {
            let p: EpsSweepParams = from_params(params)?;
            let inst = study_instance(p.instance.as_deref(), p.n_qubits, p.instance_seed)?;
            let cfg = ConvexConfig {
                intervals: p.intervals,
                f_bound: p.f_bound.unwrap_or_else(|| inst.max_coefficient()),
                p: p.p,
                xi: p.xi,
                ..ConvexConfig::for_instance(&inst)
            };
            let points = epsilon_sweep(&inst, &p.eps_list, &cfg)?;
            let out = dir.join("sweep.csv");
            write_text(&out, &crate::experiments::sweep_csv(&points))?;
            let mut m = record(manifest_for("study", &p)?).seed(inst.seed()).output(&out);
            if let Some(f) = &p.instance {
                m = m.input(f);
            }
            finish(m, &out, start)
        }
        StudyKind::Compare => {
            let p: CompareParams = from_params(params)?;
            let inst = study_instance(p.instance.as_deref(), p.n_qubits, p.instance_seed)?;
            let mut settings = SpoSettings::for_instance(&inst, p.method);
            settings.convex.intervals = p.intervals;
            settings.convex.slew = p.eps;
            settings.convex.p = p.p;
            if let Some(f) = p.f_bound {
                settings.convex.f_bound = f;
            }
            let spo = crate::experiments::optimize_spo(&inst, &settings)?;
            let table = compare_schedules(&inst, &settings.linear(inst.n_qubits())?, &spo, &p.times)?;
            let out = dir.join("comparison.csv");
            let gaps = dir.join("gaps.csv");
            let sched = dir.join("spo_schedule.csv");
            write_text(&out, &table.to_csv())?;
            write_text(&gaps, &table.gap_csv())?;
            write_text(&sched, &spo.to_csv())?;
            let mut m = record(manifest_for("study", &p)?)
                .seed(inst.seed())
                .output(&out)
                .output(&gaps)
                .output(&sched);
            if let Some(f) = &p.instance {
                m = m.input(f);
            }
            finish(m, &out, start)
        }
    }
}
