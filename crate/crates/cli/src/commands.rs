use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use wta_core::experiments::lemmas::LemmaInfo;
use wta_core::experiments::trials::initial_window;
use wta_core::{
    convergence_cdf, hold_comparison, lemma_catalog, lemma_check, run_trials, self_stabilization_probe, sweep,
    Error, LemmaCheckReport, LemmaParams, Perturbation, PerturbationKind, RandomnessContract, SweepCell, SweepGrid,
    SweepRow, TheoremMode, TrialPlan, TrialSummary, WtaNetwork, WtaVariant,
};

use crate::args::{InitArg, InitArgs, NetArgs, VariantArg};
use crate::manifest::RunManifest;

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Build a network and write its JSON description.
    Build(BuildArgs),
    /// Run independent trials of one instance.
    Run(RunArgs),
    /// Run trials over a grid of instances.
    Sweep(SweepArgs),
    /// Exact convergence CDF for a small network.
    Oracle(OracleArgs),
    /// Monte Carlo check of a catalogued one- or two-step bound.
    LemmaCheck(LemmaArgs),
    /// Perturb running trials and measure recovery.
    StabilizeProbe(ProbeArgs),
    /// Rerun the command recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Build(_) => "build",
            Command::Run(_) => "run",
            Command::Sweep(_) => "sweep",
            Command::Oracle(_) => "oracle",
            Command::LemmaCheck(_) => "lemma-check",
            Command::StabilizeProbe(_) => "stabilize-probe",
            Command::Replay(_) => "replay",
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Command::Run(a) => Some(a.seed),
            Command::Sweep(a) => Some(a.seed),
            Command::LemmaCheck(a) => Some(a.seed),
            Command::StabilizeProbe(a) => Some(a.seed),
            _ => None,
        }
    }
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct BuildArgs {
    #[command(flatten)]
    pub net: NetArgs,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct RunArgs {
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub init: InitArgs,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    /// Last simulated time step. Default: 4 t_c + t_s.
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct SweepArgs {
    /// Comma-separated list.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "two-inhibitor")]
    pub variant: Vec<VariantArg>,
    /// Comma-separated list.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Comma-separated list.
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub ts: Vec<u64>,
    /// Comma-separated list. Absent: expected-time regime only.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub delta: Vec<f64>,
    /// Fixed γ for every cell. Default: the theorem threshold per cell.
    #[arg(long, conflicts_with = "gamma_auto", allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub gamma_auto: bool,
    /// Fixed t_c for every cell. Default: the theorem bound per cell.
    #[arg(long, conflicts_with = "tc_auto")]
    pub tc: Option<u64>,
    #[arg(long)]
    pub tc_auto: bool,
    #[command(flatten)]
    pub init: InitArgs,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct OracleArgs {
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub init: InitArgs,
    /// Last frame of the CDF.
    #[arg(long, default_value_t = 50)]
    pub tmax: u64,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct LemmaArgs {
    /// Lemma id from the catalog, or `all`.
    #[arg(long)]
    pub lemma: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Firing counting inhibitors for history-network lemmas.
    #[arg(long)]
    pub l: Option<usize>,
    /// Cases also checked against the exact oracle. Default: 16.
    #[arg(long)]
    pub exact_cases: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    AllFire,
    AllZero,
    Random,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub init: InitArgs,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    /// Last time step of each phase, counted from its start. Default: 4 t_c + t_s.
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub perturbations: usize,
    /// Steps between perturbations. Default: t_c + t_s.
    #[arg(long)]
    pub gap: Option<u64>,
    #[arg(long, value_enum, default_value = "all-fire")]
    pub kind: KindArg,
    /// Also compare single- and two-inhibitor hold rates over this many steps.
    #[arg(long)]
    pub hold_ts: Option<u64>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

/// Result of one command: whether every requested check passed.
pub struct Outcome {
    pub pass: bool,
}

struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
        self.write(name, &bytes)
    }

    fn finish(self, command: &Command) -> anyhow::Result<()> {
        let manifest = RunManifest::new(command, command.seed(), self.files);
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        let path = self.dir.join(RunManifest::FILE);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

pub fn execute(command: Command, out: Option<&Path>) -> anyhow::Result<Outcome> {
    let mut command = command;
    if let Command::Replay(r) = &command {
        let manifest = RunManifest::read(&r.manifest)?;
        if let Command::Replay(_) = manifest.invocation {
            return Err(Error::InvalidParameter("a manifest cannot record a replay".into()).into());
        }
        let dir = match out {
            Some(d) => d.to_path_buf(),
            None => r.manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        return execute(manifest.invocation, Some(&dir));
    }
    match &mut command {
        Command::Run(a) => a.init.resolve()?,
        Command::Sweep(a) => a.init.resolve()?,
        Command::Oracle(a) => a.init.resolve()?,
        Command::StabilizeProbe(a) => a.init.resolve()?,
        _ => {}
    }
    let mut outputs = Outputs::new(out.unwrap_or(Path::new("results")))?;
    let outcome = match &command {
        Command::Build(a) => build(a, &mut outputs)?,
        Command::Run(a) => run(a, &mut outputs)?,
        Command::Sweep(a) => cmd_sweep(a, &mut outputs)?,
        Command::Oracle(a) => oracle(a, &mut outputs)?,
        Command::LemmaCheck(a) => lemma(a, &mut outputs)?,
        Command::StabilizeProbe(a) => probe(a, &mut outputs)?,
        Command::Replay(_) => unreachable!(),
    };
    outputs.finish(&command)?;
    Ok(outcome)
}

fn build(a: &BuildArgs, out: &mut Outputs) -> anyhow::Result<Outcome> {
    let net = WtaNetwork::new(a.net.variant.into(), a.net.n, a.net.gamma()?)?;
    let mut text = net.spec.to_json();
    text.push('\n');
    out.write("network.json", text.as_bytes())?;
    Ok(Outcome { pass: true })
}

fn plan(net: &NetArgs, init: &InitArgs, trials: u64, horizon: Option<u64>, seed: u64) -> wta_core::Result<TrialPlan> {
    let mut plan = TrialPlan::new(net.instance()?, init.policy(InitArg::Random)?, trials, seed);
    if let Some(h) = horizon {
        plan.horizon = h;
    }
    plan.validate()?;
    Ok(plan)
}

#[derive(Serialize)]
struct OutcomeRow {
    trial: u64,
    converged_at: Option<u64>,
    stable_for: u64,
    timed_out: bool,
}

fn run(a: &RunArgs, out: &mut Outputs) -> anyhow::Result<Outcome> {
    let plan = plan(&a.net, &a.init, a.trials, a.horizon, a.seed)?;
    let summary = run_trials(&plan)?;
    let row = SweepRow::new(&plan.instance, &summary);
    let outcomes: Vec<OutcomeRow> = summary
        .outcomes
        .iter()
        .enumerate()
        .map(|(i, o)| OutcomeRow {
            trial: i as u64,
            converged_at: o.converged_at,
            stable_for: o.stable_for,
            timed_out: o.timed_out,
        })
        .collect();
    out.csv("summary.csv", std::slice::from_ref(&row))?;
    out.json("summary.json", &[row])?;
    out.csv("outcomes.csv", &outcomes)?;
    Ok(Outcome { pass: true })
}

fn cmd_sweep(a: &SweepArgs, out: &mut Outputs) -> anyhow::Result<Outcome> {
    let deltas: Vec<Option<f64>> = if a.delta.is_empty() { vec![None] } else { a.delta.iter().map(|&d| Some(d)).collect() };
    let init = a.init.policy(InitArg::Random)?;
    let mut cells = Vec::new();
    for &v in &a.variant {
        for &n in &a.n {
            for &t_s in &a.ts {
                for &delta in &deltas {
                    let mode = if delta.is_some() { TheoremMode::HighProbability } else { TheoremMode::ExpectedTime };
                    cells.push(SweepCell {
                        variant: WtaVariant::new(v.into(), mode),
                        n,
                        t_s,
                        delta,
                        gamma: a.gamma,
                        t_c: a.tc,
                        init: init.clone(),
                    });
                }
            }
        }
    }
    let grid = SweepGrid { cells, trials: a.trials, seed: a.seed, horizon: a.horizon };
    let rows = sweep(&grid)?;
    out.csv("sweep.csv", &rows)?;
    out.json("sweep.json", &rows)?;
    Ok(Outcome { pass: true })
}

#[derive(Serialize)]
struct CdfRow {
    t: u64,
    p_exact: f64,
}

fn oracle(a: &OracleArgs, out: &mut Outputs) -> anyhow::Result<Outcome> {
    let net = WtaNetwork::new(a.net.variant.into(), a.net.n, a.net.gamma()?)?;
    let input = a.net.input()?;
    let policy = a.init.policy(InitArg::Zero)?;
    if policy == wta_core::InitialPolicy::UniformRandom {
        return Err(Error::InvalidParameter("the oracle needs a fixed initial window".into()).into());
    }
    let window = initial_window(&net, &input, &policy, &RandomnessContract::new(0), 0)?;
    let cdf = convergence_cdf(&net.spec, &input, &window, a.net.ts, a.tmax)?;
    let rows: Vec<CdfRow> = cdf.iter().enumerate().map(|(t, &p)| CdfRow { t: t as u64, p_exact: p }).collect();
    out.csv("cdf.csv", &rows)?;
    out.json("cdf.json", &rows)?;
    Ok(Outcome { pass: true })
}

#[derive(Serialize)]
struct LemmaOutput<'a> {
    pass: bool,
    reports: &'a [LemmaCheckReport],
}

fn lemma(a: &LemmaArgs, out: &mut Outputs) -> anyhow::Result<Outcome> {
    let catalog = lemma_catalog();
    let selected: Vec<&LemmaInfo> = if a.lemma == "all" {
        catalog.iter().collect()
    } else {
        let l = catalog.iter().find(|l| l.id == a.lemma).ok_or_else(|| Error::UnknownLemma(a.lemma.clone()))?;
        vec![l]
    };
    let params = LemmaParams { l: a.l, exact_cases: a.exact_cases };
    let mut reports = Vec::with_capacity(selected.len());
    for info in selected {
        let net = WtaNetwork::new(info.family, a.n, a.gamma)?;
        reports.push(lemma_check(info.id, &net, &params, a.samples, a.seed)?);
    }
    let pass = reports.iter().all(|r| r.pass);
    out.csv("lemma.csv", &reports)?;
    out.json("lemma.json", &LemmaOutput { pass, reports: &reports })?;
    Ok(Outcome { pass })
}

#[derive(Serialize)]
struct PhaseRow {
    phase: usize,
    start: u64,
    trials: u64,
    successes: u64,
    success_frac: f64,
    wilson_lo: f64,
    wilson_hi: f64,
    mean_tconv: Option<f64>,
    median_tconv: Option<f64>,
    timeouts: u64,
}

fn probe(a: &ProbeArgs, out: &mut Outputs) -> anyhow::Result<Outcome> {
    let plan = plan(&a.net, &a.init, a.trials, a.horizon, a.seed)?;
    let inst = &plan.instance;
    let h = inst.variant.tag.history() as u64;
    let gap = a.gap.unwrap_or(inst.t_c + inst.t_s);
    let kind = match a.kind {
        KindArg::AllFire => PerturbationKind::AllFire,
        KindArg::AllZero => PerturbationKind::AllZero,
        KindArg::Random => PerturbationKind::UniformRandom,
    };
    let perturbations = Perturbation::every(h - 1 + gap, gap, a.perturbations, kind);
    let report = self_stabilization_probe(&plan, &perturbations)?;
    let starts = std::iter::once(h - 1).chain(perturbations.iter().map(|p| p.at));
    let rows: Vec<PhaseRow> = report.phases.iter().zip(starts).enumerate().map(|(k, (s, start))| phase_row(k, start, s)).collect();
    out.csv("probe.csv", &rows)?;
    out.json("probe.json", &rows)?;
    if let Some(t_s) = a.hold_ts {
        let cmp = hold_comparison(inst.n, inst.gamma, t_s, a.trials, a.seed)?;
        out.json("hold.json", &cmp)?;
    }
    Ok(Outcome { pass: true })
}

fn phase_row(phase: usize, start: u64, s: &TrialSummary) -> PhaseRow {
    PhaseRow {
        phase,
        start,
        trials: s.trials,
        successes: s.successes,
        success_frac: s.success_frac,
        wilson_lo: s.wilson_lo,
        wilson_hi: s.wilson_hi,
        mean_tconv: s.mean_tconv,
        median_tconv: s.median_tconv,
        timeouts: s.timeouts,
    }
}
