use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use wta_core::{
    gamma_for, tc_bound, Configuration, Error, ExecutionWindow, InitialPolicy, NetworkFamily, TheoremMode,
    WtaInstance, WtaVariant,
};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    TwoInhibitor,
    SingleInhibitor,
    LogInhibitor,
}

impl From<VariantArg> for NetworkFamily {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::TwoInhibitor => NetworkFamily::TwoInhibitor,
            VariantArg::SingleInhibitor => NetworkFamily::SingleInhibitor,
            VariantArg::LogInhibitor => NetworkFamily::LogInhibitor,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitArg {
    /// Only the inputs fire.
    Zero,
    /// Every neuron fires.
    Fire,
    /// Non-input bits are fair coins drawn from the seed.
    Random,
    /// Window read from `--init-file`.
    File,
}

/// Parameters that pick a network and its timing.
#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct NetArgs {
    #[arg(long, value_enum, default_value = "two-inhibitor")]
    pub variant: VariantArg,
    /// Number of inputs and outputs.
    #[arg(long)]
    pub n: usize,
    /// Weight scale. Default: the theorem threshold for n, ts and delta.
    #[arg(long, conflicts_with = "gamma_auto", allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Use the theorem threshold for gamma (the default when --gamma is absent).
    #[arg(long)]
    pub gamma_auto: bool,
    /// Stability window t_s.
    #[arg(long, default_value_t = 10)]
    pub ts: u64,
    /// Failure probability. Selects the high-probability regime; without it
    /// the expected-time regime is used.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Convergence deadline t_c. Default: the theorem bound.
    #[arg(long, conflicts_with = "tc_auto")]
    pub tc: Option<u64>,
    /// Use the theorem bound for t_c (the default when --tc is absent).
    #[arg(long)]
    pub tc_auto: bool,
    /// Input bits, first input leftmost. Default: all ones.
    #[arg(long)]
    pub input: Option<String>,
}

impl NetArgs {
    pub fn variant(&self) -> WtaVariant {
        let mode = if self.delta.is_some() { TheoremMode::HighProbability } else { TheoremMode::ExpectedTime };
        WtaVariant::new(self.variant.into(), mode)
    }

    pub fn gamma(&self) -> wta_core::Result<f64> {
        match self.gamma {
            Some(g) => Ok(g),
            None => gamma_for(self.variant(), self.n, self.ts, self.delta),
        }
    }

    pub fn input(&self) -> wta_core::Result<Configuration> {
        match &self.input {
            Some(s) => {
                let c: Configuration = s.parse()?;
                c.check_len(self.n)?;
                Ok(c)
            }
            None => Ok(Configuration::ones(self.n)),
        }
    }

    pub fn instance(&self) -> wta_core::Result<WtaInstance> {
        let variant = self.variant();
        let gamma = self.gamma()?;
        let t_c = match self.tc {
            Some(t) => t,
            None => tc_bound(variant, self.n, self.delta)?,
        };
        WtaInstance::new(variant, self.input()?, gamma, self.ts, self.delta, t_c)
    }
}

/// Initial-state selection shared by the trial commands.
#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct InitArgs {
    /// Default: random for trial commands, zero for the oracle.
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    /// JSON array of configuration strings, oldest first.
    #[arg(long, required_if_eq("init", "file"))]
    pub init_file: Option<PathBuf>,
    /// Window loaded from `init_file`, kept so a manifest replays without it.
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_window: Option<Vec<Configuration>>,
}

impl InitArgs {
    /// Loads the window file once so the manifest records its contents.
    pub fn resolve(&mut self) -> anyhow::Result<()> {
        if self.init == Some(InitArg::File) && self.init_window.is_none() {
            let path = self.init_file.as_ref().ok_or_else(|| Error::InvalidParameter("--init file needs --init-file".into()))?;
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let frames: Vec<Configuration> =
                serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            self.init_window = Some(frames);
        }
        Ok(())
    }

    pub fn window(&self) -> wta_core::Result<Option<ExecutionWindow>> {
        match &self.init_window {
            Some(frames) => ExecutionWindow::new(frames.clone()).map(Some),
            None => Ok(None),
        }
    }

    pub fn policy(&self, default: InitArg) -> wta_core::Result<InitialPolicy> {
        Ok(match self.init.unwrap_or(default) {
            InitArg::Zero => InitialPolicy::AllZero,
            InitArg::Fire => InitialPolicy::AllFire,
            InitArg::Random => InitialPolicy::UniformRandom,
            InitArg::File => match self.window()? {
                Some(w) => InitialPolicy::Explicit(w),
                None => return Err(Error::InvalidParameter("--init file needs --init-file".into())),
            },
        })
    }
}
