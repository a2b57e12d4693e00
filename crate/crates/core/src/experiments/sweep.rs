use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bits::Configuration;
use crate::error::Result;
use crate::experiments::trials::{run_trials, InitialPolicy, TrialPlan, TrialSummary};
use crate::nets::{WtaInstance, WtaVariant};

/// One cell of a sweep; `gamma` and `t_c` default to the theorem values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub variant: WtaVariant,
    pub n: usize,
    pub t_s: u64,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub t_c: Option<u64>,
    pub init: InitialPolicy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub cells: Vec<SweepCell>,
    pub trials: u64,
    pub seed: u64,
    /// Horizon for every cell; `4 t_c + t_s` when unset.
    pub horizon: Option<u64>,
}

impl SweepGrid {
    /// Cartesian product of the listed values with theorem γ and t_c.
    pub fn product(
        variants: &[WtaVariant],
        ns: &[usize],
        t_ss: &[u64],
        deltas: &[Option<f64>],
        init: InitialPolicy,
        trials: u64,
        seed: u64,
    ) -> Self {
        let mut cells = Vec::new();
        for &variant in variants {
            for &n in ns {
                for &t_s in t_ss {
                    for &delta in deltas {
                        cells.push(SweepCell { variant, n, t_s, delta, gamma: None, t_c: None, init: init.clone() });
                    }
                }
            }
        }
        Self { cells, trials, seed, horizon: None }
    }
}

impl SweepCell {
    /// Instance on the all-ones input.
    pub fn instance(&self) -> Result<WtaInstance> {
        let input = Configuration::ones(self.n);
        let base = WtaInstance::from_theorem(self.variant, input.clone(), self.t_s, self.delta);
        match (self.gamma, self.t_c, base) {
            (None, None, base) => base,
            (gamma, t_c, Ok(b)) => WtaInstance::new(
                self.variant,
                input,
                gamma.unwrap_or(b.gamma),
                self.t_s,
                self.delta,
                t_c.unwrap_or(b.t_c),
            ),
            (Some(gamma), Some(t_c), Err(_)) => WtaInstance::new(self.variant, input, gamma, self.t_s, self.delta, t_c),
            (_, _, Err(e)) => Err(e),
        }
    }
}

/// One output row; the CSV and JSON forms share these keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub variant: String,
    pub n: usize,
    pub gamma: f64,
    pub t_s: u64,
    pub delta: Option<f64>,
    pub t_c: u64,
    pub trials: u64,
    pub success_frac: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub mean_tconv: Option<f64>,
    pub median_tconv: Option<f64>,
    pub timeouts: u64,
}

impl SweepRow {
    pub fn new(inst: &WtaInstance, s: &TrialSummary) -> Self {
        Self {
            variant: inst.variant.tag.to_string(),
            n: inst.n,
            gamma: inst.gamma,
            t_s: inst.t_s,
            delta: inst.delta,
            t_c: inst.t_c,
            trials: s.trials,
            success_frac: s.success_frac,
            wilson_lo: s.wilson_lo,
            wilson_hi: s.wilson_hi,
            mean_tconv: s.mean_tconv,
            median_tconv: s.median_tconv,
            timeouts: s.timeouts,
        }
    }
}

pub fn sweep(grid: &SweepGrid) -> Result<Vec<SweepRow>> {
    grid.cells
        .iter()
        .map(|cell| {
            let inst = cell.instance()?;
            let mut plan = TrialPlan::new(inst.clone(), cell.init.clone(), grid.trials, grid.seed);
            if let Some(h) = grid.horizon {
                plan.horizon = h;
            }
            Ok(SweepRow::new(&inst, &run_trials(&plan)?))
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "variant", "n", "gamma", "t_s", "delta", "t_c", "trials", "success_frac", "wilson_lo", "wilson_hi",
            "mean_tconv", "median_tconv", "timeouts",
        ])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| crate::error::Error::Format(e.to_string()))?;
    Ok(())
}

pub fn write_json<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, rows)?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<Vec<SweepRow>, _>>()?)
}
