//! Experiment sweeps and CTS/DTS comparison tables.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;

use crate::cli::config::RunConfig;
use crate::cli::output::SummaryRecord;
use crate::error::{Error, Result};
use crate::metrics::mean;
use crate::simkernel::{run_simulation, Mode};

/// Values swept over; every combination becomes one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub flows: Vec<usize>,
    pub pathloss: Vec<f64>,
    pub seeds: Vec<u64>,
    pub modes: Vec<Mode>,
}

impl SweepSpec {
    /// Single-valued spec echoing `base`.
    pub fn from_base(base: &RunConfig) -> Self {
        SweepSpec {
            flows: vec![base.flows],
            pathloss: vec![base.pathloss],
            seeds: vec![base.seed],
            modes: vec![base.mode],
        }
    }

    /// Flows {2,4,6,8,10} × n {2,2.5,3} × seeds 1..=5 × both modes.
    pub fn reference() -> Self {
        SweepSpec {
            flows: vec![2, 4, 6, 8, 10],
            pathloss: vec![2.0, 2.5, 3.0],
            seeds: vec![1, 2, 3, 4, 5],
            modes: vec![Mode::Cts, Mode::Dts],
        }
    }

    pub fn cells(&self, base: &RunConfig) -> Result<Vec<RunConfig>> {
        for (name, empty) in [
            ("sweep-flows", self.flows.is_empty()),
            ("sweep-pathloss", self.pathloss.is_empty()),
            ("sweep-seeds", self.seeds.is_empty()),
            ("sweep-modes", self.modes.is_empty()),
        ] {
            if empty {
                return Err(Error::config(name, "sweep dimension is empty"));
            }
        }
        let mut cells = Vec::new();
        for &pathloss in &self.pathloss {
            for &flows in &self.flows {
                for &seed in &self.seeds {
                    for &mode in &self.modes {
                        let mut c = base.clone();
                        c.pathloss = pathloss;
                        c.flows = flows;
                        c.seed = seed;
                        c.mode = mode;
                        cells.push(c);
                    }
                }
            }
        }
        cells.sort_by(|a, b| cell_order(a).partial_cmp(&cell_order(b)).expect("finite sweep values"));
        Ok(cells)
    }
}

fn cell_order(c: &RunConfig) -> (f64, usize, u64, Mode) {
    (c.pathloss, c.flows, c.seed, c.mode)
}

/// Parses a comma-separated list, e.g. `2,4,6`.
pub fn parse_list<T: std::str::FromStr>(key: &str, text: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| Error::config(key, format!("cannot parse {s:?}: {e}")))
        })
        .collect()
}

#[derive(Debug)]
pub struct SweepOutcome {
    /// Successful cells in sorted cell order.
    pub records: Vec<SummaryRecord>,
    pub failures: Vec<(RunConfig, Error)>,
}

pub fn run_cell(config: &RunConfig) -> Result<SummaryRecord> {
    config.validate()?;
    let out = run_simulation(&config.sim_config::<f64>()?)?;
    Ok(SummaryRecord::new(config.clone(), &out.summary))
}

/// Runs every cell of `spec` over `base` in parallel; row order is the sorted cell order.
pub fn run_sweep(base: &RunConfig, spec: &SweepSpec) -> Result<SweepOutcome> {
    let cells = spec.cells(base)?;
    let results: Vec<(RunConfig, Result<SummaryRecord>)> = cells
        .into_par_iter()
        .map(|c| {
            let r = run_cell(&c);
            (c, r)
        })
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (c, r) in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => failures.push((c, e)),
        }
    }
    Ok(SweepOutcome { records, failures })
}

/// Echo values other than the ones named, used to pair or group rows.
fn key_without(config: &RunConfig, skip: &[&str]) -> Vec<String> {
    config
        .echo()
        .into_iter()
        .filter(|(k, _)| !skip.contains(k))
        .map(|(_, v)| v)
        .collect()
}

/// CTS and DTS results for the same seed and settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub pathloss: f64,
    pub flows: usize,
    pub seed: u64,
    pub cts_network_bps: f64,
    pub dts_network_bps: f64,
    pub network_ratio: f64,
    pub cts_mean_flow_bps: f64,
    pub dts_mean_flow_bps: f64,
    pub flow_ratio: f64,
}

pub fn pair_ratios(records: &[SummaryRecord]) -> Vec<RatioRow> {
    let mut by_key: BTreeMap<Vec<String>, (Option<&SummaryRecord>, Option<&SummaryRecord>)> = BTreeMap::new();
    for r in records {
        let slot = by_key.entry(key_without(&r.config, &["mode"])).or_default();
        match r.config.mode {
            Mode::Cts => slot.0 = Some(r),
            Mode::Dts => slot.1 = Some(r),
        }
    }
    let mut rows: Vec<RatioRow> = by_key
        .into_values()
        .filter_map(|pair| match pair {
            (Some(c), Some(d)) => Some(RatioRow {
                pathloss: c.config.pathloss,
                flows: c.config.flows,
                seed: c.config.seed,
                cts_network_bps: c.network_throughput_bps,
                dts_network_bps: d.network_throughput_bps,
                network_ratio: c.network_throughput_bps / d.network_throughput_bps,
                cts_mean_flow_bps: c.mean_flow_throughput_bps,
                dts_mean_flow_bps: d.mean_flow_throughput_bps,
                flow_ratio: c.mean_flow_throughput_bps / d.mean_flow_throughput_bps,
            }),
            _ => None,
        })
        .collect();
    rows.sort_by(|a, b| {
        (a.pathloss, a.flows, a.seed)
            .partial_cmp(&(b.pathloss, b.flows, b.seed))
            .unwrap()
    });
    rows
}

/// Seed-averaged results for one (path loss, flows) setting.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRow {
    pub pathloss: f64,
    pub flows: usize,
    pub seeds: usize,
    pub cts_network_bps: f64,
    pub dts_network_bps: f64,
    /// Ratio of the seed-averaged network throughputs.
    pub network_ratio: f64,
    pub cts_mean_flow_bps: f64,
    pub dts_mean_flow_bps: f64,
    pub flow_ratio: f64,
    pub cts_jain: f64,
    pub dts_jain: f64,
}

pub fn cell_table(records: &[SummaryRecord]) -> Vec<CellRow> {
    let pairs = pair_ratios(records);
    let jain_of = |mode: Mode, pathloss: f64, flows: usize| -> f64 {
        let js: Vec<f64> = records
            .iter()
            .filter(|r| r.config.mode == mode && r.config.pathloss == pathloss && r.config.flows == flows)
            .filter_map(|r| r.jain_index)
            .collect();
        mean(&js)
    };
    let mut groups: BTreeMap<(u64, usize), Vec<&RatioRow>> = BTreeMap::new();
    for p in &pairs {
        groups.entry((p.pathloss.to_bits(), p.flows)).or_default().push(p);
    }
    let mut rows: Vec<CellRow> = groups
        .into_values()
        .map(|ps| {
            let col = |f: fn(&RatioRow) -> f64| mean(&ps.iter().map(|p| f(p)).collect::<Vec<_>>());
            let (pathloss, flows) = (ps[0].pathloss, ps[0].flows);
            let cts_network_bps = col(|p| p.cts_network_bps);
            let dts_network_bps = col(|p| p.dts_network_bps);
            let cts_mean_flow_bps = col(|p| p.cts_mean_flow_bps);
            let dts_mean_flow_bps = col(|p| p.dts_mean_flow_bps);
            CellRow {
                pathloss,
                flows,
                seeds: ps.len(),
                cts_network_bps,
                dts_network_bps,
                network_ratio: cts_network_bps / dts_network_bps,
                cts_mean_flow_bps,
                dts_mean_flow_bps,
                flow_ratio: cts_mean_flow_bps / dts_mean_flow_bps,
                cts_jain: jain_of(Mode::Cts, pathloss, flows),
                dts_jain: jain_of(Mode::Dts, pathloss, flows),
            }
        })
        .collect();
    rows.sort_by(|a, b| (a.pathloss, a.flows).partial_cmp(&(b.pathloss, b.flows)).unwrap());
    rows
}

/// Mean Jain index per (path loss, flows, mode) over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct FairnessRow {
    pub pathloss: f64,
    pub flows: usize,
    pub mode: Mode,
    pub seeds: usize,
    pub mean_jain: f64,
}

pub fn fairness_table(records: &[SummaryRecord]) -> Vec<FairnessRow> {
    let mut groups: BTreeMap<(u64, usize, Mode), Vec<f64>> = BTreeMap::new();
    for r in records {
        if let Some(j) = r.jain_index {
            groups
                .entry((r.config.pathloss.to_bits(), r.config.flows, r.config.mode))
                .or_default()
                .push(j);
        }
    }
    let mut rows: Vec<FairnessRow> = groups
        .into_iter()
        .map(|((bits, flows, mode), js)| FairnessRow {
            pathloss: f64::from_bits(bits),
            flows,
            mode,
            seeds: js.len(),
            mean_jain: mean(&js),
        })
        .collect();
    rows.sort_by(|a, b| {
        (a.pathloss, a.flows, a.mode)
            .partial_cmp(&(b.pathloss, b.flows, b.mode))
            .unwrap()
    });
    rows
}

pub fn write_ratios<W: Write>(writer: W, rows: &[RatioRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "pathloss",
        "flows",
        "seed",
        "cts_network_bps",
        "dts_network_bps",
        "network_ratio",
        "cts_mean_flow_bps",
        "dts_mean_flow_bps",
        "flow_ratio",
    ])?;
    for r in rows {
        w.write_record([
            r.pathloss.to_string(),
            r.flows.to_string(),
            r.seed.to_string(),
            r.cts_network_bps.to_string(),
            r.dts_network_bps.to_string(),
            r.network_ratio.to_string(),
            r.cts_mean_flow_bps.to_string(),
            r.dts_mean_flow_bps.to_string(),
            r.flow_ratio.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("ratio csv", e))?;
    Ok(())
}

pub fn write_cells<W: Write>(writer: W, rows: &[CellRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "pathloss",
        "flows",
        "seeds",
        "cts_network_bps",
        "dts_network_bps",
        "network_ratio",
        "cts_mean_flow_bps",
        "dts_mean_flow_bps",
        "flow_ratio",
        "cts_jain",
        "dts_jain",
    ])?;
    for r in rows {
        w.write_record([
            r.pathloss.to_string(),
            r.flows.to_string(),
            r.seeds.to_string(),
            r.cts_network_bps.to_string(),
            r.dts_network_bps.to_string(),
            r.network_ratio.to_string(),
            r.cts_mean_flow_bps.to_string(),
            r.dts_mean_flow_bps.to_string(),
            r.flow_ratio.to_string(),
            r.cts_jain.to_string(),
            r.dts_jain.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("cell csv", e))?;
    Ok(())
}

pub fn write_fairness<W: Write>(writer: W, rows: &[FairnessRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["pathloss", "flows", "mode", "seeds", "mean_jain"])?;
    for r in rows {
        w.write_record([
            r.pathloss.to_string(),
            r.flows.to_string(),
            r.mode.to_string(),
            r.seeds.to_string(),
            r.mean_jain.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("fairness csv", e))?;
    Ok(())
}
