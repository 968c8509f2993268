//! CSV emitters and the summary reader used by `compare`.

use std::io::{Read, Write};

use crate::cli::config::{echo_keys, RunConfig};
use crate::error::{Error, Result};
use crate::simkernel::{GraphTraceRow, RunSummary, ScheduleTraceRow, SuperframeStats};

pub const METRIC_COLUMNS: &[&str] = &[
    "network_throughput_bps",
    "delivered_throughput_bps",
    "mean_flow_throughput_bps",
    "jain_index",
    "superframes_run",
    "rejected_total",
    "deferred_total",
    "mean_group_size",
    "starved_flows",
    "delivered_bits",
    "carried_bits",
    "injected_bits",
    "transmissions",
    "per_flow_throughput_bps",
];

pub const TRACE_COLUMNS: &[&str] = &[
    "sf",
    "mode",
    "requests",
    "groups",
    "scheduled",
    "deferred",
    "rejected",
    "bits_delivered",
];

pub const SCHEDULE_COLUMNS: &[&str] = &[
    "sf",
    "group_index",
    "flow_id",
    "requester",
    "next_dest",
    "slots",
    "duration",
];

pub const GRAPH_COLUMNS: &[&str] = &["sf", "src", "dst", "weight"];

fn column_name(key: &str) -> String {
    key.replace('-', "_")
}

pub fn summary_header() -> Vec<String> {
    echo_keys()
        .map(column_name)
        .chain(METRIC_COLUMNS.iter().map(|s| s.to_string()))
        .collect()
}

/// One summary row: the configuration that produced it plus its metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRecord {
    pub config: RunConfig,
    pub network_throughput_bps: f64,
    pub delivered_throughput_bps: f64,
    pub mean_flow_throughput_bps: f64,
    pub jain_index: Option<f64>,
    pub superframes_run: u64,
    pub rejected_total: u64,
    pub deferred_total: u64,
    pub mean_group_size: f64,
    pub starved_flows: usize,
    pub delivered_bits: f64,
    pub carried_bits: f64,
    pub injected_bits: f64,
    pub transmissions: u64,
    pub per_flow_throughput_bps: Vec<f64>,
}

impl SummaryRecord {
    pub fn new(config: RunConfig, summary: &RunSummary<f64>) -> Self {
        SummaryRecord {
            network_throughput_bps: summary.network_throughput_bps,
            delivered_throughput_bps: summary.delivered_throughput_bps,
            mean_flow_throughput_bps: summary.mean_flow_throughput_bps(),
            jain_index: summary.jain_index,
            superframes_run: summary.superframes_run,
            rejected_total: summary.rejected_total,
            deferred_total: summary.deferred_total,
            mean_group_size: summary.mean_group_size,
            starved_flows: summary.starved_flows,
            delivered_bits: summary.delivered_bits,
            carried_bits: summary.carried_bits,
            injected_bits: summary.injected_bits,
            transmissions: summary.transmissions,
            per_flow_throughput_bps: summary.per_flow_throughput_bps.clone(),
            config,
        }
    }

    fn fields(&self) -> Vec<String> {
        let mut out: Vec<String> = self.config.echo().into_iter().map(|(_, v)| v).collect();
        out.extend([
            self.network_throughput_bps.to_string(),
            self.delivered_throughput_bps.to_string(),
            self.mean_flow_throughput_bps.to_string(),
            self.jain_index.map(|j| j.to_string()).unwrap_or_default(),
            self.superframes_run.to_string(),
            self.rejected_total.to_string(),
            self.deferred_total.to_string(),
            self.mean_group_size.to_string(),
            self.starved_flows.to_string(),
            self.delivered_bits.to_string(),
            self.carried_bits.to_string(),
            self.injected_bits.to_string(),
            self.transmissions.to_string(),
            self.per_flow_throughput_bps
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(";"),
        ]);
        out
    }
}

pub fn write_summary<W: Write>(writer: W, records: &[SummaryRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(summary_header())?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush().map_err(|e| Error::io("summary csv", e))?;
    Ok(())
}

pub fn read_summary<R: Read>(reader: R) -> Result<Vec<SummaryRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    let expected = summary_header();
    for name in &expected {
        if !headers.iter().any(|h| h == name) {
            return Err(Error::Invalid(format!("summary csv is missing column {name}")));
        }
    }
    let index = |name: &str| headers.iter().position(|h| h == name).expect("checked above");
    let mut out = Vec::new();
    for (row, record) in r.records().enumerate() {
        let record = record?;
        let line = row + 2;
        let get = |name: &str| record.get(index(name)).unwrap_or("").to_string();
        let num = |name: &str| -> Result<f64> {
            get(name)
                .parse::<f64>()
                .map_err(|_| Error::Invalid(format!("summary csv line {line}: bad {name}")))
        };
        let int = |name: &str| -> Result<u64> {
            get(name)
                .parse::<u64>()
                .map_err(|_| Error::Invalid(format!("summary csv line {line}: bad {name}")))
        };
        let mut config = RunConfig::default();
        for key in echo_keys() {
            config.set(key, &get(&column_name(key))).map_err(|e| match e {
                Error::Config { key, message } => Error::config(format!("summary csv line {line}: {key}"), message),
                other => other,
            })?;
        }
        let jain = get("jain_index");
        let per_flow = get("per_flow_throughput_bps");
        out.push(SummaryRecord {
            config,
            network_throughput_bps: num("network_throughput_bps")?,
            delivered_throughput_bps: num("delivered_throughput_bps")?,
            mean_flow_throughput_bps: num("mean_flow_throughput_bps")?,
            jain_index: if jain.is_empty() {
                None
            } else {
                Some(num("jain_index")?)
            },
            superframes_run: int("superframes_run")?,
            rejected_total: int("rejected_total")?,
            deferred_total: int("deferred_total")?,
            mean_group_size: num("mean_group_size")?,
            starved_flows: int("starved_flows")? as usize,
            delivered_bits: num("delivered_bits")?,
            carried_bits: num("carried_bits")?,
            injected_bits: num("injected_bits")?,
            transmissions: int("transmissions")?,
            per_flow_throughput_bps: if per_flow.is_empty() {
                Vec::new()
            } else {
                per_flow
                    .split(';')
                    .map(|s| {
                        s.parse::<f64>().map_err(|_| {
                            Error::Invalid(format!("summary csv line {line}: bad per_flow_throughput_bps"))
                        })
                    })
                    .collect::<Result<_>>()?
            },
        });
    }
    Ok(out)
}

pub fn write_trace<W: Write>(writer: W, rows: &[SuperframeStats<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TRACE_COLUMNS)?;
    for s in rows {
        w.write_record([
            s.sf.to_string(),
            s.mode.to_string(),
            s.requests.to_string(),
            s.groups.to_string(),
            s.scheduled.to_string(),
            s.deferred.to_string(),
            s.rejected.to_string(),
            s.bits_delivered.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("trace csv", e))?;
    Ok(())
}

pub fn write_schedule_trace<W: Write>(writer: W, rows: &[ScheduleTraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SCHEDULE_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.sf.to_string(),
            r.group_index.to_string(),
            r.flow_id.to_string(),
            r.requester.to_string(),
            r.next_dest.to_string(),
            r.slots.to_string(),
            r.duration.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("schedule csv", e))?;
    Ok(())
}

pub fn write_graph_trace<W: Write>(writer: W, rows: &[GraphTraceRow<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(GRAPH_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.sf.to_string(),
            r.src.to_string(),
            r.dst.to_string(),
            r.weight.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("graph csv", e))?;
    Ok(())
}
