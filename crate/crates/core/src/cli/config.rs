//! Run configuration: a flat `key = value` file, `WPAN_CTS_*` environment
//! variables and `--key value` flags, applied in that order over the defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::channel::{dbm_per_mhz_to_w_per_hz, ChannelParams, DEFAULT_INTERFERENCE_TO_NOISE};
use crate::error::{Error, Result};
use crate::geometry::NodeLayout;
use crate::scalar::Scalar;
use crate::scheduling::{Admission, InterferenceModel};
use crate::simkernel::{KernelParams, Mode, SimConfig, TrafficModel};

pub const ENV_PREFIX: &str = "WPAN_CTS_";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrafficKind {
    Saturated,
    Burst,
}

impl TrafficKind {
    fn as_str(self) -> &'static str {
        match self {
            TrafficKind::Saturated => "saturated",
            TrafficKind::Burst => "burst",
        }
    }
}

impl FromStr for TrafficKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "saturated" => Ok(TrafficKind::Saturated),
            "burst" => Ok(TrafficKind::Burst),
            other => Err(format!("expected saturated or burst, got {other:?}")),
        }
    }
}

/// Interference PSD per active flow: a multiple of the noise PSD, or a fixed W/Hz value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterferencePsd {
    /// `noise` or `noise*k`.
    Noise(f64),
    Fixed(f64),
}

impl Default for InterferencePsd {
    fn default() -> Self {
        InterferencePsd::Noise(DEFAULT_INTERFERENCE_TO_NOISE)
    }
}

impl Display for InterferencePsd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InterferencePsd::Noise(k) if *k == 1.0 => f.write_str("noise"),
            InterferencePsd::Noise(k) => write!(f, "noise*{k}"),
            InterferencePsd::Fixed(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for InterferencePsd {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let bad = || format!("expected `noise`, `noise*k` or a number, got {s:?}");
        match s.strip_prefix("noise") {
            Some("") => Ok(InterferencePsd::Noise(1.0)),
            Some(rest) => rest
                .strip_prefix('*')
                .and_then(|k| k.trim().parse::<f64>().ok())
                .map(InterferencePsd::Noise)
                .ok_or_else(bad),
            None => s.parse::<f64>().map(InterferencePsd::Fixed).map_err(|_| bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub nodes: usize,
    pub room_width: f64,
    pub room_height: f64,
    pub coverage_radius: f64,
    pub flows: usize,
    pub pathloss: f64,
    pub bandwidth_hz: f64,
    pub tx_power_w: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub noise_dbm_per_mhz: f64,
    pub interference_psd: InterferencePsd,
    pub carrier_hz: f64,
    pub payload_bits: f64,
    pub superframe_duration_s: f64,
    pub slot_duration_s: f64,
    pub overhead_fraction: f64,
    pub superframes: u64,
    pub seed: u64,
    pub interference_model: InterferenceModel,
    pub traffic_model: TrafficKind,
    pub burst_payloads: usize,
    pub rejection_per_member: f64,
    pub starvation_threshold: u64,
    pub layout_file: Option<PathBuf>,
    pub out_summary: Option<PathBuf>,
    pub out_trace: Option<PathBuf>,
    pub out_schedule: Option<PathBuf>,
    pub out_graph: Option<PathBuf>,
    pub quiet: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Cts,
            nodes: 30,
            room_width: 16.0,
            room_height: 16.0,
            coverage_radius: 23.0,
            flows: 6,
            pathloss: 2.0,
            bandwidth_hz: 7.0e9,
            tx_power_w: 1.0e-4,
            tx_gain_dbi: 12.0,
            rx_gain_dbi: 12.0,
            noise_dbm_per_mhz: -134.0,
            interference_psd: InterferencePsd::default(),
            carrier_hz: 60.0e9,
            payload_bits: 1.0e7,
            superframe_duration_s: 0.065_536,
            slot_duration_s: 10.0e-6,
            overhead_fraction: 0.1,
            superframes: 200,
            seed: 1,
            interference_model: InterferenceModel::DualSector,
            traffic_model: TrafficKind::Saturated,
            burst_payloads: 1,
            rejection_per_member: 0.1,
            starvation_threshold: 10,
            layout_file: None,
            out_summary: None,
            out_trace: None,
            out_schedule: None,
            out_graph: None,
            quiet: false,
        }
    }
}

/// A configuration key, its help text, and whether it is echoed into summary rows.
pub struct KeySpec {
    pub key: &'static str,
    pub help: &'static str,
    pub echo: bool,
    pub switch: bool,
}

const fn key(key: &'static str, help: &'static str) -> KeySpec {
    KeySpec {
        key,
        help,
        echo: true,
        switch: false,
    }
}

const fn output(key: &'static str, help: &'static str) -> KeySpec {
    KeySpec {
        key,
        help,
        echo: false,
        switch: false,
    }
}

pub const KEYS: &[KeySpec] = &[
    key("mode", "cts (concurrent, multihop) or dts (direct, sequential)"),
    key("pathloss", "path loss exponent n"),
    key("flows", "number of traffic flows"),
    key("seed", "rng seed (u64)"),
    key("nodes", "number of nodes"),
    key("room-width", "room width X, metres"),
    key("room-height", "room height Y, metres"),
    key("coverage-radius", "antenna coverage radius R, metres"),
    key("bandwidth-hz", "channel bandwidth W, Hz"),
    key("tx-power-w", "transmit power, watts"),
    key("tx-gain-dbi", "transmit antenna gain, dBi"),
    key("rx-gain-dbi", "receive antenna gain, dBi"),
    key("noise-dbm-per-mhz", "background noise PSD, dBm/MHz"),
    key(
        "interference-psd-w-per-hz",
        "interference PSD per active flow: W/Hz, `noise` or `noise*k`",
    ),
    key("carrier-hz", "carrier frequency, Hz"),
    key("payload-bits", "payload size per request, bits"),
    key("superframe-duration-s", "superframe length, seconds"),
    key("slot-duration-s", "time slot length, seconds"),
    key(
        "overhead-fraction",
        "share of the superframe spent in beacon and request periods",
    ),
    key("superframes", "superframes to simulate"),
    key("interference-model", "dual_sector or tx_beam"),
    key("traffic-model", "saturated or burst"),
    key("burst-payloads", "payloads per flow in burst mode"),
    key(
        "rejection-per-member",
        "admission refusal probability per existing group member",
    ),
    key(
        "starvation-threshold",
        "superframes without service before a flow counts as starved",
    ),
    key("layout-file", "replay node positions from a node_id,x,y CSV"),
    output("out-summary", "write the summary CSV here"),
    output("out-trace", "write the per-superframe trace CSV here"),
    output("out-schedule", "write the per-group schedule trace CSV here"),
    output("out-graph", "write the per-superframe weighted graph CSV here"),
    KeySpec {
        key: "quiet",
        help: "suppress progress output",
        echo: false,
        switch: true,
    },
];

pub fn is_known_key(k: &str) -> bool {
    KEYS.iter().any(|s| s.key == k)
}

/// Keys echoed into summary rows, in column order.
pub fn echo_keys() -> impl Iterator<Item = &'static str> {
    KEYS.iter().filter(|k| k.echo).map(|k| k.key)
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: Display,
{
    value
        .trim()
        .parse::<T>()
        .map_err(|e| Error::config(key, format!("cannot parse {value:?}: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" | "on" | "" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(Error::config(key, format!("expected a boolean, got {other:?}"))),
    }
}

fn optional_path(value: &str) -> Option<PathBuf> {
    let v = value.trim();
    (!v.is_empty()).then(|| PathBuf::from(v))
}

/// Accepts `room_width`, `room-width`, `ROOM_WIDTH` alike.
pub fn normalize_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace('_', "-")
}

impl RunConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let k = normalize_key(key);
        let v = value.trim();
        match k.as_str() {
            "mode" => self.mode = parse(&k, v)?,
            "nodes" => self.nodes = parse(&k, v)?,
            "room-width" => self.room_width = parse(&k, v)?,
            "room-height" => self.room_height = parse(&k, v)?,
            "coverage-radius" => self.coverage_radius = parse(&k, v)?,
            "flows" => self.flows = parse(&k, v)?,
            "pathloss" => self.pathloss = parse(&k, v)?,
            "bandwidth-hz" => self.bandwidth_hz = parse(&k, v)?,
            "tx-power-w" => self.tx_power_w = parse(&k, v)?,
            "tx-gain-dbi" => self.tx_gain_dbi = parse(&k, v)?,
            "rx-gain-dbi" => self.rx_gain_dbi = parse(&k, v)?,
            "noise-dbm-per-mhz" => self.noise_dbm_per_mhz = parse(&k, v)?,
            "interference-psd-w-per-hz" => self.interference_psd = parse(&k, v)?,
            "carrier-hz" => self.carrier_hz = parse(&k, v)?,
            "payload-bits" => self.payload_bits = parse(&k, v)?,
            "superframe-duration-s" => self.superframe_duration_s = parse(&k, v)?,
            "slot-duration-s" => self.slot_duration_s = parse(&k, v)?,
            "overhead-fraction" => self.overhead_fraction = parse(&k, v)?,
            "superframes" => self.superframes = parse(&k, v)?,
            "seed" => self.seed = parse(&k, v)?,
            "interference-model" => self.interference_model = parse(&k, v)?,
            "traffic-model" => self.traffic_model = parse(&k, v)?,
            "burst-payloads" => self.burst_payloads = parse(&k, v)?,
            "rejection-per-member" => self.rejection_per_member = parse(&k, v)?,
            "starvation-threshold" => self.starvation_threshold = parse(&k, v)?,
            "layout-file" => self.layout_file = optional_path(v),
            "out-summary" => self.out_summary = optional_path(v),
            "out-trace" => self.out_trace = optional_path(v),
            "out-schedule" => self.out_schedule = optional_path(v),
            "out-graph" => self.out_graph = optional_path(v),
            "quiet" => self.quiet = parse_bool(&k, v)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Current value of `key` as text that [`RunConfig::set`] accepts back.
    pub fn get(&self, key: &str) -> Option<String> {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let v = match normalize_key(key).as_str() {
            "mode" => self.mode.to_string(),
            "nodes" => self.nodes.to_string(),
            "room-width" => self.room_width.to_string(),
            "room-height" => self.room_height.to_string(),
            "coverage-radius" => self.coverage_radius.to_string(),
            "flows" => self.flows.to_string(),
            "pathloss" => self.pathloss.to_string(),
            "bandwidth-hz" => self.bandwidth_hz.to_string(),
            "tx-power-w" => self.tx_power_w.to_string(),
            "tx-gain-dbi" => self.tx_gain_dbi.to_string(),
            "rx-gain-dbi" => self.rx_gain_dbi.to_string(),
            "noise-dbm-per-mhz" => self.noise_dbm_per_mhz.to_string(),
            "interference-psd-w-per-hz" => self.interference_psd.to_string(),
            "carrier-hz" => self.carrier_hz.to_string(),
            "payload-bits" => self.payload_bits.to_string(),
            "superframe-duration-s" => self.superframe_duration_s.to_string(),
            "slot-duration-s" => self.slot_duration_s.to_string(),
            "overhead-fraction" => self.overhead_fraction.to_string(),
            "superframes" => self.superframes.to_string(),
            "seed" => self.seed.to_string(),
            "interference-model" => self.interference_model.as_str().to_string(),
            "traffic-model" => self.traffic_model.as_str().to_string(),
            "burst-payloads" => self.burst_payloads.to_string(),
            "rejection-per-member" => self.rejection_per_member.to_string(),
            "starvation-threshold" => self.starvation_threshold.to_string(),
            "layout-file" => path(&self.layout_file),
            "out-summary" => path(&self.out_summary),
            "out-trace" => path(&self.out_trace),
            "out-schedule" => path(&self.out_schedule),
            "out-graph" => path(&self.out_graph),
            "quiet" => self.quiet.to_string(),
            _ => return None,
        };
        Some(v)
    }

    /// Applies a flat config file. Blank lines and `#` comments are skipped.
    pub fn apply_file_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("{origin}:{}", lineno + 1), "expected `key = value`"))?;
            self.set(k, v).map_err(|e| match e {
                Error::Config { key, message } => Error::config(format!("{origin}:{}: {key}", lineno + 1), message),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        self.apply_file_text(&text, &path.display().to_string())
    }

    /// Applies `WPAN_CTS_<KEY>` variables; an unknown suffix is an error.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<()>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut found = BTreeMap::new();
        for (k, v) in vars {
            if let Some(suffix) = k.as_ref().strip_prefix(ENV_PREFIX) {
                found.insert(k.as_ref().to_string(), (normalize_key(suffix), v.as_ref().to_string()));
            }
        }
        for (var, (k, v)) in found {
            if !is_known_key(&k) {
                return Err(Error::config(var, "unknown key"));
            }
            self.set(&k, &v).map_err(|e| match e {
                Error::Config { message, .. } => Error::config(var.clone(), message),
                other => other,
            })?;
        }
        Ok(())
    }

    /// Defaults, then `file`, then `env`, then `flags`, then validation.
    pub fn resolve<I, K, V>(file: Option<&Path>, env: I, flags: &[(String, String)]) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            cfg.apply_file(path)?;
        }
        cfg.apply_env(env)?;
        for (k, v) in flags {
            cfg.set(k, v).map_err(|e| match e {
                Error::Config { message, .. } => Error::config(format!("--{}", normalize_key(k)), message),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be positive, got {v}")))
            }
        };
        if self.nodes < 2 {
            return Err(Error::config(
                "nodes",
                format!("must be at least 2, got {}", self.nodes),
            ));
        }
        positive("room-width", self.room_width)?;
        positive("room-height", self.room_height)?;
        positive("coverage-radius", self.coverage_radius)?;
        let pairs = self.nodes * (self.nodes - 1);
        if self.flows == 0 || self.flows > pairs {
            return Err(Error::config(
                "flows",
                format!("must be in 1..={pairs} for {} nodes, got {}", self.nodes, self.flows),
            ));
        }
        if !(self.pathloss >= 1.0 && self.pathloss.is_finite()) {
            return Err(Error::config(
                "pathloss",
                format!("must be >= 1, got {}", self.pathloss),
            ));
        }
        positive("superframe-duration-s", self.superframe_duration_s)?;
        positive("slot-duration-s", self.slot_duration_s)?;
        if !(0.0..1.0).contains(&self.overhead_fraction) {
            return Err(Error::config(
                "overhead-fraction",
                format!("must be in [0, 1), got {}", self.overhead_fraction),
            ));
        }
        if self.superframes == 0 {
            return Err(Error::config("superframes", "must be at least 1"));
        }
        if self.burst_payloads == 0 {
            return Err(Error::config("burst-payloads", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.rejection_per_member) {
            return Err(Error::config(
                "rejection-per-member",
                format!("must be in [0, 1], got {}", self.rejection_per_member),
            ));
        }
        let (InterferencePsd::Fixed(v) | InterferencePsd::Noise(v)) = self.interference_psd;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::config(
                "interference-psd-w-per-hz",
                format!("must be >= 0, got {v}"),
            ));
        }
        self.channel::<f64>().validate()?;
        let kernel = self.kernel::<f64>();
        if kernel.budget_slots() == 0 {
            return Err(Error::config(
                "slot-duration-s",
                "no whole slot fits in the transmission period",
            ));
        }
        Ok(())
    }

    pub fn channel<S: Scalar>(&self) -> ChannelParams<S> {
        let noise = S::lit(self.noise_dbm_per_mhz);
        ChannelParams {
            bandwidth_hz: S::lit(self.bandwidth_hz),
            tx_power_w: S::lit(self.tx_power_w),
            tx_gain_dbi: S::lit(self.tx_gain_dbi),
            rx_gain_dbi: S::lit(self.rx_gain_dbi),
            noise_psd_dbm_per_mhz: noise,
            interference_psd_w_per_hz: match self.interference_psd {
                InterferencePsd::Noise(k) => dbm_per_mhz_to_w_per_hz(noise) * S::lit(k),
                InterferencePsd::Fixed(v) => S::lit(v),
            },
            pathloss_exponent: S::lit(self.pathloss),
            carrier_hz: S::lit(self.carrier_hz),
            slot_duration_s: S::lit(self.slot_duration_s),
            payload_bits: S::lit(self.payload_bits),
        }
    }

    pub fn kernel<S: Scalar>(&self) -> KernelParams<S> {
        KernelParams {
            mode: self.mode,
            channel: self.channel(),
            superframe_duration_s: S::lit(self.superframe_duration_s),
            overhead_fraction: S::lit(self.overhead_fraction),
            interference_model: self.interference_model,
            admission: Admission::Probabilistic {
                per_member: self.rejection_per_member,
            },
            traffic: match self.traffic_model {
                TrafficKind::Saturated => TrafficModel::Saturated,
                TrafficKind::Burst => TrafficModel::Burst {
                    payloads: self.burst_payloads,
                },
            },
            starvation_threshold: self.starvation_threshold,
        }
    }

    /// Simulation inputs, loading the replay layout if one is configured.
    pub fn sim_config<S: Scalar>(&self) -> Result<SimConfig<S>> {
        let (w, h, r) = (
            S::lit(self.room_width),
            S::lit(self.room_height),
            S::lit(self.coverage_radius),
        );
        let layout = match &self.layout_file {
            Some(path) => {
                let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
                let layout = NodeLayout::read_csv(file, w, h, r)?;
                if layout.len() != self.nodes {
                    return Err(Error::config(
                        "layout-file",
                        format!("holds {} nodes but nodes = {}", layout.len(), self.nodes),
                    ));
                }
                Some(layout)
            }
            None => None,
        };
        Ok(SimConfig {
            kernel: self.kernel(),
            nodes: self.nodes,
            room_width: w,
            room_height: h,
            coverage_radius: r,
            flows: self.flows,
            superframes: self.superframes,
            seed: self.seed,
            layout,
            record_schedule: self.out_schedule.is_some(),
            record_graph: self.out_graph.is_some(),
        })
    }

    /// `(key, value)` pairs written into summary rows.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        echo_keys()
            .map(|k| (k, self.get(k).expect("echo key is known")))
            .collect()
    }
}
