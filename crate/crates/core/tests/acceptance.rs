//! Reference sweep plus property and oracle checks, one verdict line per criterion.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wpan_cts::channel::{dbm_per_mhz_to_w_per_hz, link_rate, received_power, ChannelParams};
use wpan_cts::cli::config::RunConfig;
use wpan_cts::cli::output::{read_summary, write_summary};
use wpan_cts::cli::sweep::{cell_table, fairness_table, run_sweep, CellRow, FairnessRow, SweepSpec};
use wpan_cts::metrics::{mean, relative_spread, spearman};
use wpan_cts::simkernel::{run_simulation, Mode, SimConfig};

const NETWORK_RATIO_BAND: (f64, f64) = (2.0, 8.0);
const NETWORK_RATIO_MIN_FLOWS: usize = 4;
const FLOW_RATIO_BAND: (f64, f64) = (1.2, 2.5);
const JAIN_TREND_MAX_RHO: f64 = -0.5;
const JAIN_PATHLOSS_MAX_SPREAD: f64 = 0.15;
const DTS_MAX_RELATIVE_SPREAD: f64 = 0.10;
const ORACLE_SIG_DIGITS: f64 = 1e-6;

// 40-digit mpmath evaluation
const ORACLE_N0: f64 = 3.98107170553497e-23;
const ORACLE_PR_5M_N2: f64 = 1.588_470_553_246_18e-10;
const ORACLE_RATE_5M_N2: f64 = 64101574153.9653;

struct Verdict {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn verdict(name: &'static str, pass: bool, detail: String) -> Verdict {
    Verdict { name, pass, detail }
}

fn pathlosses(cells: &[CellRow]) -> Vec<f64> {
    let mut ns: Vec<f64> = cells.iter().map(|c| c.pathloss).collect();
    ns.dedup();
    ns
}

fn network_ratio_band(cells: &[CellRow]) -> Verdict {
    let checked: Vec<&CellRow> = cells.iter().filter(|c| c.flows >= NETWORK_RATIO_MIN_FLOWS).collect();
    let outside: Vec<String> = checked
        .iter()
        .filter(|c| !(NETWORK_RATIO_BAND.0..=NETWORK_RATIO_BAND.1).contains(&c.network_ratio))
        .map(|c| format!("n={} flows={}: {:.3}", c.pathloss, c.flows, c.network_ratio))
        .collect();
    let lo = checked.iter().map(|c| c.network_ratio).fold(f64::INFINITY, f64::min);
    let hi = checked
        .iter()
        .map(|c| c.network_ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    verdict(
        "network throughput ratio in [2, 8] for flows >= 4",
        outside.is_empty() && !checked.is_empty(),
        format!("{} cells, range {lo:.3}..{hi:.3}; outside: {outside:?}", checked.len()),
    )
}

fn flow_ratio_band(cells: &[CellRow]) -> Verdict {
    let m = mean(&cells.iter().map(|c| c.flow_ratio).collect::<Vec<_>>());
    verdict(
        "mean flow throughput ratio in [1.2, 2.5] averaged over cells",
        (FLOW_RATIO_BAND.0..=FLOW_RATIO_BAND.1).contains(&m),
        format!("{m:.3} over {} cells", cells.len()),
    )
}

fn cts_jain(fair: &[FairnessRow], n: f64) -> (Vec<f64>, Vec<f64>) {
    fair.iter()
        .filter(|r| r.mode == Mode::Cts && r.pathloss == n)
        .map(|r| (r.flows as f64, r.mean_jain))
        .unzip()
}

fn jain_trend(fair: &[FairnessRow], ns: &[f64]) -> Verdict {
    let rhos: Vec<(f64, f64)> = ns
        .iter()
        .map(|&n| {
            let (flows, jain) = cts_jain(fair, n);
            (n, spearman(&flows, &jain))
        })
        .collect();
    verdict(
        "fairness falls with flow count (Spearman <= -0.5 per n)",
        rhos.iter().all(|&(_, r)| r <= JAIN_TREND_MAX_RHO),
        format!("{rhos:?}"),
    )
}

fn jain_pathloss(fair: &[FairnessRow]) -> Verdict {
    let mut flows: Vec<usize> = fair.iter().map(|r| r.flows).collect();
    flows.sort_unstable();
    flows.dedup();
    let spreads: Vec<(usize, f64)> = flows
        .iter()
        .map(|&f| {
            let js: Vec<f64> = fair
                .iter()
                .filter(|r| r.mode == Mode::Cts && r.flows == f)
                .map(|r| r.mean_jain)
                .collect();
            let hi = js.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = js.iter().copied().fold(f64::INFINITY, f64::min);
            (f, hi - lo)
        })
        .collect();
    verdict(
        "fairness insensitive to path loss (max-min <= 0.15 per flow count)",
        spreads.iter().all(|&(_, s)| s <= JAIN_PATHLOSS_MAX_SPREAD),
        format!(
            "{:?}",
            spreads.iter().map(|&(f, s)| format!("{f}:{s:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn dts_flatness(cells: &[CellRow], ns: &[f64]) -> Verdict {
    let spreads: Vec<(f64, f64)> = ns
        .iter()
        .map(|&n| {
            let xs: Vec<f64> = cells
                .iter()
                .filter(|c| c.pathloss == n)
                .map(|c| c.dts_network_bps)
                .collect();
            (n, relative_spread(&xs))
        })
        .collect();
    verdict(
        "direct network throughput flat across flow counts (spread <= 10%)",
        spreads.iter().all(|&(_, s)| s <= DTS_MAX_RELATIVE_SPREAD),
        format!(
            "{:?}",
            spreads
                .iter()
                .map(|&(n, s)| format!("n={n}: {:.1}%", 100.0 * s))
                .collect::<Vec<_>>()
        ),
    )
}

fn determinism() -> Result<(), String> {
    for mode in [Mode::Cts, Mode::Dts] {
        let mut config = SimConfig::<f64> {
            flows: 10,
            superframes: 100,
            seed: 42,
            ..SimConfig::default()
        };
        config.kernel.mode = mode;
        let a = run_simulation(&config).map_err(|e| e.to_string())?.summary;
        let b = run_simulation(&config).map_err(|e| e.to_string())?.summary;
        let bits = |s: &wpan_cts::RunSummary| -> Vec<u64> {
            s.per_flow_throughput_bps
                .iter()
                .chain([&s.network_throughput_bps, &s.mean_group_size])
                .map(|x| x.to_bits())
                .collect()
        };
        if a != b || bits(&a) != bits(&b) {
            return Err(format!("{mode} summaries differ"));
        }
    }
    Ok(())
}

type Check = fn(&mut ChaCha8Rng) -> Result<(), String>;

fn properties() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let suites: [(&str, usize, Check); 7] = [
        (
            "schedule partition/disjointness/budget",
            10_000,
            common::schedule_instance,
        ),
        ("conflict symmetry", 1_000, common::conflicts_symmetric_instance),
        ("shortest path vs enumeration", 1_000, common::dijkstra_instance),
        ("rate monotonicity", 1_000, common::rate_monotone_instance),
        ("slot allocation", 1_000, common::slots_instance),
        ("fairness bounds", 1_000, common::jain_instance),
        ("geometry symmetry", 1_000, common::geometry_instance),
    ];
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for (name, count, check) in suites {
        match common::repeat(&mut rng, count, check) {
            Ok(()) => summary.push(format!("{name} x{count}")),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    match determinism() {
        Ok(()) => summary.push("repeat-run determinism".into()),
        Err(e) => failures.push(format!("determinism: {e}")),
    }
    verdict(
        "property suites",
        failures.is_empty(),
        if failures.is_empty() {
            summary.join(", ")
        } else {
            failures.join("; ")
        },
    )
}

fn oracles() -> Verdict {
    let p = ChannelParams::<f64>::default();
    let close = |got: f64, want: f64| ((got - want) / want).abs() <= ORACLE_SIG_DIGITS;
    let n0 = dbm_per_mhz_to_w_per_hz(-134.0f64);
    let pr = received_power(&p, 5.0).unwrap();
    let rate = link_rate(&p.without_interference(), 5.0, 1).unwrap().0;
    verdict(
        "channel oracles to 6 significant digits",
        close(n0, ORACLE_N0) && close(pr, ORACLE_PR_5M_N2) && close(rate, ORACLE_RATE_5M_N2),
        format!("N0 {n0:.6e} W/Hz, Pr(5 m) {pr:.6e} W, R(5 m) {rate:.6e} bit/s"),
    )
}

fn main() -> ExitCode {
    let started = Instant::now();
    let base = RunConfig {
        quiet: true,
        ..RunConfig::default()
    };
    let outcome = run_sweep(&base, &SweepSpec::reference()).expect("reference sweep");
    let sweep_s = started.elapsed().as_secs_f64();

    let mut csv = Vec::new();
    write_summary(&mut csv, &outcome.records).expect("summary csv");
    let records = read_summary(&csv[..]).expect("summary csv reads back");

    let cells = cell_table(&records);
    let fair = fairness_table(&records);
    let ns = pathlosses(&cells);

    let mut verdicts = vec![verdict(
        "reference sweep completes",
        outcome.failures.is_empty() && records.len() == 150 && cells.len() == 15,
        format!(
            "{} rows, {} failures, {sweep_s:.1}s",
            records.len(),
            outcome.failures.len()
        ),
    )];
    verdicts.extend([
        network_ratio_band(&cells),
        flow_ratio_band(&cells),
        jain_trend(&fair, &ns),
        jain_pathloss(&fair),
        dts_flatness(&cells, &ns),
        properties(),
        oracles(),
    ]);

    println!();
    println!(
        "{:>5} {:>6} {:>12} {:>12} {:>8} {:>8} {:>8}",
        "n", "flows", "cts", "dts", "net x", "flow x", "jain"
    );
    for c in &cells {
        println!(
            "{:>5} {:>6} {:>12.4e} {:>12.4e} {:>8.3} {:>8.3} {:>8.4}",
            c.pathloss, c.flows, c.cts_network_bps, c.dts_network_bps, c.network_ratio, c.flow_ratio, c.cts_jain
        );
    }
    println!();
    for v in &verdicts {
        println!("{} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!("\nacceptance: {} passed, {failed} failed", verdicts.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
