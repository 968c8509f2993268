use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};

use wpan_cts::cli::config::{RunConfig, KEYS};
use wpan_cts::cli::output::{
    read_summary, write_graph_trace, write_schedule_trace, write_summary, write_trace, SummaryRecord,
};
use wpan_cts::cli::sweep::{
    cell_table, fairness_table, pair_ratios, parse_list, run_sweep, write_cells, write_fairness, write_ratios,
    SweepSpec,
};
use wpan_cts::simkernel::{prepare, run_simulation, Mode};
use wpan_cts::{Error, Result};

fn key_args(cmd: Command) -> Command {
    let cmd = cmd.arg(
        Arg::new("config")
            .long("config")
            .value_name("PATH")
            .value_parser(clap::value_parser!(PathBuf))
            .help("flat key = value config file"),
    );
    KEYS.iter().fold(cmd, |cmd, spec| {
        let arg = Arg::new(spec.key).long(spec.key).help(spec.help);
        let arg = if spec.switch {
            arg.num_args(0..=1).default_missing_value("true").value_name("BOOL")
        } else {
            arg.value_name("VALUE")
        };
        cmd.arg(arg)
    })
}

fn cli() -> Command {
    Command::new("wpan-cts")
        .about("Concurrent-transmission scheduling simulator for 60 GHz WPAN piconets")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(key_args(Command::new("run").about("Run one simulation cell")))
        .subcommand(
            key_args(Command::new("sweep").about("Run the Cartesian product of flows × path loss × seeds × modes"))
                .arg(Arg::new("sweep-flows").long("sweep-flows").value_name("LIST"))
                .arg(Arg::new("sweep-pathloss").long("sweep-pathloss").value_name("LIST"))
                .arg(Arg::new("sweep-seeds").long("sweep-seeds").value_name("LIST"))
                .arg(Arg::new("sweep-modes").long("sweep-modes").value_name("LIST"))
                .arg(
                    Arg::new("reference")
                        .long("reference")
                        .action(ArgAction::SetTrue)
                        .help("flows 2..10 step 2, n 2/2.5/3, seeds 1..5, both modes"),
                ),
        )
        .subcommand(
            Command::new("compare")
                .about("CTS/DTS ratio and fairness tables from summary CSVs")
                .arg(
                    Arg::new("summary")
                        .required(true)
                        .num_args(1..)
                        .value_parser(clap::value_parser!(PathBuf)),
                )
                .arg(
                    Arg::new("out-ratios")
                        .long("out-ratios")
                        .value_parser(clap::value_parser!(PathBuf)),
                )
                .arg(
                    Arg::new("out-cells")
                        .long("out-cells")
                        .value_parser(clap::value_parser!(PathBuf)),
                )
                .arg(
                    Arg::new("out-fairness")
                        .long("out-fairness")
                        .value_parser(clap::value_parser!(PathBuf)),
                ),
        )
        .subcommand(
            key_args(Command::new("dump-layout").about("Write the seeded node layout as node_id,x,y"))
                .arg(Arg::new("out").long("out").value_parser(clap::value_parser!(PathBuf))),
        )
}

fn resolve(m: &ArgMatches) -> Result<RunConfig> {
    let flags: Vec<(String, String)> = KEYS
        .iter()
        .filter_map(|s| m.get_one::<String>(s.key).map(|v| (s.key.to_string(), v.clone())))
        .collect();
    RunConfig::resolve(
        m.get_one::<PathBuf>("config").map(PathBuf::as_path),
        std::env::vars(),
        &flags,
    )
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Writes to `path`, or stdout when absent.
fn emit(path: Option<&PathBuf>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => f(&mut create(p)?),
        None => f(&mut io::stdout().lock()),
    }
}

fn cmd_run(m: &ArgMatches) -> Result<()> {
    let cfg = resolve(m)?;
    let out = run_simulation(&cfg.sim_config::<f64>()?)?;
    let record = SummaryRecord::new(cfg.clone(), &out.summary);
    emit(cfg.out_summary.as_ref(), |w| {
        write_summary(w, std::slice::from_ref(&record))
    })?;
    if let Some(p) = &cfg.out_trace {
        write_trace(create(p)?, &out.superframes)?;
    }
    if let Some(p) = &cfg.out_schedule {
        write_schedule_trace(create(p)?, &out.schedule_trace)?;
    }
    if let Some(p) = &cfg.out_graph {
        write_graph_trace(create(p)?, &out.graph_trace)?;
    }
    if !cfg.quiet {
        let s = &out.summary;
        eprintln!(
            "{} n={} flows={} seed={}: network {:.3e} bit/s, jain {}, mean group {:.2}",
            s.mode,
            cfg.pathloss,
            cfg.flows,
            cfg.seed,
            s.network_throughput_bps,
            s.jain_index.map_or("-".into(), |j| format!("{j:.3}")),
            s.mean_group_size
        );
    }
    Ok(())
}

/// Returns whether every cell succeeded.
fn cmd_sweep(m: &ArgMatches) -> Result<bool> {
    let base = resolve(m)?;
    let mut spec = if m.get_flag("reference") {
        SweepSpec::reference()
    } else {
        SweepSpec::from_base(&base)
    };
    if let Some(v) = m.get_one::<String>("sweep-flows") {
        spec.flows = parse_list("sweep-flows", v)?;
    }
    if let Some(v) = m.get_one::<String>("sweep-pathloss") {
        spec.pathloss = parse_list("sweep-pathloss", v)?;
    }
    if let Some(v) = m.get_one::<String>("sweep-seeds") {
        spec.seeds = parse_list("sweep-seeds", v)?;
    }
    if let Some(v) = m.get_one::<String>("sweep-modes") {
        spec.modes = parse_list::<Mode>("sweep-modes", v)?;
    }
    let outcome = run_sweep(&base, &spec)?;
    emit(base.out_summary.as_ref(), |w| write_summary(w, &outcome.records))?;
    for (cell, err) in &outcome.failures {
        eprintln!(
            "cell mode={} pathloss={} flows={} seed={} failed: {err}",
            cell.mode, cell.pathloss, cell.flows, cell.seed
        );
    }
    if !base.quiet {
        eprintln!("{} cells ok, {} failed", outcome.records.len(), outcome.failures.len());
    }
    Ok(outcome.failures.is_empty())
}

fn cmd_compare(m: &ArgMatches) -> Result<()> {
    let mut records = Vec::new();
    for path in m.get_many::<PathBuf>("summary").into_iter().flatten() {
        let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        records.extend(read_summary(file)?);
    }
    emit(m.get_one::<PathBuf>("out-ratios"), |w| {
        write_ratios(w, &pair_ratios(&records))
    })?;
    if let Some(p) = m.get_one::<PathBuf>("out-cells") {
        write_cells(create(p)?, &cell_table(&records))?;
    }
    if let Some(p) = m.get_one::<PathBuf>("out-fairness") {
        write_fairness(create(p)?, &fairness_table(&records))?;
    }
    Ok(())
}

fn cmd_dump_layout(m: &ArgMatches) -> Result<()> {
    let cfg = resolve(m)?;
    let state = prepare(&cfg.sim_config::<f64>()?)?;
    emit(m.get_one::<PathBuf>("out"), |w| state.layout().write_csv(w))
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let result = match matches.subcommand() {
        Some(("run", m)) => cmd_run(m).map(|_| true),
        Some(("sweep", m)) => cmd_sweep(m),
        Some(("compare", m)) => cmd_compare(m).map(|_| true),
        Some(("dump-layout", m)) => cmd_dump_layout(m).map(|_| true),
        _ => unreachable!("subcommand required"),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("wpan-cts: {e}");
            ExitCode::FAILURE
        }
    }
}
