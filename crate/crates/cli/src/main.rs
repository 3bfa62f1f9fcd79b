//! Command-line front end: point queries, grid sweeps, region maps, scheme
//! verification and placement emulation. Output is byte-deterministic for a
//! given set of flags and seeds.

mod output;

use clap::{Parser, Subcommand};
use ndtlab_core::bounds;
use ndtlab_core::closed_form;
use ndtlab_core::general::{self, NetworkShape};
use ndtlab_core::golden;
use ndtlab_core::placement;
use ndtlab_core::rat::Rat;
use ndtlab_core::report;
use ndtlab_core::schemes::{self, ChannelRealization, Scheme};
use ndtlab_core::{AntennaConfig, CachePoint, Error as CoreError};
use output::{float_str, rat_json};
use rayon::prelude::*;
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

/// Storage-latency analysis of the 3x3 cache-aided MIMO interference network.
#[derive(Parser)]
#[command(name = "ndtlab", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Achievable delivery time, lower bound, gap and sharing at one point.
    Ndt {
        /// Receiver cache size, rational ("1/3") or exact decimal ("0.25").
        #[arg(long)]
        mu_r: String,
        /// Transmitter cache size.
        #[arg(long)]
        mu_t: String,
        /// Antennas per transmitter (M).
        #[arg(long)]
        tx_ant: u32,
        /// Antennas per receiver (N).
        #[arg(long)]
        rx_ant: u32,
    },
    /// CSV sweep over the feasible cache grid.
    Sweep {
        #[arg(long)]
        tx_ant: u32,
        #[arg(long)]
        rx_ant: u32,
        /// Grid step in (0, 1/3].
        #[arg(long, default_value = "1/30")]
        step: String,
        /// Comma list from {upper, lower, gap, region}; default all.
        #[arg(long)]
        outputs: Option<String>,
        /// Emit exact rationals instead of floats.
        #[arg(long)]
        exact: bool,
    },
    /// CSV map of the active closed-form region per grid point.
    Regions {
        #[arg(long)]
        tx_ant: u32,
        #[arg(long)]
        rx_ant: u32,
        #[arg(long, default_value = "1/30")]
        step: String,
    },
    /// Certify one delivery scheme over seeded channel draws.
    VerifyScheme {
        /// Scheme name, e.g. full-coop-xm or x-multicast-q1.
        scheme: String,
        #[arg(long)]
        tx_ant: u32,
        #[arg(long)]
        rx_ant: u32,
        /// Number of consecutive seeds to run.
        #[arg(long, default_value_t = 50)]
        seeds: u64,
        /// Base seed; defaults to NDTLAB_SEED or 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Also run the tampered-precoder negative control.
        #[arg(long)]
        negative_control: bool,
    },
    /// Emulate placement and coded delivery, verifying reconstruction.
    Place {
        #[arg(long)]
        mu_r: String,
        #[arg(long)]
        mu_t: String,
        #[arg(long)]
        tx_ant: u32,
        #[arg(long)]
        rx_ant: u32,
        /// Library size L (>= 3).
        #[arg(long, default_value_t = 3)]
        files: usize,
        /// Bits per file.
        #[arg(long, default_value_t = 3000)]
        file_bits: u64,
        /// Demand vector: three 0-based file indices, e.g. 0,1,2.
        #[arg(long, default_value = "0,1,2")]
        demand: String,
        /// Library content seed; defaults to NDTLAB_SEED or 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Drop the k-th delivery group before verification.
        #[arg(long)]
        inject_drop: Option<usize>,
    },
    /// Bounds of the general network with --n-tx transmitters and --n-rx
    /// receivers.
    General {
        #[arg(long)]
        mu_r: String,
        #[arg(long)]
        mu_t: String,
        #[arg(long)]
        tx_ant: u32,
        #[arg(long)]
        rx_ant: u32,
        #[arg(long)]
        n_tx: u32,
        #[arg(long)]
        n_rx: u32,
    },
    /// Run the golden-value corpus.
    Golden {
        /// External corpus file (line-delimited JSON); default embedded.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

/// Failures mapped to exit codes: 1 for malformed values or failed
/// verification, 2 for domain errors (infeasible point, wrong corner, too
/// few files).
enum CmdError {
    Usage(String),
    Domain(String),
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InfeasibleCachePoint { .. }
            | CoreError::DimensionMismatch { .. }
            | CoreError::NothingToDeliver { .. }
            | CoreError::BudgetExceeded { .. } => CmdError::Domain(e.to_string()),
            other => CmdError::Usage(other.to_string()),
        }
    }
}

fn parse_rat(name: &str, s: &str) -> Result<Rat, CmdError> {
    Rat::parse(s).map_err(|e| CmdError::Usage(format!("--{name}: {e}")))
}

fn cache_point(mu_r: &str, mu_t: &str) -> Result<CachePoint, CmdError> {
    let r = parse_rat("mu-r", mu_r)?;
    let t = parse_rat("mu-t", mu_t)?;
    CachePoint::new(r, t).map_err(|e| CmdError::Usage(e.to_string()))
}

fn antenna(tx: u32, rx: u32) -> Result<AntennaConfig, CmdError> {
    AntennaConfig::new(tx, rx).map_err(|e| CmdError::Usage(e.to_string()))
}

fn default_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("NDTLAB_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(0)
}

fn grid(step: &Rat) -> Vec<Rat> {
    let mut out = Vec::new();
    let mut k = 0i64;
    loop {
        let v = Rat::int(k) * step;
        if v > Rat::one() {
            break;
        }
        out.push(v);
        k += 1;
    }
    out
}

fn run(cmd: Cmd) -> Result<(), CmdError> {
    match cmd {
        Cmd::Ndt { mu_r, mu_t, tx_ant, rx_ant } => {
            let p = cache_point(&mu_r, &mu_t)?;
            p.require_feasible().map_err(CmdError::from)?;
            let cfg = antenna(tx_ant, rx_ant)?;
            let rep = report::analyze(&p, &cfg)?;
            report::check_report(&rep).map_err(CmdError::from)?;
            let sharing: serde_json::Map<String, serde_json::Value> = rep
                .sharing
                .support()
                .map(|(pt, b)| (format!("{},{}", pt.m(), pt.n()), rat_json(b)))
                .collect();
            let per_group: serde_json::Map<String, serde_json::Value> = rep
                .per_group_ndt
                .iter()
                .map(|(pt, v)| (format!("{},{}", pt.m(), pt.n()), rat_json(v)))
                .collect();
            let gap = match &rep.gap {
                ndtlab_core::GapValue::Finite(v) => rat_json(v),
                ndtlab_core::GapValue::Infinite => json!("inf"),
            };
            let (case, region) = rep.active_piece.clone().unwrap_or((0, String::new()));
            let doc = json!({
                "mu_r": p.mu_r().to_string(),
                "mu_t": p.mu_t().to_string(),
                "tx_antennas": cfg.tx(),
                "rx_antennas": cfg.rx(),
                "tau_upper": rat_json(&rep.tau_upper),
                "tau_lower": rat_json(&rep.tau_lower),
                "gap": gap,
                "case": case,
                "region": region,
                "optimal": bounds::is_optimal_point(&p, &cfg)?,
                "sharing": sharing,
                "per_group_ndt": per_group,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
            Ok(())
        }
        Cmd::Sweep { tx_ant, rx_ant, step, outputs, exact } => {
            let cfg = antenna(tx_ant, rx_ant)?;
            let step = parse_rat("step", &step)?;
            if !step.is_positive() || step > Rat::new(1, 3) {
                return Err(CmdError::Usage(format!("--step {step} outside (0, 1/3]")));
            }
            let cols = parse_outputs(outputs.as_deref())?;
            let axis = grid(&step);
            let mut points = Vec::new();
            for r in &axis {
                for t in &axis {
                    let p = CachePoint::new(r.clone(), t.clone()).expect("grid in range");
                    if p.is_feasible() {
                        points.push(p);
                    }
                }
            }
            let rows: Vec<String> = points
                .par_iter()
                .map(|p| {
                    let rep = report::analyze(p, &cfg).expect("feasible grid point");
                    let gap = match &rep.gap {
                        ndtlab_core::GapValue::Finite(v) => render(v, exact),
                        ndtlab_core::GapValue::Infinite => "inf".to_string(),
                    };
                    let (case, region) = rep.active_piece.clone().unwrap_or_default();
                    let mut row = vec![
                        p.mu_r().to_string(),
                        p.mu_t().to_string(),
                        cfg.tx().to_string(),
                        cfg.rx().to_string(),
                    ];
                    if cols.upper {
                        row.push(render(&rep.tau_upper, exact));
                    }
                    if cols.lower {
                        row.push(render(&rep.tau_lower, exact));
                    }
                    if cols.gap {
                        row.push(gap);
                    }
                    if cols.region {
                        row.push(region);
                        row.push(case.to_string());
                    }
                    row.join(",")
                })
                .collect();
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            let mut header = vec!["mu_r", "mu_t", "M", "N"];
            if cols.upper {
                header.push("tau_upper");
            }
            if cols.lower {
                header.push("tau_lower");
            }
            if cols.gap {
                header.push("gap");
            }
            if cols.region {
                header.push("region");
                header.push("case");
            }
            writeln!(w, "{}", header.join(",")).expect("stdout");
            for row in rows {
                writeln!(w, "{row}").expect("stdout");
            }
            Ok(())
        }
        Cmd::Regions { tx_ant, rx_ant, step } => {
            let cfg = antenna(tx_ant, rx_ant)?;
            let step = parse_rat("step", &step)?;
            if !step.is_positive() || step > Rat::new(1, 3) {
                return Err(CmdError::Usage(format!("--step {step} outside (0, 1/3]")));
            }
            let axis = grid(&step);
            println!("mu_r,mu_t,M,N,case,region");
            for r in &axis {
                for t in &axis {
                    let p = CachePoint::new(r.clone(), t.clone()).expect("grid in range");
                    if !p.is_feasible() {
                        continue;
                    }
                    let (_, piece) = closed_form::closed_form_ndt(&p, &cfg)?;
                    println!(
                        "{},{},{},{},{},{}",
                        r,
                        t,
                        cfg.tx(),
                        cfg.rx(),
                        piece.case_id,
                        piece.region_label()
                    );
                }
            }
            Ok(())
        }
        Cmd::VerifyScheme { scheme, tx_ant, rx_ant, seeds, seed, negative_control } => {
            let s = Scheme::parse(&scheme)
                .ok_or_else(|| CmdError::Usage(format!("unknown scheme `{scheme}`")))?;
            let cfg = antenna(tx_ant, rx_ant)?;
            s.check_config(&cfg).map_err(CmdError::from)?;
            let base = default_seed(seed);
            let certs: Vec<_> = (base..base + seeds)
                .into_par_iter()
                .map(|sd| schemes::simulate(s, &ChannelRealization::draw(&cfg, sd)))
                .collect::<ndtlab_core::Result<_>>()?;
            let all_pass = certs.iter().all(|c| c.pass);
            let negative = if negative_control {
                let fails = (base..base + seeds)
                    .into_par_iter()
                    .map(|sd| {
                        schemes::simulate_corrupted(s, &ChannelRealization::draw(&cfg, sd))
                            .map(|c| !c.pass)
                    })
                    .collect::<ndtlab_core::Result<Vec<_>>>()?
                    .iter()
                    .filter(|&&b| b)
                    .count() as u64;
                Some(fails)
            } else {
                None
            };
            let doc = json!({
                "scheme": s.name(),
                "M": cfg.tx(),
                "N": cfg.rx(),
                "base_seed": base,
                "runs": seeds,
                "all_pass": all_pass,
                "streams_expected": schemes::expected_streams(s, &cfg).to_string(),
                "negative_control_failures": negative,
                "certificates": certs,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
            if all_pass {
                Ok(())
            } else {
                Err(CmdError::Usage("certificate failures".into()))
            }
        }
        Cmd::Place {
            mu_r,
            mu_t,
            tx_ant,
            rx_ant,
            files,
            file_bits,
            demand,
            seed,
            inject_drop,
        } => {
            let p = cache_point(&mu_r, &mu_t)?;
            p.require_feasible().map_err(CmdError::from)?;
            let cfg = antenna(tx_ant, rx_ant)?;
            if files < 3 {
                return Err(CmdError::Domain(format!(
                    "library needs at least 3 files, got {files}"
                )));
            }
            let demand = parse_demand(&demand, files)?;
            let lib = placement::Library::random(files, file_bits, default_seed(seed))
                .map_err(CmdError::from)?;
            let (_, sharing) = ndtlab_core::ndt::solve(&p, &cfg)?;
            let plan = placement::place(&lib, &sharing, file_bits)?;
            let mut delivery = placement::plan_delivery(&plan, demand)?;
            if let Some(k) = inject_drop {
                if k < delivery.groups.len() {
                    delivery.groups.remove(k);
                }
            }
            let outcome = placement::verify_reconstruction(&delivery, &plan, &lib, demand);
            let accounted = placement::accounted_ndt(&delivery, &plan, &cfg)?;
            let splitting_value =
                ndtlab_core::ndt::ndt_from_splitting(&sharing.to_splitting(), &cfg)?;
            let doc = json!({
                "mu_r": p.mu_r().to_string(),
                "mu_t": p.mu_t().to_string(),
                "tx_antennas": cfg.tx(),
                "rx_antennas": cfg.rx(),
                "files": files,
                "file_bits": file_bits,
                "demand": demand,
                "plan": plan,
                "delivery": delivery,
                "verdict": outcome.per_receiver,
                "missing": outcome.missing,
                "accounted_ndt": rat_json(&accounted),
                "splitting_ndt": rat_json(&splitting_value),
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
            if outcome.all_ok() {
                Ok(())
            } else {
                Err(CmdError::Usage("reconstruction failed".into()))
            }
        }
        Cmd::General { mu_r, mu_t, tx_ant, rx_ant, n_tx, n_rx } => {
            let p = cache_point(&mu_r, &mu_t)?;
            let cfg = antenna(tx_ant, rx_ant)?;
            let shape = NetworkShape::new(n_tx, n_rx).map_err(CmdError::from)?;
            let upper = general::general_upper_bound(&p, &cfg, &shape)?;
            let lower = general::general_lower_bound(&p, &cfg, &shape);
            let doc = json!({
                "mu_r": p.mu_r().to_string(),
                "mu_t": p.mu_t().to_string(),
                "tx_antennas": cfg.tx(),
                "rx_antennas": cfg.rx(),
                "n_tx": n_tx,
                "n_rx": n_rx,
                "tau_upper": rat_json(&upper),
                "tau_lower": rat_json(&lower),
                "dof_x": rat_json(&ndtlab_core::dof::general_dof_x(&cfg, n_tx, n_rx)),
                "dof_broadcast": rat_json(&ndtlab_core::dof::general_dof_broadcast(&cfg, n_tx, n_rx)),
                "optimal": general::general_optimality(&p, &cfg, &shape)?,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
            Ok(())
        }
        Cmd::Golden { corpus } => {
            let records = match corpus {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| {
                        CmdError::Usage(format!("cannot read {}: {e}", path.display()))
                    })?;
                    golden::parse_corpus(&text)?
                }
                None => golden::parse_corpus(golden::EMBEDDED_CORPUS)?,
            };
            let summary = golden::run_suite(&records);
            for f in &summary.failures {
                println!("FAIL {}: {}", f.id, f.detail);
            }
            println!("golden: {}/{} passed", summary.passed, summary.total);
            if summary.all_passed() {
                Ok(())
            } else {
                Err(CmdError::Usage("golden corpus failures".into()))
            }
        }
    }
}

struct SweepColumns {
    upper: bool,
    lower: bool,
    gap: bool,
    region: bool,
}

fn parse_outputs(spec: Option<&str>) -> Result<SweepColumns, CmdError> {
    let mut cols = SweepColumns { upper: false, lower: false, gap: false, region: false };
    match spec {
        None => Ok(SweepColumns { upper: true, lower: true, gap: true, region: true }),
        Some(s) => {
            for item in s.split(',') {
                match item.trim() {
                    "upper" => cols.upper = true,
                    "lower" => cols.lower = true,
                    "gap" => cols.gap = true,
                    "region" => cols.region = true,
                    other => {
                        return Err(CmdError::Usage(format!(
                            "--outputs: unknown column `{other}`"
                        )))
                    }
                }
            }
            Ok(cols)
        }
    }
}

fn parse_demand(s: &str, num_files: usize) -> Result<[usize; 3], CmdError> {
    let items: Vec<&str> = s.split(',').collect();
    if items.len() != 3 {
        return Err(CmdError::Usage(format!(
            "--demand needs exactly 3 comma-separated indices, got `{s}`"
        )));
    }
    let mut out = [0usize; 3];
    for (i, item) in items.iter().enumerate() {
        let v: usize = item
            .trim()
            .parse()
            .map_err(|_| CmdError::Usage(format!("--demand: bad index `{item}`")))?;
        if v >= num_files {
            return Err(CmdError::Domain(format!(
                "demand index {v} out of range for {num_files} files"
            )));
        }
        out[i] = v;
    }
    Ok(out)
}

fn render(v: &Rat, exact: bool) -> String {
    if exact {
        v.to_string()
    } else {
        float_str(v.to_f64())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CmdError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
