//! Command-line front end.
//!
//! Every subcommand reads a family spec, runs one library operation, and
//! emits CSV or JSON. Identical invocations produce identical bytes;
//! randomness enters only through `--seed`, and a stochastic command
//! without a seed is a usage error. `GIBBSLAB_THREADS` caps the worker
//! count where independent checks run concurrently.

pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::canonical::{
    canonical_joint, canonical_marginal, efron_check_threaded, proposition_order_check,
    ComparisonMode,
};
use crate::chains::bd::DEFAULT_COUPLED_SOLVE_CAP;
use crate::chains::sim::DEFAULT_EVENT_CAP;
use crate::chains::zr::coupled_zr_simulate;
use crate::chains::{
    coupled_bd_stationary, simulate, CoupledBirthDeathChain, CoupledZeroRangeChain, ZeroRangeSpec,
};
use crate::error::{Error, Result};
use crate::family::Family;
use crate::gcp::{gcp_experiment, sandwich_check, GcpOptions, Mode};
use crate::interval::IntInterval;
use crate::pmf::check_log_concave;
use crate::sumstats::{condition_check, sum_law};
use output::{csv_text, fmt_f64, json_text, write_text, Format};

#[derive(Debug, Parser)]
#[command(name = "gibbslab", version, about = "Exact tilted, conditioned and coupled distributions for independent integer-valued random variables")]
pub struct Cli {
    /// Log progress to stderr.
    #[arg(long, global = true, conflicts_with = "quiet")]
    pub verbose: bool,
    /// Suppress all stderr logging.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct FamilyArg {
    /// Path to the family spec JSON.
    #[arg(long)]
    pub family: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Log-concavity reports for every member of the family pool.
    CheckLogconcave {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tilt one member and print its pmf.
    Tilt {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long)]
        lambda: f64,
        /// Member index (cycles the pool).
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact law of S_n under a tilt (CSV: k,prob).
    Sumdist {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long)]
        lambda: f64,
        #[arg(short = 'n', long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cumulant-gap divergence diagnostic along a grid of n values.
    CondCheck {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long)]
        lambda_star: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Comma-separated n values.
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fixed-sum conditional: a member's marginal, or the dense joint.
    Canonical {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(short = 'n', long)]
        n: usize,
        #[arg(short = 'k', long)]
        k: i64,
        /// Member whose conditional marginal is printed.
        #[arg(long, conflicts_with = "joint")]
        index: Option<usize>,
        /// Print the full joint table instead of a marginal.
        #[arg(long)]
        joint: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Consecutive-sum dominance verdicts for the fixed-sum conditionals.
    Efron {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(short = 'n', long)]
        n: usize,
        #[arg(long)]
        k_max: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dominance between two tilted conditionals around a threshold.
    Dominance {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        lambda2: f64,
        #[arg(short = 'n', long)]
        n: usize,
        #[arg(long)]
        r: f64,
        #[arg(long, value_enum)]
        mode: ComparisonMode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coupled birth-death chain: stationary solve or simulation.
    CoupleBd {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        lambda2: f64,
        /// Interval as lo:hi.
        #[arg(long, value_parser = parse_interval)]
        interval: IntInterval,
        /// Member whose pmf drives the death rates.
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, conflicts_with = "simulate")]
        solve: bool,
        #[arg(long)]
        simulate: bool,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_EVENT_CAP)]
        event_cap: usize,
        /// Dense-solve cap on the interval length.
        #[arg(long, default_value_t = DEFAULT_COUPLED_SOLVE_CAP)]
        max_interval: usize,
        /// Initial states for the simulation (default: both at lo).
        #[arg(long)]
        init: Option<i64>,
        #[arg(long)]
        init2: Option<i64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coupled particle system simulation (CSV trace).
    CoupleZr {
        #[command(flatten)]
        family: FamilyArg,
        /// Number of sites (uses the first n members' rate functions).
        #[arg(short = 'n', long)]
        n: usize,
        /// Particles of the first copy, stacked onto the leading sites.
        #[arg(short = 'k', long)]
        k: u64,
        /// Particles of the second copy (>= k).
        #[arg(long)]
        k2: u64,
        #[arg(long)]
        t_end: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_EVENT_CAP)]
        event_cap: usize,
        /// Allow non-nondecreasing rate functions (order not guaranteed).
        #[arg(long)]
        allow_non_monotone: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Total-variation convergence of conditioned laws (CSV + JSON sidecar).
    Gcp {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long)]
        lambda_star: f64,
        #[arg(long, default_value_t = 1)]
        ell: usize,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
        /// Offset for the cumulant-gap diagnostic.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Tilt of the conditioned variables (default 1: base variables).
        #[arg(long, default_value_t = 1.0)]
        condition_lambda: f64,
        /// Skip the mode/lambda_star hypothesis validation.
        #[arg(long)]
        force: bool,
        /// Recorded in the sidecar; the experiment itself is exact.
        #[arg(long)]
        seed: Option<u64>,
        /// CSV output path; the diagnostic sidecar lands next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Bracket a conditioned base law between tilted conditioned laws.
    Sandwich {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long)]
        lambda_star: f64,
        #[arg(long)]
        lambda_lo: f64,
        #[arg(long)]
        lambda_hi: f64,
        #[arg(long, default_value_t = 1)]
        ell: usize,
        #[arg(short = 'n', long)]
        n: usize,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_interval(text: &str) -> std::result::Result<IntInterval, String> {
    IntInterval::parse_colon(text).ok_or_else(|| format!("expected lo:hi with lo <= hi, got `{text}`"))
}

/// Worker cap from GIBBSLAB_THREADS; defaults to the machine parallelism.
fn worker_threads() -> usize {
    std::env::var("GIBBSLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

struct Logger {
    verbose: bool,
    quiet: bool,
}

impl Logger {
    fn info(&self, msg: &str) {
        if self.verbose && !self.quiet {
            eprintln!("gibbslab: {msg}");
        }
    }
}

/// Parse argv and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own message; usage problems exit 2.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let logger = Logger {
        verbose: cli.verbose,
        quiet: cli.quiet,
    };
    match dispatch(cli.command, &logger) {
        Ok(()) => 0,
        Err(err) => {
            let payload = serde_json::json!({
                "error": {
                    "kind": error_kind(&err),
                    "message": err.to_string(),
                }
            });
            eprintln!("{payload}");
            1
        }
    }
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::InvalidDistribution(_) => "InvalidDistribution",
        Error::InvalidParameter(_) => "InvalidParameter",
        Error::EmptyCondition { .. } => "EmptyCondition",
        Error::TargetUnreachable { .. } => "TargetUnreachable",
        Error::InstanceTooLarge(_) => "InstanceTooLarge",
        Error::InvalidInput(_) => "InvalidInput",
        Error::MonotonicityUnavailable(_) => "MonotonicityUnavailable",
        Error::Internal(_) => "Internal",
        Error::Io { .. } => "Io",
        Error::FamilySpec { .. } => "SchemaError",
    }
}

#[derive(Serialize)]
struct PmfReport {
    index: usize,
    lambda: f64,
    x: Vec<usize>,
    prob: Vec<f64>,
}

fn pmf_csv(p: &crate::pmf::Pmf) -> String {
    csv_text(
        "x,prob",
        (0..p.len()).map(|x| vec![x.to_string(), fmt_f64(p.prob(x))]),
    )
}

#[derive(Serialize)]
struct DominanceReport {
    holds: bool,
    flow: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    violation: Option<crate::canonical::UpsetCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness_pairs: Option<usize>,
}

impl From<crate::canonical::DominanceResult> for DominanceReport {
    fn from(res: crate::canonical::DominanceResult) -> Self {
        DominanceReport {
            holds: res.holds,
            flow: res.flow,
            violation: res.violation,
            witness_pairs: res.witness_coupling.map(|w| w.len()),
        }
    }
}

fn dispatch(cmd: Command, log: &Logger) -> Result<()> {
    match cmd {
        Command::CheckLogconcave { family, out } => {
            let fam = Family::load(&family.family)?;
            #[derive(Serialize)]
            struct Entry {
                index: usize,
                #[serde(flatten)]
                report: crate::pmf::LogConcavityReport,
            }
            let entries: Vec<Entry> = (0..fam.pool_len())
                .map(|i| Entry {
                    index: i,
                    report: check_log_concave(fam.member(i)),
                })
                .collect();
            write_text(out.as_deref(), &json_text(&entries)?)
        }
        Command::Tilt {
            family,
            lambda,
            index,
            format,
            out,
        } => {
            let fam = Family::load(&family.family)?;
            let tilted = fam.tilted_member(index, lambda)?;
            log.info(&format!("tilted member {index} by {lambda}"));
            let text = match format {
                Format::Csv => pmf_csv(&tilted),
                Format::Json => json_text(&PmfReport {
                    index,
                    lambda,
                    x: (0..tilted.len()).collect(),
                    prob: (0..tilted.len()).map(|x| tilted.prob(x)).collect(),
                })?,
            };
            write_text(out.as_deref(), &text)
        }
        Command::Sumdist {
            family,
            lambda,
            n,
            out,
        } => {
            let fam = Family::load(&family.family)?;
            let law = sum_law(&fam, lambda, n)?;
            let text = csv_text(
                "k,prob",
                (0..=law.k_max()).map(|k| vec![k.to_string(), fmt_f64(law.prob(k as i64))]),
            );
            write_text(out.as_deref(), &text)
        }
        Command::CondCheck {
            family,
            lambda_star,
            eps,
            n_list,
            out,
        } => {
            let fam = Family::load(&family.family)?;
            let trend = condition_check(&fam, lambda_star, eps, &n_list)?;
            write_text(out.as_deref(), &json_text(&trend)?)
        }
        Command::Canonical {
            family,
            n,
            k,
            index,
            joint,
            format,
            out,
        } => {
            let fam = Family::load(&family.family)?;
            if joint {
                let table = canonical_joint(&fam, n, k)?;
                #[derive(Serialize)]
                struct JointReport {
                    n: usize,
                    k: i64,
                    dims: Vec<usize>,
                    configs: Vec<Vec<usize>>,
                    prob: Vec<f64>,
                }
                let mut configs = Vec::new();
                let mut prob = Vec::new();
                for idx in 0..table.num_configs() {
                    let lp = table.log_probs()[idx];
                    if lp > f64::NEG_INFINITY {
                        configs.push(table.config_of(idx));
                        prob.push(lp.exp());
                    }
                }
                let rep = JointReport {
                    n,
                    k,
                    dims: table.dims().to_vec(),
                    configs,
                    prob,
                };
                match format {
                    Format::Json => write_text(out.as_deref(), &json_text(&rep)?),
                    Format::Csv => {
                        let rows = rep.configs.iter().zip(&rep.prob).map(|(c, p)| {
                            let mut row: Vec<String> =
                                c.iter().map(|x| x.to_string()).collect();
                            row.push(fmt_f64(*p));
                            row
                        });
                        let header: String = (1..=n)
                            .map(|i| format!("x_{i}"))
                            .chain(["prob".to_string()])
                            .collect::<Vec<_>>()
                            .join(",");
                        write_text(out.as_deref(), &csv_text(&header, rows))
                    }
                }
            } else {
                let i = index.unwrap_or(0);
                let marg = canonical_marginal(&fam, i, n, k)?;
                let text = match format {
                    Format::Csv => pmf_csv(&marg),
                    Format::Json => json_text(&PmfReport {
                        index: i,
                        lambda: 1.0,
                        x: (0..marg.len()).collect(),
                        prob: (0..marg.len()).map(|x| marg.prob(x)).collect(),
                    })?,
                };
                write_text(out.as_deref(), &text)
            }
        }
        Command::Efron {
            family,
            n,
            k_max,
            out,
        } => {
            let fam = Family::load(&family.family)?;
            let threads = worker_threads();
            log.info(&format!("efron check with {threads} worker(s)"));
            let rep = efron_check_threaded(&fam, n, k_max, threads)?;
            write_text(out.as_deref(), &json_text(&rep)?)
        }
        Command::Dominance {
            family,
            lambda,
            lambda2,
            n,
            r,
            mode,
            out,
        } => {
            let fam = Family::load(&family.family)?;
            let res = proposition_order_check(&fam, lambda, lambda2, n, r, mode)?;
            write_text(out.as_deref(), &json_text(&DominanceReport::from(res))?)
        }
        Command::CoupleBd {
            family,
            lambda,
            lambda2,
            interval,
            index,
            solve,
            simulate: do_sim,
            t_end,
            seed,
            event_cap,
            max_interval,
            init,
            init2,
            format,
            out,
        } => {
            let fam = Family::load(&family.family)?;
            let base = fam.member(index).clone();
            let chain = CoupledBirthDeathChain::new(base, lambda, lambda2, interval)?;
            if !solve && !do_sim {
                return Err(Error::InvalidParameter(
                    "pass --solve or --simulate".into(),
                ));
            }
            if solve {
                let st = coupled_bd_stationary(&chain, max_interval)?;
                #[derive(Serialize)]
                struct SolveReport {
                    lambda: f64,
                    lambda2: f64,
                    lo: i64,
                    hi: i64,
                    mass_unordered: f64,
                    marginal_first: Vec<f64>,
                    marginal_second: Vec<f64>,
                    states: Vec<(i64, i64, f64)>,
                }
                let mut states = Vec::new();
                for k in interval.iter() {
                    for kp in interval.iter() {
                        let p = st.prob(k, kp);
                        if p > 0.0 {
                            states.push((k, kp, p));
                        }
                    }
                }
                let rep = SolveReport {
                    lambda,
                    lambda2,
                    lo: interval.lo(),
                    hi: interval.hi(),
                    mass_unordered: st.mass_unordered,
                    marginal_first: st.marginal_first,
                    marginal_second: st.marginal_second,
                    states,
                };
                match format {
                    Format::Json => write_text(out.as_deref(), &json_text(&rep)?),
                    Format::Csv => {
                        let rows = rep.states.iter().map(|(k, kp, p)| {
                            vec![k.to_string(), kp.to_string(), fmt_f64(*p)]
                        });
                        write_text(out.as_deref(), &csv_text("k,kp,prob", rows))
                    }
                }
            } else {
                let seed = seed.ok_or_else(|| {
                    Error::InvalidParameter(
                        "--simulate is stochastic and requires --seed".into(),
                    )
                })?;
                let t_end = t_end.unwrap_or(1e4);
                let k0 = init.unwrap_or(interval.lo());
                let k0p = init2.unwrap_or(k0);
                if !(interval.contains(k0) && interval.contains(k0p) && k0 <= k0p) {
                    return Err(Error::InvalidParameter(format!(
                        "initial pair ({k0}, {k0p}) must be ordered inside {interval}"
                    )));
                }
                let trace = simulate(&chain, (k0, k0p), t_end, seed, event_cap);
                log.info(&format!(
                    "simulated {} events (cap_hit: {})",
                    trace.n_events(),
                    trace.cap_hit
                ));
                let rows = trace.events.iter().map(|(t, (k, kp))| {
                    vec![fmt_f64(*t), k.to_string(), kp.to_string()]
                });
                write_text(out.as_deref(), &csv_text("time,k,kp", rows))
            }
        }
        Command::CoupleZr {
            family,
            n,
            k,
            k2,
            t_end,
            seed,
            event_cap,
            allow_non_monotone,
            out,
        } => {
            let fam = Family::load(&family.family)?;
            let seed = seed.ok_or_else(|| {
                Error::InvalidParameter("couple-zr is stochastic and requires --seed".into())
            })?;
            if k2 < k {
                return Err(Error::InvalidParameter(format!(
                    "need k <= k2 for an ordered start, got {k} > {k2}"
                )));
            }
            let spec = ZeroRangeSpec::from_family(&fam, n)?;
            let chain = CoupledZeroRangeChain::new(spec, allow_non_monotone)?;
            let x0 = chain.spec.stacked_initial(k)?;
            let x0p = chain.spec.stacked_initial(k2)?;
            let (trace, violations) =
                coupled_zr_simulate(&chain, x0, x0p, t_end, seed, 0, event_cap)?;
            log.info(&format!(
                "simulated {} events, {} order violations",
                trace.n_events(),
                violations
            ));
            let header: String = ["time".to_string()]
                .into_iter()
                .chain((1..=n).map(|i| format!("x_{i}")))
                .chain((1..=n).map(|i| format!("xp_{i}")))
                .collect::<Vec<_>>()
                .join(",");
            let rows = trace.events.iter().map(|(t, (x, xp))| {
                let mut row = vec![fmt_f64(*t)];
                row.extend(x.iter().map(|v| v.to_string()));
                row.extend(xp.iter().map(|v| v.to_string()));
                row
            });
            write_text(out.as_deref(), &csv_text(&header, rows))
        }
        Command::Gcp {
            family,
            lambda_star,
            ell,
            mode,
            n_list,
            eps,
            condition_lambda,
            force,
            seed,
            out,
        } => {
            let fam = Family::load(&family.family)?;
            let rep = gcp_experiment(
                &fam,
                lambda_star,
                ell,
                &n_list,
                mode,
                GcpOptions {
                    condition_lambda,
                    force,
                    eps,
                },
            )?;
            let rows = rep.rows.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    fmt_f64(r.r_star),
                    fmt_f64(r.event_mass),
                    fmt_f64(r.tv),
                ]
            });
            write_text(Some(&out), &csv_text("n,r_star,event_mass,tv", rows))?;
            #[derive(Serialize)]
            struct Sidecar<'a> {
                lambda_star: f64,
                ell: usize,
                mode: Mode,
                condition_lambda: f64,
                #[serde(skip_serializing_if = "Option::is_none")]
                seed: Option<u64>,
                condition: &'a crate::sumstats::ConditionTrend,
            }
            let sidecar = Sidecar {
                lambda_star,
                ell,
                mode,
                condition_lambda,
                seed,
                condition: &rep.condition,
            };
            let sidecar_path = out.with_extension("cond.json");
            log.info(&format!("diagnostic sidecar at {}", sidecar_path.display()));
            write_text(Some(&sidecar_path), &json_text(&sidecar)?)
        }
        Command::Sandwich {
            family,
            lambda_star,
            lambda_lo,
            lambda_hi,
            ell,
            n,
            mode,
            out,
        } => {
            let fam = Family::load(&family.family)?;
            let rep = sandwich_check(&fam, lambda_star, lambda_lo, lambda_hi, ell, n, mode)?;
            write_text(out.as_deref(), &json_text(&rep)?)
        }
    }
}

/// Everything the spec calls a run configuration is carried by the parsed
/// [`Cli`] value; this alias keeps the name searchable.
pub type RunConfig = Cli;
