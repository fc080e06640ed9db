use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use kserver::harness::{run_campaign, verify_anchored_properties, CampaignConfig, VerifyOptions};
use kserver::{generate_instance, opt_trace, run_wfa, Alpha, CheckId, Error, Instance, RequestModel};

/// Exit statuses. They never overlap.
mod exit {
    pub const OK: u8 = 0;
    pub const CHECK_FAILURE: u8 = 1;
    pub const INPUT_ERROR: u8 = 2;
    pub const INCONCLUSIVE: u8 = 3;
    pub const IO_ERROR: u8 = 4;
}

fn check_help() -> String {
    let mut text = String::from("Checks run by `verify` and `campaign`:\n");
    for id in CheckId::ALL {
        text.push_str(&format!("  {:<4} {}\n", id.to_string(), id.describe()));
    }
    text.push_str(
        "\nExit codes: 0 ok, 1 check failure, 2 input error, 3 inconclusive (R1 undecided within the beta cap), \
         4 I/O error.",
    );
    text
}

#[derive(Parser)]
#[command(
    name = "kserver",
    version,
    about = "k-server testbed: Work Function Algorithm, offline optimum, anchored checks"
)]
#[command(after_help = check_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Uniform,
    #[value(name = "roundrobin_k_plus_1")]
    RoundRobin,
    #[value(name = "greedy_adversary")]
    Greedy,
}

impl From<Model> for RequestModel {
    fn from(m: Model) -> Self {
        match m {
            Model::Uniform => RequestModel::Uniform,
            Model::RoundRobin => RequestModel::RoundRobinKPlus1,
            Model::Greedy => RequestModel::GreedyAdversary,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Wfa,
    Opt,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance and write it as JSON.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long = "rho-len")]
        rho_len: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long = "request-model", value_enum, default_value = "uniform")]
        request_model: Model,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve an instance with the Work Function Algorithm or the offline optimum; prints the total cost.
    Run {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long = "trace-out")]
        trace_out: Option<PathBuf>,
    },
    /// Run every anchored check on one instance.
    #[command(after_help = check_help())]
    Verify {
        #[arg(long)]
        instance: PathBuf,
        /// Assumed competitive ratio: a positive integer or `2k-1`.
        #[arg(long, default_value = "2k-1")]
        alpha: Alpha,
        /// Initial additive constant used to size the anchor.
        #[arg(long, default_value_t = 0)]
        beta: u64,
        #[arg(long, default_value_t = 3)]
        q: usize,
        #[arg(long = "report-out")]
        report_out: Option<PathBuf>,
        /// Escalation of beta stops once it exceeds this multiple of ell.
        #[arg(long = "beta-cap-factor", default_value_t = 1 << 20)]
        beta_cap_factor: u64,
    },
    /// Run a campaign described by a JSON config and write the CSV report.
    #[command(after_help = check_help())]
    Campaign {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the full per-instance reports as JSON.
        #[arg(long = "report-json")]
        report_json: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) => exit::IO_ERROR,
                Error::Csv(ref c) if c.is_io_error() => exit::IO_ERROR,
                _ => exit::INPUT_ERROR,
            })
        }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write(path: &Path, contents: &str) -> Result<(), Error> {
    fs::write(path, contents).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn execute(command: Command) -> Result<u8, Error> {
    match command {
        Command::Gen {
            n,
            k,
            rho_len,
            seed,
            request_model,
            out,
        } => {
            let inst = generate_instance(n, k, rho_len, seed, request_model.into())?;
            write(&out, &inst.to_json())?;
            Ok(exit::OK)
        }
        Command::Run {
            instance,
            algo,
            trace_out,
        } => {
            let inst = Instance::from_json(&read(&instance)?)?;
            let trace = match algo {
                Algo::Wfa => run_wfa(&inst)?,
                Algo::Opt => opt_trace(&inst, None)?,
            };
            println!("{}", trace.total_cost);
            if let Some(path) = trace_out {
                write(&path, &trace.to_json())?;
            }
            Ok(exit::OK)
        }
        Command::Verify {
            instance,
            alpha,
            beta,
            q,
            report_out,
            beta_cap_factor,
        } => {
            let inst = Instance::from_json(&read(&instance)?)?;
            let options = VerifyOptions {
                beta_cap_factor,
                ..VerifyOptions::default()
            };
            let report = verify_anchored_properties(&inst, alpha.resolve(inst.k()), beta, q, &options)?;
            for c in &report.checks {
                println!(
                    "{:<4} {:<12} {} vs {}",
                    c.id.to_string(),
                    c.status.to_string(),
                    c.lhs,
                    c.rhs
                );
                if let Some(w) = &c.witness {
                    println!("     {w}");
                }
            }
            if let Some(path) = report_out {
                write(&path, &report.to_json())?;
            }
            Ok(if report.all_pass() {
                exit::OK
            } else if report.inconclusive()
                && report
                    .checks
                    .iter()
                    .all(|c| c.id == CheckId::R1 || c.status == kserver::Status::Pass)
            {
                exit::INCONCLUSIVE
            } else {
                exit::CHECK_FAILURE
            })
        }
        Command::Campaign {
            config,
            out,
            report_json,
        } => {
            let config = CampaignConfig::from_json(&read(&config)?)?;
            let report = run_campaign(&config)?;
            write(&out, &report.to_csv_string())?;
            if let Some(path) = report_json {
                write(&path, &serde_json::to_string_pretty(&report)?)?;
            }
            let failing = report.rows().iter().filter(|r| !row_passes(r)).count();
            println!("{} instances, {} failing", report.len(), failing);
            Ok(if report.all_pass() {
                exit::OK
            } else {
                exit::CHECK_FAILURE
            })
        }
    }
}

fn row_passes(row: &kserver::harness::CampaignRow) -> bool {
    use kserver::Status::Pass;
    [
        row.P1,
        row.E1,
        row.C1a,
        row.C1b,
        row.C2,
        row.E2,
        row.E3,
        row.R1,
        row.T1,
        row.ratio_pass,
    ]
    .iter()
    .all(|&s| s == Pass)
}
