use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hetsgd::exec::with_threads;
use hetsgd::harness::lbcheck::all_suites;
use hetsgd::harness::{sweep, ExperimentConfig};
use hetsgd::logreg::{cache, Corpus, IdxDataset};
use hetsgd::rates::{eval_bound, rate_table, BoundName, BoundParams, BoundSpec, ConstantMode};
use hetsgd::{Error, Execution};

#[derive(Parser)]
#[command(name = "hetsgd", version, about = "Intermittent-communication SGD simulator and rate toolkit")]
struct Cli {
    /// Worker threads (0 = all cores). Changes speed only, never results.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Emit CSV
    #[arg(long, global = true, conflicts_with = "json")]
    csv: bool,
    /// Emit JSON
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct ExpArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides master_seed from the config
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a config that describes a single cell
    Run(ExpArgs),
    /// Run every cell of a config's grid
    Sweep(ExpArgs),
    /// Evaluate rate bounds (JSON by default; --table for the comparison table as CSV)
    Bounds {
        /// Inline JSON object or path to one, with keys (H, B, Delta, lambda, sigma, sigma_star, zeta_star, zeta_bar, M, K, R, S);
        /// all ones when omitted
        #[arg(long)]
        params: Option<String>,
        #[arg(long)]
        table: bool,
        /// Report the formulas with a symbolic constant instead of 1
        #[arg(long)]
        symbolic: bool,
    },
    /// Verification suites for the lower-bound constructions
    LbCheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dataset preparation
    #[command(subcommand)]
    Data(DataCmd),
}

#[derive(Subcommand)]
enum DataCmd {
    /// Convert IDX images and labels into a PCA-reduced cache
    Prep {
        #[arg(long)]
        idx_images: PathBuf,
        #[arg(long)]
        idx_labels: PathBuf,
        #[arg(long, default_value_t = 100)]
        pca: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the Gaussian-blob surrogate corpus
    Synth {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        per_digit: usize,
        #[arg(long, default_value_t = 196)]
        dim: usize,
        #[arg(long)]
        pca: Option<usize>,
        #[arg(long, default_value = "data.bin")]
        out: PathBuf,
    },
}

enum Failure {
    Lib(Error),
    Check(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

fn emit(out: Option<&Path>, file: &str, text: &str) -> Result<(), Failure> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(file), text)?;
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn load(args: &ExpArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    Ok(cfg)
}

fn out_dir(args: &ExpArgs, cfg: &ExperimentConfig) -> Option<PathBuf> {
    args.out.clone().or_else(|| cfg.output.dir.clone())
}

fn stem(cfg: &ExperimentConfig) -> String {
    cfg.output.stem.clone().unwrap_or_else(|| cfg.label())
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    match &cli.cmd {
        Cmd::Run(args) | Cmd::Sweep(args) => {
            let cfg = load(args)?;
            let single = matches!(cli.cmd, Cmd::Run(_));
            if single {
                let variants: usize = cfg.algorithms.iter().map(|a| a.variants().len()).sum();
                if variants * cfg.geometries().len() != 1 {
                    return Err(Error::Config("`run` needs a config with exactly one cell; use `sweep`".into()).into());
                }
            }
            let res = sweep::sweep(&cfg, Execution::Parallel)?;
            let dir = out_dir(args, &cfg);
            let name = stem(&cfg);
            if cli.json {
                let text = if single {
                    serde_json::to_string_pretty(&res.results).expect("results serialize")
                } else {
                    res.to_json()
                };
                emit(dir.as_deref(), &format!("{name}.json"), &text)?;
            } else {
                emit(dir.as_deref(), &format!("{name}.csv"), &res.to_csv()?)?;
            }
            Ok(())
        }
        Cmd::Bounds { params, table, symbolic } => {
            let p: BoundParams = match params {
                Some(arg) => {
                    let text = if arg.trim_start().starts_with('{') {
                        arg.clone()
                    } else {
                        fs::read_to_string(arg).map_err(|e| Error::Config(format!("cannot read {arg}: {e}")))?
                    };
                    serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
                }
                None => BoundParams::ones(),
            };
            p.validate()?;
            let mode = if *symbolic { ConstantMode::Symbolic } else { ConstantMode::Unit };
            if *table || cli.csv {
                let mut wr = csv::Writer::from_writer(std::io::stdout());
                wr.write_record(["name", "setting", "constant", "value", "formula"])
                    .map_err(Error::from)?;
                for row in rate_table(&p, mode) {
                    let v = row.value.map(|v| v.to_string()).unwrap_or_default();
                    wr.write_record([&row.name, &row.setting, &row.constant, &v, &row.formula])
                        .map_err(Error::from)?;
                }
                wr.flush()?;
            } else {
                let vals: Vec<serde_json::Value> = BoundName::ALL
                    .iter()
                    .map(|&n| {
                        let v = eval_bound(&BoundSpec { name: n, constant_mode: mode }, &p);
                        serde_json::json!({
                            "name": n.as_str(),
                            "value": v.as_ref().ok(),
                            "error": v.as_ref().err().map(|e| e.to_string()),
                            "formula": n.formula(),
                        })
                    })
                    .collect();
                let text = serde_json::to_string_pretty(&vals).expect("json") + "\n";
                emit(None, "", &text)?;
            }
            Ok(())
        }
        Cmd::LbCheck { seed, out } => {
            let checks = all_suites(*seed)?;
            let text = if cli.json {
                serde_json::to_string_pretty(&checks).expect("json")
            } else {
                let mut s = String::new();
                for c in &checks {
                    let tag = if c.passed { "PASS" } else { "FAIL" };
                    s.push_str(&format!("{tag} {}: {} ({})\n", c.suite, c.name, c.detail));
                }
                s
            };
            emit(out.as_deref(), if cli.json { "lb_check.json" } else { "lb_check.txt" }, &text)?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(Failure::Check(failed));
            }
            Ok(())
        }
        Cmd::Data(DataCmd::Prep {
            idx_images,
            idx_labels,
            pca,
            out,
        }) => {
            let ds = IdxDataset::from_bytes(&fs::read(idx_images)?, &fs::read(idx_labels)?)?;
            let corpus = Corpus::from_idx(&ds, Some(*pca))?;
            write_corpus(&corpus, out)
        }
        Cmd::Data(DataCmd::Synth {
            seed,
            per_digit,
            dim,
            pca,
            out,
        }) => {
            if *per_digit == 0 || *dim == 0 {
                return Err(Error::Config("per-digit count and dimension must be positive".into()).into());
            }
            let corpus = hetsgd::logreg::synth_corpus(*seed, *per_digit, *dim).reduced(*pca)?;
            write_corpus(&corpus, out)
        }
    }
}

fn write_corpus(c: &Corpus, out: &Path) -> Result<(), Failure> {
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    cache::write_cache(c, std::io::BufWriter::new(fs::File::create(out)?))?;
    eprintln!("wrote {} rows x {} features to {}", c.len(), c.dim, out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match with_threads(cli.threads, || execute(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
        Err(Failure::Check(n)) => {
            eprintln!("{n} check(s) failed");
            ExitCode::from(3)
        }
    }
}
