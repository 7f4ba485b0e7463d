use clap::{Parser, Subcommand};
use magsep_cli::commands::{self, CommandOutput, EXIT_RUNTIME, EXIT_USAGE};
use magsep_cli::config::RunConfig;
use std::collections::BTreeMap;
use std::path::PathBuf;

const SEED_ENV: &str = "MAGSEP_SEED";

#[derive(Parser)]
#[command(
    name = "magsep",
    version,
    about = "Catalog, verification and trajectory tools for 3D systems in magnetic fields separating in Cartesian coordinates"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the catalog entries
    List {
        /// Output format: table or json
        #[arg(long, default_value = "table")]
        format: String,
    },
    /// Run the verification suite (brackets, determining equations, drift,
    /// rank) for one entry
    Verify {
        /// Catalog entry id (may come from --config instead)
        entry: Option<String>,
        /// Config file (sections [system], [params], [run]); flags override
        #[arg(long)]
        config: Option<PathBuf>,
        /// Parameter override, repeatable
        #[arg(long = "param", value_name = "K=V")]
        param: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of sample points for residual checks
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        rel_tol: Option<f64>,
        #[arg(long)]
        abs_tol: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        /// Also write the report to this file (atomically)
        #[arg(long)]
        output: Option<PathBuf>,
        /// Trajectory batch parallelism
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Negative control: rebuild the system with one parameter shifted
        /// while keeping the unperturbed integrals (W aliases the entry's
        /// potential-strength parameter)
        #[arg(long, value_name = "FIELD:+DELTA")]
        perturb: Option<String>,
    },
    /// Integrate one seeded trajectory and export CSV
    Integrate {
        entry: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "param", value_name = "K=V")]
        param: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of sample times (rows)
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        rel_tol: Option<f64>,
        #[arg(long)]
        abs_tol: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        /// CSV destination (stdout if omitted); written atomically
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check a canonical reduction of an entry
    Reduce {
        entry: String,
        /// One of: caseI-kappa, prop32, sec8
        kind: String,
        #[arg(long = "param", value_name = "K=V")]
        param: Vec<String>,
        /// Conserved-momentum value for caseI-kappa
        #[arg(long, default_value_t = 0.0)]
        kappa: f64,
        /// Shorthand for --param gamma=V (prop32)
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = magsep::sample::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
}

fn parse_params(pairs: &[String]) -> Result<BTreeMap<String, f64>, String> {
    let mut out = BTreeMap::new();
    for pair in pairs {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| format!("bad --param {pair:?} (expected k=v)"))?;
        let v: f64 = v
            .parse()
            .map_err(|_| format!("bad --param value in {pair:?}"))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

/// Merge config file, CLI flags and the seed environment variable into a
/// RunConfig.  Returns the config and a report suffix when the seed came
/// from the environment.
#[allow(clippy::too_many_arguments)]
fn build_config(
    entry: Option<String>,
    config: Option<PathBuf>,
    param: Vec<String>,
    seed: Option<u64>,
    points: Option<usize>,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    t_end: Option<f64>,
    output: Option<PathBuf>,
) -> Result<(RunConfig, Option<String>), String> {
    let mut cfg = match config {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            RunConfig::from_text(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(e) = entry {
        cfg.entry = e;
    }
    if cfg.entry.is_empty() {
        return Err("missing entry id (positional argument or config file)".into());
    }
    cfg.params.extend(parse_params(&param)?);
    let mut seed_note = None;
    match seed {
        Some(s) => cfg.seed = s,
        None => {
            if let Ok(env_seed) = std::env::var(SEED_ENV) {
                let s: u64 = env_seed
                    .parse()
                    .map_err(|_| format!("bad {SEED_ENV} value {env_seed:?}"))?;
                cfg.seed = s;
                seed_note = Some(format!(" (from {SEED_ENV})"));
            }
        }
    }
    if let Some(v) = points {
        cfg.points = v;
    }
    if let Some(v) = rel_tol {
        cfg.rel_tol = v;
    }
    if let Some(v) = abs_tol {
        cfg.abs_tol = v;
    }
    if let Some(v) = t_end {
        cfg.t_end = v;
    }
    if let Some(v) = output {
        cfg.output = Some(v.display().to_string());
    }
    Ok((cfg, seed_note))
}

fn emit(out: CommandOutput) -> i32 {
    if let Some((path, contents)) = &out.file {
        if let Err(e) = magsep_cli::write_atomic(std::path::Path::new(path), contents) {
            eprintln!("error: cannot write {path}: {e}");
            return EXIT_RUNTIME;
        }
    }
    if out.code == 0 || out.code == 1 {
        print!("{}", out.text);
    } else {
        eprint!("{}", out.text);
    }
    out.code
}

fn run(cli: Cli) -> i32 {
    match cli.cmd {
        Cmd::List { format } => emit(commands::cmd_list(&format)),
        Cmd::Verify {
            entry,
            config,
            param,
            seed,
            points,
            rel_tol,
            abs_tol,
            t_end,
            output,
            jobs,
            perturb,
        } => match build_config(
            entry, config, param, seed, points, rel_tol, abs_tol, t_end, output,
        ) {
            Ok((cfg, note)) => emit(commands::cmd_verify(
                &cfg,
                perturb.as_deref(),
                jobs.max(1),
                note.as_deref(),
            )),
            Err(m) => {
                eprintln!("error: {m}");
                EXIT_USAGE
            }
        },
        Cmd::Integrate {
            entry,
            config,
            param,
            seed,
            points,
            rel_tol,
            abs_tol,
            t_end,
            output,
        } => match build_config(
            entry, config, param, seed, points, rel_tol, abs_tol, t_end, output,
        ) {
            Ok((cfg, note)) => {
                // bare-CSV mode keeps stdout machine-readable, so the seed
                // echo goes to stderr
                if let (Some(n), None) = (&note, &cfg.output) {
                    eprintln!("seed {}{}", cfg.seed, n);
                }
                emit(commands::cmd_integrate(&cfg, note.as_deref()))
            }
            Err(m) => {
                eprintln!("error: {m}");
                EXIT_USAGE
            }
        },
        Cmd::Reduce {
            entry,
            kind,
            param,
            kappa,
            gamma,
            seed,
            points,
        } => {
            let mut params = match parse_params(&param) {
                Ok(p) => p,
                Err(m) => {
                    eprintln!("error: {m}");
                    return EXIT_USAGE;
                }
            };
            if let Some(g) = gamma {
                params.insert("gamma".into(), g);
            }
            emit(commands::cmd_reduce(&entry, &kind, &params, kappa, seed, points))
        }
    }
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli));
}
