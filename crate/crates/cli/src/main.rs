use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;

use levy_triple::joint_cpdf::Method;
use levy_triple::oracle::{McConfig, Sampler};
use levy_triple_cli::config::{self, Format, GridSpec};
use levy_triple_cli::{output, BenchCase, CliError, Overrides};

#[derive(Parser)]
#[command(name = "levy-triple", version, about = "Joint law of a Levy process, its supremum and the time of the supremum")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate V(a1, a2; T, t) on the grid of a config file.
    Run(RunArgs),
    /// Compare methods and tolerances against the stored benchmark lattice.
    Bench(BenchArgs),
    /// Monte Carlo (and Brownian closed-form) spot checks on a config grid.
    Oracle(OracleArgs),
    /// Dump Wiener-Hopf factors and the identity residual on a real grid.
    WhfDump(WhfArgs),
}

fn method(s: &str) -> Result<Method, String> {
    Method::parse(s).map_err(|e| e.to_string())
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_parser = method)]
    method: Option<Method>,
    #[arg(long)]
    ne: Option<f64>,
    #[arg(long)]
    ne_whf: Option<f64>,
    #[arg(long)]
    dh: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output file (stdout if absent); the sidecar goes to <out>.scheme.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Md,
    Csv,
    Json,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "1.2")]
    nu: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = method, default_value = "sinh")]
    method: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "8")]
    ne: Vec<f64>,
    /// Defaults to ne + 2.
    #[arg(long)]
    ne_whf: Option<f64>,
    #[arg(long, default_value_t = 3.125e-5)]
    dh: f64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "md")]
    format: ReportFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerArg {
    Gaussian,
    CdfInversion,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_enum)]
    sampler: Option<SamplerArg>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct WhfArgs {
    /// Config whose model block is used.
    #[arg(long)]
    config: PathBuf,
    /// Laplace variable, `re` or `re+imi`; repeatable.
    #[arg(long = "q", value_parser = complex, default_value = "1")]
    q: Vec<C64>,
    /// Real xi grid, `start:step:stop`.
    #[arg(long, default_value = "-20:0.5:20", allow_hyphen_values = true)]
    xi: String,
    #[arg(long, default_value_t = 12.0)]
    ne_whf: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn complex(s: &str) -> Result<C64, String> {
    let s = s.trim();
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|x| C64::new(x, 0.0)).map_err(|e| e.to_string());
    };
    let cut = body
        .char_indices()
        .skip(1)
        .filter(|&(i, c)| (c == '+' || c == '-') && !body[..i].ends_with(['e', 'E']))
        .last()
        .map(|(i, _)| i)
        .ok_or_else(|| format!("cannot parse `{s}`"))?;
    let re = body[..cut].parse::<f64>().map_err(|e| e.to_string())?;
    let im = match &body[cut..] {
        "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|e| e.to_string())?,
    };
    Ok(C64::new(re, im))
}

fn execute(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Run(a) => {
            let mut cfg = config::load(&a.config)?;
            Overrides {
                method: a.method,
                ne: a.ne,
                ne_whf: a.ne_whf,
                dh: a.dh,
                threads: a.threads,
                out: a.out,
                format: a.format,
            }
            .apply(&mut cfg);
            levy_triple_cli::run(cfg)
        }
        Command::Bench(a) => {
            levy_triple_cli::set_threads(a.threads);
            let mut cases = Vec::new();
            for &nu in &a.nu {
                for &m in &a.method {
                    for &ne in &a.ne {
                        cases.push(BenchCase {
                            nu,
                            method: m,
                            ne,
                            ne_whf: a.ne_whf.unwrap_or(ne + 2.0),
                            dh: a.dh,
                        });
                    }
                }
            }
            let rows = levy_triple_cli::bench(&cases)?;
            match a.format {
                ReportFormat::Md => {
                    let text = output::bench_markdown(&rows);
                    match &a.out {
                        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
                        None => {
                            print!("{text}");
                            Ok(())
                        }
                    }
                }
                ReportFormat::Csv => output::write_table(&rows, Format::Csv, a.out.as_deref()),
                ReportFormat::Json => output::write_table(&rows, Format::Json, a.out.as_deref()),
            }
        }
        Command::Oracle(a) => {
            let cfg = config::load(&a.config)?;
            let r = cfg.resolve()?;
            levy_triple_cli::set_threads(a.threads.unwrap_or(r.config.threads));
            let d = McConfig::default();
            let mc = McConfig {
                n_steps: a.steps.unwrap_or(d.n_steps),
                n_paths: a.paths.unwrap_or(d.n_paths),
                seed: a.seed.unwrap_or(d.seed),
                sampler: match a.sampler {
                    Some(SamplerArg::Gaussian) => Sampler::Gaussian,
                    Some(SamplerArg::CdfInversion) => Sampler::CdfInversion,
                    None => d.sampler,
                },
            };
            let rows = levy_triple_cli::oracle(&r, &mc)?;
            output::write_table(&rows, a.format.unwrap_or(r.config.output.format), a.out.as_deref())
        }
        Command::WhfDump(a) => {
            let cfg = config::load(&a.config)?;
            let model = cfg.model.build()?;
            let xi = GridSpec::Range(a.xi).expand("xi")?;
            let rows = levy_triple_cli::whf_dump(&model, &a.q, &xi, a.ne_whf)?;
            output::write_table(&rows, a.format, a.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(complex("3").unwrap(), C64::new(3.0, 0.0));
        assert_eq!(complex("10+25i").unwrap(), C64::new(10.0, 25.0));
        assert_eq!(complex("1e-1-2i").unwrap(), C64::new(0.1, -2.0));
        assert_eq!(complex("2+i").unwrap(), C64::new(2.0, 1.0));
        assert!(complex("abc").is_err());
    }
}
