use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use finindex::cli::{self, Scenario};
use finindex::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Parser, Debug)]
#[command(name = "finindex", version, about = "Index invariants and module generators of finite-dimensional inclusions")]
struct Cli {
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the analyses requested by a scenario file.
    Analyze { file: PathBuf },
    #[command(subcommand)]
    Demo(Demo),
    /// Re-run a scenario for each value of one parameter.
    Sweep {
        file: PathBuf,
        /// trace.i, weighted.i or slot.i.j.c
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
}

#[derive(Subcommand, Debug)]
enum Demo {
    /// Scalars inside M_n with the normalized trace.
    MatrixTrace {
        #[arg(long)]
        n: usize,
    },
    /// Diagonal M_n in M_n ⊕ M_n under traces (2^-k, 1 - 2^-k).
    JolissaintPopa {
        #[arg(long)]
        kmax: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
}

fn machine<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn render(cli: &Cli) -> Result<String, Error> {
    let text = matches!(cli.format, Format::Text);
    match &cli.command {
        Command::Analyze { file } => {
            let r = cli::run(&Scenario::from_path(file)?)?;
            Ok(if text { r.to_text() } else { r.to_machine() })
        }
        Command::Sweep { file, param, values } => {
            let base = Scenario::from_path(file)?;
            let r = cli::sweep(&base, param, &cli::sweep::parse_values(values)?)?;
            if !text {
                return Ok(machine(&r));
            }
            let mut out = format!("sweep {} over {}\n", r.scenario, r.param);
            for p in &r.points {
                out.push_str(&format!("{} = {}\n", r.param, p.value));
                out.push_str(&p.report.to_text());
            }
            Ok(out)
        }
        Command::Demo(Demo::MatrixTrace { n }) => {
            let start = std::time::Instant::now();
            let r = cli::matrix_trace(*n)?;
            if !text {
                return Ok(machine(&r));
            }
            let mut out = r.report.to_text();
            for a in &r.assertions {
                out.push_str(&format!("  assert {} ({})\n", a.name, a.detail));
            }
            out.push_str(&format!("demo wall time {:.1} ms\n", start.elapsed().as_secs_f64() * 1e3));
            Ok(out)
        }
        Command::Demo(Demo::JolissaintPopa { kmax, dim }) => {
            let start = std::time::Instant::now();
            let r = cli::jolissaint_popa(*kmax, *dim)?;
            if !text {
                return Ok(machine(&r));
            }
            let mut out = format!("diagonal M_{0} in M_{0} + M_{0}, k = 1..{1}\n", r.dim, r.k_max);
            out.push_str("   k          K(E_t)   Ind(E_t) sum        expected  Ind(E_min) sum  gens  min_gens\n");
            for p in &r.points {
                out.push_str(&format!(
                    "{:>4} {:>15} {:>14} {:>15} {:>15} {:>5} {:>9}\n",
                    p.k,
                    p.k_tr,
                    p.ind_tr_component_sum,
                    p.ind_tr_expected,
                    p.ind_min_component_sum,
                    p.generators_tr,
                    p.min_generators
                ));
            }
            out.push_str(&format!("{} assertions passed\n", r.assertions.len()));
            out.push_str(&format!("demo wall time {:.1} ms\n", start.elapsed().as_secs_f64() * 1e3));
            Ok(out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = render(&cli).and_then(|out| match &cli.out {
        Some(path) => std::fs::write(path, out).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{out}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
