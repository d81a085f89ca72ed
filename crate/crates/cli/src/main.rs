use clap::{Args, Parser, Subcommand, ValueEnum};
use nullrepair::harness::compare::compare;
use nullrepair::harness::corpus::read;
use nullrepair::harness::report::write_atomic;
use nullrepair::harness::{load_corpus, read_reports, run_case, run_corpus, CorpusCase, HarnessError};
use nullrepair::lang::compile;
use nullrepair::meta::transform::transform;
use nullrepair::repair::RepairConfig;
use nullrepair::strategy::Mode;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Null dereference repair by static templates or runtime hooks.
#[derive(Parser)]
#[command(name = "nullrepair", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repair the null dereference that makes a test fail.
    Repair {
        file: PathBuf,
        #[arg(long)]
        test: String,
        #[arg(long, value_enum, default_value = "both")]
        mode: ModeArg,
        /// JSON report; with `--mode both` the mode is added before the extension.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Operate on a corpus directory with a manifest.toml.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
    /// Print the instrumented program.
    ShowMetaprogram { file: PathBuf },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Run both modes on every case and print the comparison.
    Run {
        dir: PathBuf,
        /// Report directory [default: <dir>/reports].
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the reports found in a directory.
    Compare {
        dir: PathBuf,
        #[arg(long)]
        csv: bool,
        /// Include wall-clock columns.
        #[arg(long)]
        time: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = nullrepair::interp::DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, default_value_t = 3)]
    ctor_depth: u32,
    /// Directory receiving one diff per tentative patch.
    #[arg(long)]
    diff_dir: Option<PathBuf>,
    /// Print the dereference trace of the failing run to stderr.
    #[arg(long)]
    trace: bool,
}

impl Common {
    fn config(&self) -> RepairConfig {
        RepairConfig {
            budget: self.budget,
            ctor_depth: self.ctor_depth,
            trace: self.trace,
            ..RepairConfig::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Meta,
    Template,
    Both,
}

impl ModeArg {
    fn modes(self) -> Vec<Mode> {
        match self {
            ModeArg::Meta => vec![Mode::Meta],
            ModeArg::Template => vec![Mode::Template],
            ModeArg::Both => vec![Mode::Template, Mode::Meta],
        }
    }
}

enum Failure {
    Usage(String),
    Baseline(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::BaselineMismatch { .. } => Failure::Baseline(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Baseline(m)) => {
            eprintln!("baseline mismatch: {m}");
            ExitCode::from(2)
        }
    }
}

fn report_path_for(base: &Path, mode: Mode, both: bool) -> PathBuf {
    if !both {
        return base.to_path_buf();
    }
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = base.extension().map(|s| s.to_string_lossy().into_owned()).unwrap_or("json".into());
    base.with_file_name(format!("{stem}.{mode}.{ext}"))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Repair {
            file,
            test,
            mode,
            report,
            common,
        } => {
            let cfg = common.config();
            let bug_id = file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "bug".into());
            let case = CorpusCase::load(&bug_id, &file, &test, Vec::new(), &cfg)?;
            if common.trace {
                let base = nullrepair::repair::baseline(&case.tp, &test, &cfg)
                    .map_err(|e| Failure::Baseline(e.to_string()))?;
                for ev in &base.trace {
                    eprintln!("{}", serde_json::to_string(ev).expect("trace serializes"));
                }
            }
            let modes = mode.modes();
            for m in &modes {
                let r = run_case(&case, *m, &cfg, common.diff_dir.as_deref())?;
                println!(
                    "{} {}: {} tentative, {} valid, {} steps",
                    r.bug_id, r.mode, r.tentative, r.valid, r.steps
                );
                for d in &r.decisions {
                    println!("  {} {:<4} {:<24} {:<8} {}", d.id, d.strategy, d.param, outcome(d), d.verdict);
                }
                for f in &r.filtered_out {
                    println!("  filtered {} {} ({})", f.strategy, f.param, f.reason);
                }
                if let Some(base) = &report {
                    let path = report_path_for(base, *m, modes.len() > 1);
                    write_atomic(&path, &r.to_json())
                        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                }
            }
            Ok(())
        }
        Command::Corpus {
            command: CorpusCommand::Run { dir, report, common },
        } => {
            let cfg = common.config();
            let cases = load_corpus(&dir, &cfg)?;
            let report_dir = report.unwrap_or_else(|| dir.join("reports"));
            let diff_dir = common.diff_dir.clone().unwrap_or_else(|| report_dir.join("diffs"));
            let reports = run_corpus(&cases, &cfg, &report_dir, &diff_dir)?;
            print!("{}", compare(&reports).render(false));
            Ok(())
        }
        Command::Corpus {
            command: CorpusCommand::Compare { dir, csv, time },
        } => {
            let reports = read_reports(&dir)?;
            if reports.is_empty() {
                return Err(Failure::Usage(format!("no reports in {}", dir.display())));
            }
            let c = compare(&reports);
            if csv {
                print!("{}", c.to_csv());
            } else {
                print!("{}", c.render(time));
            }
            Ok(())
        }
        Command::ShowMetaprogram { file } => {
            let source = read(&file)?;
            let name = file.display().to_string();
            let tp = compile(&name, &source).map_err(|e| Failure::Usage(e.render(&name)))?;
            let mp = transform(&tp).map_err(|e| Failure::Usage(e.to_string()))?;
            print!("{}", mp.render());
            Ok(())
        }
    }
}

fn outcome(d: &nullrepair::harness::report::DecisionRecord) -> &'static str {
    match d.outcome {
        nullrepair::harness::report::Outcome::Valid => "valid",
        nullrepair::harness::report::Outcome::Invalid => "invalid",
    }
}
