//! `ansb` — command-line front end: dataset generation, single-instance
//! solving with trace output, benchmark evaluation, ablations, and trace
//! inspection. Every command is deterministic given (config, seed).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ansb_core::bench::{
    evaluate, make_questions, run_ablation, solve_instance, QAInstance, SystemVariant, Tier,
    TierSpec,
};
use ansb_core::compiler::{parse_question, Document, Question};
use ansb_core::evidential::ProviderConfig;
use ansb_core::orchestrator::{read_trace_records, write_trace_jsonl};
use ansb_core::RunConfig;

#[derive(Parser)]
#[command(
    name = "ansb",
    version,
    about = "Neuro-symbolic temporal QA over Allen-algebra event graphs"
)]
struct Cli {
    /// JSON run configuration; defaults to ANSB_CONFIG when set.
    #[arg(long, global = true, env = "ANSB_CONFIG")]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the evidence provider: rule_based | noisy | remote.
    #[arg(long, global = true)]
    provider: Option<String>,
    /// Remote extractor endpoint (implies --provider remote).
    #[arg(long, global = true)]
    endpoint: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a tiered QA dataset as JSON Lines.
    Generate {
        #[arg(long)]
        tier: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one instance (or an inline context + question), writing a trace.
    Solve {
        /// A QAInstance JSON file (first line of a dataset works).
        #[arg(long, conflicts_with_all = ["context", "question"])]
        instance: Option<PathBuf>,
        /// Plain-text context: one statement per line.
        #[arg(long, requires = "question")]
        context: Option<PathBuf>,
        /// Question text, e.g. "does alpha happen before bravo?".
        #[arg(long)]
        question: Option<String>,
        /// Trace output path (JSON Lines).
        #[arg(long)]
        out: Option<PathBuf>,
        /// System variant to run.
        #[arg(long, default_value = "full_pis")]
        variant: String,
    },
    /// Evaluate a dataset under a system variant.
    Bench {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "full_pis")]
        variant: String,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        parallel: Option<usize>,
        /// Write the JSON diagnostics report here as well.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the ablation matrix and emit CSV.
    Ablate {
        /// Comma-separated tiers.
        #[arg(long, default_value = "semi")]
        tiers: String,
        /// Comma-separated seeds.
        #[arg(long, default_value = "1,2,3")]
        seeds: String,
        /// Instances per seed.
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long)]
        parallel: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pretty-print a trace file.
    InspectTrace {
        #[arg(long)]
        trace: PathBuf,
    },
}

enum CliError {
    /// Bad input from the user: exit code 2.
    Usage(String),
    /// Runtime failure: exit code 1.
    Runtime(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(|e| CliError::Usage(e.to_string()))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.mcts.seed = seed;
    }
    match (cli.provider.as_deref(), cli.endpoint.as_deref()) {
        (_, Some(endpoint)) => {
            cfg.provider = ProviderConfig::Remote {
                endpoint: endpoint.to_string(),
                timeout_ms: 2000,
            };
        }
        (Some("rule_based"), None) => cfg.provider = ProviderConfig::RuleBased,
        (Some("noisy"), None) => {
            if !matches!(cfg.provider, ProviderConfig::Noisy { .. }) {
                cfg.provider = ProviderConfig::Noisy { flip_prob: 0.15 };
            }
        }
        (Some("remote"), None) => {
            if !matches!(cfg.provider, ProviderConfig::Remote { .. }) {
                return Err(CliError::Usage(
                    "--provider remote requires --endpoint".to_string(),
                ));
            }
        }
        (Some(other), None) => {
            return Err(CliError::Usage(format!("unknown provider `{other}`")));
        }
        (None, None) => {}
    }
    Ok(cfg)
}

fn parse_tier(name: &str) -> Result<Tier, CliError> {
    Tier::from_name(name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown tier `{name}` (expected structured|semi|unstructured)"
        ))
    })
}

fn parse_variant(name: &str) -> Result<SystemVariant, CliError> {
    SystemVariant::from_name(name).map_err(|e| CliError::Usage(e.to_string()))
}

fn parallelism(requested: Option<usize>) -> usize {
    requested.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Generate { tier, n, out } => cmd_generate(&cfg, tier, *n, out),
        Command::Solve {
            instance,
            context,
            question,
            out,
            variant,
        } => cmd_solve(
            &cfg,
            instance.as_deref(),
            context.as_deref(),
            question.as_deref(),
            out.as_deref(),
            variant,
        ),
        Command::Bench {
            dataset,
            variant,
            parallel,
            out,
        } => cmd_bench(&cfg, dataset, variant, parallelism(*parallel), out.as_deref()),
        Command::Ablate {
            tiers,
            seeds,
            n,
            parallel,
            out,
        } => cmd_ablate(&cfg, tiers, seeds, *n, parallelism(*parallel), out.as_deref()),
        Command::InspectTrace { trace } => cmd_inspect_trace(trace),
    }
}

fn cmd_generate(cfg: &RunConfig, tier: &str, n: usize, out: &Path) -> Result<(), CliError> {
    let tier = parse_tier(tier)?;
    let spec = TierSpec::defaults(tier);
    let instances = make_questions(&spec, cfg.seed, n)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut writer = BufWriter::new(File::create(out)?);
    for inst in &instances {
        serde_json::to_writer(&mut writer, inst).map_err(|e| CliError::Runtime(e.to_string()))?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    println!(
        "wrote {} {tier} instances (seed {}) to {}",
        instances.len(),
        cfg.seed,
        out.display()
    );
    Ok(())
}

fn read_dataset(path: &Path) -> Result<Vec<QAInstance>, CliError> {
    let file = File::open(path)?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let inst: QAInstance = serde_json::from_str(&line).map_err(|e| {
            CliError::Usage(format!(
                "{}: line {}: {e}",
                path.display(),
                lineno + 1
            ))
        })?;
        out.push(inst);
    }
    if out.is_empty() {
        return Err(CliError::Usage(format!("{}: empty dataset", path.display())));
    }
    Ok(out)
}

fn cmd_solve(
    cfg: &RunConfig,
    instance: Option<&Path>,
    context: Option<&Path>,
    question: Option<&str>,
    out: Option<&Path>,
    variant: &str,
) -> Result<(), CliError> {
    let variant = parse_variant(variant)?;
    let instance = match (instance, context, question) {
        (Some(path), _, _) => read_dataset(path)?.remove(0),
        (None, Some(ctx_path), Some(q_text)) => {
            let text = std::fs::read_to_string(ctx_path)?;
            let sentences: Vec<String> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_string)
                .collect();
            let question: Question = parse_question(q_text)
                .ok_or_else(|| CliError::Usage(format!("cannot parse question `{q_text}`")))?;
            QAInstance {
                id: "inline-0000".to_string(),
                tier: Tier::Structured,
                context: vec![Document {
                    id: "inline".to_string(),
                    tier: "inline".to_string(),
                    sentences,
                }],
                question,
                gold: ansb_core::bench::GoldAnswer::Binary(false), // unused for solve
            }
        }
        _ => {
            return Err(CliError::Usage(
                "solve needs --instance FILE or --context FILE --question TEXT".to_string(),
            ))
        }
    };

    let result = solve_instance(&instance, cfg, variant);
    let verdict = result.answer.verdict;
    let (j_pis, repairs, trace_bb) = match &result.search {
        Some(s) => (
            s.j_pis,
            s.bb.repair_log.clone(),
            Some(&s.bb),
        ),
        None => (0.0, Vec::new(), None),
    };
    println!("verdict: {verdict}");
    println!("credal:  {}", result.answer.supporting_credal);
    println!("j_pis:   {j_pis}");
    if repairs.is_empty() {
        println!("repairs: none");
    } else {
        for r in &repairs {
            println!(
                "repairs: {:?} {} -> {:?}",
                r.kind, r.target, r.outcome
            );
        }
    }
    if let Some(bb) = trace_bb {
        let path = out
            .map(Path::to_path_buf)
            .or_else(|| cfg.paths.output.clone())
            .unwrap_or_else(|| PathBuf::from("trace.jsonl"));
        let mut writer = BufWriter::new(File::create(&path)?);
        write_trace_jsonl(bb, j_pis, cfg.seed, &mut writer)?;
        writer.flush()?;
        println!("trace:   {}", path.display());
    }
    Ok(())
}

fn cmd_bench(
    cfg: &RunConfig,
    dataset: &Path,
    variant: &str,
    parallel: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let variant = parse_variant(variant)?;
    let instances = read_dataset(dataset)?;
    let diag = evaluate(variant, &instances, cfg, parallel);
    print!("{}", diag.render_table());
    let json =
        serde_json::to_string_pretty(&diag).map_err(|e| CliError::Runtime(e.to_string()))?;
    if let Some(path) = out {
        std::fs::write(path, format!("{json}\n"))?;
        println!("report: {}", path.display());
    } else {
        println!("{json}");
    }
    Ok(())
}

fn cmd_ablate(
    cfg: &RunConfig,
    tiers: &str,
    seeds: &str,
    n: usize,
    parallel: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let tiers: Vec<Tier> = tiers
        .split(',')
        .map(|t| parse_tier(t.trim()))
        .collect::<Result<_, _>>()?;
    let seeds: Vec<u64> = seeds
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Usage(format!("bad seed `{s}`")))
        })
        .collect::<Result<_, _>>()?;
    if seeds.is_empty() || n == 0 {
        return Err(CliError::Usage("need at least one seed and n >= 1".to_string()));
    }
    let table = run_ablation(&tiers, &SystemVariant::ABLATIONS, &seeds, cfg, n, parallel)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let csv = table.to_csv();
    print!("{csv}");
    if let Some(path) = out {
        std::fs::write(path, &csv)?;
        println!("table: {}", path.display());
    }
    Ok(())
}

fn cmd_inspect_trace(trace: &Path) -> Result<(), CliError> {
    let file = File::open(trace)?;
    let (steps, summary) = read_trace_records(BufReader::new(file))
        .map_err(|e| CliError::Usage(format!("{}: {e}", trace.display())))?;
    println!(
        "{:>3} {:<17} {:<34} {:>8} {:>15} {:>9} {:>6}  {:<18} {}",
        "k", "kind", "conclusion", "l_inc", "credal", "epistemic", "psi", "cause", "repair"
    );
    for s in &steps {
        let kind = format!("{:?}", s.kind);
        let conclusion = format!(
            "{} {} {}",
            s.conclusion.src, s.conclusion.relations, s.conclusion.dst
        );
        let repair = s
            .repair
            .as_ref()
            .map(|r| format!("{:?}:{:?}", r.kind, r.outcome))
            .unwrap_or_else(|| "-".to_string());
        println!(
            "{:>3} {:<17} {:<34} {:>8.4} {:>15} {:>9.4} {:>6.3}  {:<18} {}",
            s.k,
            kind,
            truncate(&conclusion, 34),
            s.l_inc,
            format!("{}", s.credal),
            s.epistemic,
            s.psi,
            s.cause,
            repair
        );
    }
    match summary {
        Some(sum) => println!(
            "summary: j_pis={} verdict={} seed={}",
            sum.j_pis, sum.verdict, sum.seed
        ),
        None => println!("summary: missing"),
    }
    Ok(())
}

fn truncate(s: &str, n: usize) -> String {
    if s.len() <= n {
        s.to_string()
    } else {
        format!("{}…", &s[..n.saturating_sub(1)])
    }
}
