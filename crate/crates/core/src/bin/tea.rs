use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;

use tea::baseline::random_search;
use tea::config::{to_toml, Overrides};
use tea::encoding::{encode, read_banded, read_prices_csv, Antigen, CategorySeq};
use tea::engine::{ExperimentSpec, PoolAction, PresentationPhase, RunRng};
use tea::matching::{enumerate_trends, trend_counts};
use tea::memory::MemoryPool;
use tea::population::PoolConfig;
use tea::report::{detection_table, label_of, population_series, write_json};
use tea::{fixtures, presets, run_batch, run_experiment_with_memory, Error, Result, RunStats};

/// Trend evaluation with a self-regulating tracker population.
#[derive(Parser, Debug)]
#[command(name = "tea", version)]
struct Cli {
    /// TOML file of `key = value` pool overrides.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Print the effective pool configuration and exit.
    #[arg(long, global = true)]
    show_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List every trend of an antigen with its occurrence count.
    Oracle {
        /// A, A1, A2, or comma-separated category values.
        antigen: String,
    },
    /// Run a built-in experiment over several seeds.
    Run(RunArgs),
    /// Bind one random population per size and seed against an antigen.
    RandomSearch(SearchArgs),
    /// Encode a price series and run a single presentation over it.
    Detect(DetectArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(presets::PRESET_NAMES))]
    preset: String,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for CSV/JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_shortening: bool,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long = "population-size", default_values_t = [1000, 4000, 10000, 20000])]
    population_size: Vec<usize>,
    /// A, A1, A2, or comma-separated category values.
    #[arg(long, default_value = "A")]
    antigen: String,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DetectArgs {
    /// CSV of `timestamp,close` rows with a header, or with `--banded` a
    /// single comma-separated row of price changes.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    band_width: f64,
    /// Input holds price changes rather than prices.
    #[arg(long)]
    banded: bool,
    /// Total generations; defaults to 50 or the series length if longer.
    #[arg(long)]
    generations: Option<u32>,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Memory snapshot to start from; the pool is then seeded from it.
    #[arg(long)]
    memory_in: Option<PathBuf>,
    /// Where to write the final memory of the first run.
    #[arg(long)]
    memory_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_antigen(text: &str) -> Result<Antigen> {
    if let Some(a) = fixtures::antigen(text) {
        return Ok(a);
    }
    let seq: CategorySeq = text.parse()?;
    if seq.is_empty() {
        return Err(Error::EmptyInput("antigen".into()));
    }
    Ok(Antigen::new("input", seq))
}

fn base_config(command: &Option<Command>) -> PoolConfig {
    match command {
        Some(Command::Detect(d)) => PoolConfig::with_band_width(d.band_width),
        Some(Command::Run(_)) | Some(Command::RandomSearch(_)) => presets::preset_config(),
        _ => PoolConfig::default(),
    }
}

fn out_dir(dir: &Option<PathBuf>) -> Result<Option<&Path>> {
    if let Some(d) = dir {
        fs::create_dir_all(d)?;
    }
    Ok(dir.as_deref())
}

fn oracle(antigen: &str) -> Result<()> {
    let a = parse_antigen(antigen)?;
    let mut out = io::stdout().lock();
    writeln!(out, "antigen {} {}", a.label, a.seq)?;
    let counts = trend_counts(&a.seq);
    for (trend, n) in &counts {
        writeln!(out, "{:<6} {:<24} {n}", label_of(trend), trend.to_string())?;
    }
    writeln!(out, "{} trends", counts.len())?;
    Ok(())
}

fn write_runs(dir: &Path, runs: &[RunStats], truth: &tea::TrendSet) -> Result<()> {
    let table = detection_table(runs, truth)?;
    table.write_csv(fs::File::create(dir.join("detection.csv"))?)?;
    write_json(&dir.join("detection.json"), &table)?;
    let series = population_series(runs);
    series.write_csv(fs::File::create(dir.join("series.csv"))?)?;
    write_json(&dir.join("series.json"), &series)?;
    for r in runs {
        fs::write(dir.join(format!("memory_seed{}.txt", r.seed)), r.memory.to_rows())?;
    }
    Ok(())
}

fn print_runs(runs: &[RunStats], truth: &tea::TrendSet) -> Result<()> {
    let table = detection_table(runs, truth)?;
    let peak = runs.iter().map(|r| r.max_pool_size()).max().unwrap_or(0);
    let created = runs.iter().map(|r| r.trackers_created).sum::<u64>() as f64 / runs.len() as f64;
    let mut out = io::stdout().lock();
    writeln!(out, "{table}")?;
    writeln!(out, "peak pool         {peak}")?;
    writeln!(out, "trackers per run  {created:.1}")?;
    Ok(())
}

fn run(args: &RunArgs, mut config: PoolConfig) -> Result<()> {
    let spec = presets::preset(&args.preset).expect("clap restricts preset names");
    if args.no_shortening {
        config.shortening_enabled = false;
    }
    let runs = run_batch(&spec, &config, args.runs, args.seed)?;
    println!("{} over {} runs from seed {}", spec.name, args.runs, args.seed);
    print_runs(&runs, &spec.truth)?;
    if let Some(dir) = out_dir(&args.out)? {
        write_runs(dir, &runs, &spec.truth)?;
        fs::write(dir.join("config.toml"), to_toml(&config))?;
    }
    Ok(())
}

fn search(args: &SearchArgs, config: PoolConfig) -> Result<()> {
    if args.runs < 1 {
        return Err(Error::Argument("--runs must be at least 1".into()));
    }
    let antigen = parse_antigen(&args.antigen)?;
    let truth = enumerate_trends(&antigen.seq);
    let mut rows = Vec::new();
    let mut out = io::stdout().lock();
    writeln!(out, "{:>10} {:<8} per-trend detections", "size", "mean")?;
    for &size in &args.population_size {
        let mut per_trend = vec![0usize; truth.len()];
        let mut total = 0;
        for i in 0..args.runs as u64 {
            let seed = args.seed + i;
            let mut rng = RunRng::seed_from_u64(seed);
            let r = random_search(&antigen, size, &config, &mut rng)?;
            for (k, t) in truth.iter().enumerate() {
                per_trend[k] += usize::from(r.detected.contains(t));
            }
            total += r.detected.len();
            let labels: Vec<String> = r.detected.iter().map(label_of).collect();
            rows.push([size.to_string(), seed.to_string(), r.detected.len().to_string(), labels.join(" ")]);
        }
        let detail: Vec<String> =
            truth.iter().zip(&per_trend).map(|(t, n)| format!("{}={n}", label_of(t))).collect();
        writeln!(out, "{:>10} {:<8.2} {}", size, total as f64 / args.runs as f64, detail.join(" "))?;
    }
    if let Some(dir) = out_dir(&args.out)? {
        let mut w = csv::Writer::from_path(dir.join("random_search.csv"))?;
        w.write_record(["population_size", "seed", "detected", "trends"])?;
        for r in &rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn detect(args: &DetectArgs, config: PoolConfig) -> Result<()> {
    let file = fs::File::open(&args.input)?;
    let antigen = if args.banded {
        let raw = read_banded(file)?;
        let seq =
            raw.iter().map(|c| tea::band(c.value(), args.band_width)).collect::<Result<CategorySeq>>()?;
        Antigen::new("input", seq)
    } else {
        encode(&read_prices_csv(file)?, args.band_width)?
    };
    let memory = match &args.memory_in {
        Some(p) => MemoryPool::from_rows(&fs::read_to_string(p)?, "memory-in")?,
        None => MemoryPool::new(),
    };
    let action = if args.memory_in.is_some() { PoolAction::FeedbackFromMemory } else { PoolAction::None };
    let len = antigen.len() as u32;
    let spec = ExperimentSpec {
        name: "detect".into(),
        truth: enumerate_trends(&antigen.seq),
        phases: vec![PresentationPhase::incremental(1, antigen, action)],
        total_generations: args.generations.unwrap_or(len.max(50)),
    };
    spec.validate()?;
    if args.runs < 1 {
        return Err(Error::Argument("--runs must be at least 1".into()));
    }
    let runs = (0..args.runs as u64)
        .map(|i| run_experiment_with_memory(&spec, &config, args.seed + i, memory.clone()))
        .collect::<Result<Vec<_>>>()?;
    println!("{} values, {} trends", len, spec.truth.len());
    if !spec.truth.is_empty() {
        print_runs(&runs, &spec.truth)?;
    }
    if let Some(p) = &args.memory_out {
        fs::write(p, runs[0].memory.to_rows())?;
    }
    if let Some(dir) = out_dir(&args.out)? {
        write_runs(dir, &runs, &spec.truth)?;
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = real_main(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn real_main(cli: Cli) -> Result<()> {
    let base = base_config(&cli.command);
    let config = match &cli.config {
        Some(p) => Overrides::load(p)?.apply(&base)?,
        None => {
            base.validate()?;
            base
        }
    };
    if cli.show_config {
        print!("{}", to_toml(&config));
        return Ok(());
    }
    match &cli.command {
        Some(Command::Oracle { antigen }) => oracle(antigen),
        Some(Command::Run(a)) => run(a, config),
        Some(Command::RandomSearch(a)) => search(a, config),
        Some(Command::Detect(a)) => detect(a, config),
        None => Err(Error::Argument("no subcommand given; see --help".into())),
    }
}
