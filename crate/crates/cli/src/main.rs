use std::fs;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use splice_core::io::{emit_completed, ingest};
use splice_core::metrics::evaluate;
use splice_core::supervision::{BatchOutcome, HoeffdingConfig, LabelCache, Verdict};
use splice_core::synth::{synth_gen, Placement, SynthParams, TargetRule};
use splice_core::{
    Connector, Declarations, Error, ErrorClass, MicroBatch, SpliceConfig, SpliceState,
    StreamSummary,
};

#[derive(Parser)]
#[command(
    name = "splice",
    version,
    about = "Complete missing query labels in relational event streams"
)]
struct Cli {
    /// Worker threads for partitioning and graph construction (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Complete the unlabelled query atoms of a stream.
    Complete(CompleteArgs),
    /// Score a completed stream against ground truth.
    Evaluate(EvaluateArgs),
    /// Write a synthetic stream, its ground truth and declarations.
    Generate(GenerateArgs),
    /// Run a stream through the label cache and write the cache snapshot.
    DumpCache(DumpCacheArgs),
    /// Read a cache snapshot and list its entries with their filtering verdicts.
    LoadCache(LoadCacheArgs),
}

#[derive(Args)]
struct StreamArgs {
    /// Declarations file (types, predicates, functions, modes).
    #[arg(long)]
    decls: PathBuf,
    /// Query predicate whose atoms carry the labels.
    #[arg(long, default_value = "HoldsAt")]
    query: String,
    /// Stream files or directories of batch files.
    #[arg(long = "input", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
}

#[derive(Args)]
struct SolverArgs {
    /// Connection heuristic, `knn(K)` or `enn(EPS)`.
    #[arg(long, conflicts_with_all = ["knn", "enn"])]
    connector: Option<Connector>,
    /// Shorthand for `--connector knn(K)`.
    #[arg(long, conflicts_with = "enn")]
    knn: Option<usize>,
    /// Shorthand for `--connector enn(EPS)`.
    #[arg(long)]
    enn: Option<f64>,
    /// Confidence parameter of the contradiction test.
    #[arg(long, default_value_t = HoeffdingConfig::DEFAULT_DELTA)]
    delta: f64,
    /// Start from a cache snapshot.
    #[arg(long)]
    load_cache: Option<PathBuf>,
}

impl SolverArgs {
    fn config(&self) -> Result<SpliceConfig, Error> {
        let connector = match (self.connector, self.knn, self.enn) {
            (Some(c), _, _) => c,
            (None, Some(k), _) => Connector::Knn(k),
            (None, None, Some(e)) => Connector::Enn(e),
            (None, None, None) => Connector::default(),
        };
        connector.validate().map_err(Error::Config)?;
        Ok(SpliceConfig {
            connector,
            hoeffding: HoeffdingConfig::new(self.delta)?,
        })
    }

    fn state(&self, decls: Declarations) -> Result<SpliceState, Error> {
        let config = self.config()?;
        Ok(match &self.load_cache {
            Some(path) => {
                let cache = read_cache(path, &decls)?;
                SpliceState::with_cache(decls, config, cache)
            }
            None => SpliceState::new(decls, config),
        })
    }
}

#[derive(Args)]
struct CompleteArgs {
    #[command(flatten)]
    stream: StreamArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Completed stream destination (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write the final cache snapshot here.
    #[arg(long)]
    save_cache: Option<PathBuf>,
    /// Write per-batch weight matrices and harmonic values into this directory.
    #[arg(long)]
    dump_dir: Option<PathBuf>,
    /// Ground truth stream; when given, metrics are printed to stderr.
    #[arg(long)]
    truth: Vec<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    stream: StreamArgs,
    /// Completed stream.
    #[arg(long, required = true, num_args = 1..)]
    predicted: Vec<PathBuf>,
    /// Ground truth stream.
    #[arg(long, required = true, num_args = 1..)]
    truth: Vec<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Directory receiving declarations.txt, stream.txt and truth.txt.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = SynthParams::default().batches)]
    batches: usize,
    /// Time points per batch.
    #[arg(long, default_value_t = SynthParams::default().time_points)]
    time_points: usize,
    /// Entities present at each time point.
    #[arg(long, default_value_t = SynthParams::default().present)]
    present: usize,
    /// Size of the entity pool.
    #[arg(long, default_value_t = SynthParams::default().entities)]
    entities: usize,
    /// Number of activity symbols in use.
    #[arg(long, default_value_t = SynthParams::default().activities)]
    activities: usize,
    /// Fluent of the target rule.
    #[arg(long, default_value_t = TargetRule::default().fluent)]
    fluent: String,
    /// Activity both entities must perform for the target fluent to hold.
    #[arg(long, default_value_t = TargetRule::default().activity)]
    activity: String,
    /// Drop the closeness condition from the target rule.
    #[arg(long)]
    ignore_close: bool,
    #[arg(long, default_value_t = SynthParams::default().label_fraction)]
    label_fraction: f64,
    /// `per-batch` or `whole-batch`.
    #[arg(long, default_value = "whole-batch")]
    placement: Placement,
    #[arg(long, default_value_t = SynthParams::default().activity_bias)]
    activity_bias: f64,
    #[arg(long, default_value_t = SynthParams::default().close_probability)]
    close_probability: f64,
}

#[derive(Args)]
struct DumpCacheArgs {
    #[command(flatten)]
    stream: StreamArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Snapshot destination (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct LoadCacheArgs {
    #[arg(long)]
    decls: PathBuf,
    /// Snapshot file.
    #[arg(long)]
    cache: PathBuf,
    #[arg(long, default_value_t = HoeffdingConfig::DEFAULT_DELTA)]
    delta: f64,
}

fn read_cache(path: &Path, decls: &Declarations) -> Result<LabelCache, Error> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    LabelCache::read_snapshot(BufReader::new(file), &decls.schema)
}

fn load_stream(args: &StreamArgs) -> Result<(Declarations, Vec<MicroBatch>), Error> {
    let decls = Declarations::from_file(&args.decls)?;
    let batches = ingest(&args.inputs, &decls.schema, &args.query)?;
    Ok((decls, batches))
}

fn with_output<T>(
    path: Option<&Path>,
    f: impl FnOnce(&mut dyn Write) -> io::Result<T>,
) -> Result<T, Error> {
    let shown = path.unwrap_or(Path::new("<stdout>"));
    let mut sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p).map_err(|e| Error::io(p, e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let value = f(&mut sink).map_err(|e| Error::io(shown, e))?;
    sink.flush().map_err(|e| Error::io(shown, e))?;
    Ok(value)
}

fn dump_batch(dir: &Path, outcome: &BatchOutcome) -> Result<(), Error> {
    let (Some(w), Some(s)) = (&outcome.weights, &outcome.solution) else {
        return Ok(());
    };
    let index = outcome.completed.index;
    let weights = dir.join(format!("batch-{index:05}.weights.tsv"));
    with_output(Some(&weights), |out| w.write_dense(out))?;
    let values = dir.join(format!("batch-{index:05}.harmonic.tsv"));
    with_output(Some(&values), |out| s.write_values(out))
}

fn print_summary(s: &StreamSummary) {
    eprintln!(
        "batches={} evidence_scanned={} labelled={} unlabelled={} completed_positive={} completed_negative={} \
         emitted_labelled={} filtered_out={} unsupervised_batches={} cache_size={} peak_cache_size={}",
        s.batches,
        s.evidence_scanned,
        s.labelled,
        s.unlabelled,
        s.completed_positive,
        s.completed_negative,
        s.emitted_labelled,
        s.filtered_out,
        s.unsupervised_batches,
        s.cache_size,
        s.peak_cache_size
    );
}

fn complete(args: CompleteArgs) -> Result<(), Error> {
    let (decls, batches) = load_stream(&args.stream)?;
    let mut state = args.solver.state(decls)?;
    if let Some(dir) = &args.dump_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut completed = Vec::with_capacity(batches.len());
    for batch in &batches {
        let outcome = state.process_batch(batch)?;
        if let Some(dir) = &args.dump_dir {
            dump_batch(dir, &outcome)?;
        }
        completed.push(outcome.completed);
    }
    with_output(args.output.as_deref(), |out| {
        emit_completed(&completed, out)
    })?;
    if let Some(path) = &args.save_cache {
        with_output(Some(path), |out| state.cache().write_snapshot(out))?;
    }
    print_summary(state.summary());
    if !args.truth.is_empty() {
        let truth = ingest(
            &args.truth,
            &state.declarations().schema,
            &args.stream.query,
        )?;
        let predicted: Vec<MicroBatch> = completed.iter().map(|b| b.to_micro_batch()).collect();
        let m = evaluate(&batches, &predicted, &truth)?;
        eprintln!("{m}");
        eprint!("{}", m.key_values());
    }
    Ok(())
}

fn evaluate_cmd(args: EvaluateArgs) -> Result<(), Error> {
    let (decls, input) = load_stream(&args.stream)?;
    let predicted = ingest(&args.predicted, &decls.schema, &args.stream.query)?;
    let truth = ingest(&args.truth, &decls.schema, &args.stream.query)?;
    let m = evaluate(&input, &predicted, &truth)?;
    println!("{m}");
    println!();
    print!("{}", m.key_values());
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<(), Error> {
    let params = SynthParams {
        batches: args.batches,
        time_points: args.time_points,
        present: args.present,
        entities: args.entities,
        rule: TargetRule {
            fluent: args.fluent,
            activity: args.activity,
            require_close: !args.ignore_close,
        },
        label_fraction: args.label_fraction,
        placement: args.placement,
        activities: args.activities,
        activity_bias: args.activity_bias,
        close_probability: args.close_probability,
    };
    let stream = synth_gen(args.seed, &params)?;
    for path in stream.write_to(&args.out_dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn dump_cache(args: DumpCacheArgs) -> Result<(), Error> {
    let (decls, batches) = load_stream(&args.stream)?;
    let mut state = args.solver.state(decls)?;
    state.run_stream(batches)?;
    with_output(args.output.as_deref(), |out| {
        state.cache().write_snapshot(out)
    })?;
    print_summary(state.summary());
    Ok(())
}

fn load_cache(args: LoadCacheArgs) -> Result<(), Error> {
    let decls = Declarations::from_file(&args.decls)?;
    let cache = read_cache(&args.cache, &decls)?;
    let h = HoeffdingConfig::new(args.delta)?;
    with_output(None, |out| {
        for entry in cache.entries() {
            let verdict = match cache.verdict(entry, &h) {
                Verdict::Uncontested => "uncontested".to_string(),
                Verdict::Kept { margin, epsilon } => {
                    format!("kept margin={margin:.4} eps={epsilon:.4}")
                }
                Verdict::Filtered { margin, epsilon } => {
                    format!("filtered margin={margin:.4} eps={epsilon:.4}")
                }
            };
            writeln!(out, "{}\t{}\t{verdict}", entry.count, entry.clause)?;
        }
        writeln!(
            out,
            "entries={} emitted={}",
            cache.len(),
            cache.filtered(&h).len()
        )
    })
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Config => 1,
        ErrorClass::Parse => 2,
        ErrorClass::Numerical => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Complete(a) => complete(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Generate(a) => generate(a),
        Command::DumpCache(a) => dump_cache(a),
        Command::LoadCache(a) => load_cache(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.class()))
        }
    }
}
