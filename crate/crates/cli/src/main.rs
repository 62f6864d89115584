use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use structperf::io::{
    gen_synthetic, load_model, read_libsvm_file, run_experiment, save_model, stratified_split, write_libsvm, write_trace,
    ExperimentConfig, SolverKind, SynthSpec,
};
use structperf::metrics::raw_measure;
use structperf::stochastic::{DEFAULT_BUFFER, DEFAULT_PASSES};
use structperf::{Data, Error, Spec, Weights};

#[derive(Parser, Debug)]
#[command(name = "structperf", version, about = "Train and evaluate linear models for non-decomposable measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a model and write a time/accuracy trace
    Train(TrainArgs),
    /// Evaluate a saved model on a dataset
    Eval(EvalArgs),
    /// Generate a synthetic two-class dataset in LIBSVM format
    GenSynth(SynthArgs),
    /// Run the randomized oracle and property checks
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Solver {
    #[value(name = "1pmb")]
    OnePass,
    #[value(name = "2pmb")]
    TwoPass,
    Psg,
    Ftrl,
}

impl From<Solver> for SolverKind {
    fn from(s: Solver) -> Self {
        match s {
            Solver::OnePass => SolverKind::OnePass,
            Solver::TwoPass => SolverKind::TwoPass,
            Solver::Psg => SolverKind::Psg,
            Solver::Ftrl => SolverKind::Ftrl,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Loss {
    Preck,
    Prbep,
    Pauc,
    Fmeasure,
}

#[derive(Args, Debug)]
struct LossArgs {
    #[arg(long, value_enum, default_value = "prbep")]
    loss: Loss,
    /// Fraction for prec@k; defaults to the positive rate of the data
    #[arg(long, value_parser = open_fraction)]
    k: Option<f64>,
    /// False positive range for partial AUC
    #[arg(long, default_value_t = 0.1, value_parser = half_open_fraction)]
    beta: f64,
}

impl LossArgs {
    fn spec(&self, d: &Data) -> Result<Spec, Error> {
        match self.loss {
            Loss::Preck => {
                let k = match self.k {
                    Some(k) => k,
                    None if d.n_pos() > 0 && d.n_neg() > 0 => d.n_pos() as f64 / d.len() as f64,
                    None => return Err(Error::InvalidInput("cannot default --k without both classes".into())),
                };
                Spec::prec_at_k(k)
            }
            Loss::Prbep => Ok(Spec::prbep()),
            Loss::Pauc => Spec::pauc(self.beta),
            Loss::Fmeasure => Ok(Spec::fmeasure()),
        }
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long, value_enum, default_value = "1pmb")]
    solver: Solver,
    #[command(flatten)]
    loss: LossArgs,
    /// Step scale (regularization weight for ftrl)
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    eta: f64,
    /// Buffer size and epoch length (batch size for ftrl)
    #[arg(long, default_value_t = DEFAULT_BUFFER, value_parser = at_least_one)]
    buffer: usize,
    /// Passes over the data (iterations for psg)
    #[arg(long, default_value_t = DEFAULT_PASSES, value_parser = at_least_one)]
    passes: usize,
    #[arg(long, default_value_t = 100.0, value_parser = positive)]
    radius: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    train_file: PathBuf,
    /// Held-out data; without it the training file is split
    #[arg(long)]
    test_file: Option<PathBuf>,
    /// Training share of the stratified split
    #[arg(long, default_value_t = 0.7, value_parser = open_fraction)]
    split: f64,
    #[arg(long, default_value = "trace.csv")]
    out: PathBuf,
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    loss: LossArgs,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    dim: usize,
    #[arg(long, value_parser = open_fraction)]
    pos_fraction: f64,
    /// Distance between the class means
    #[arg(long, default_value_t = 2.0, value_parser = nonnegative)]
    separation: f64,
    /// Per-coordinate standard deviation
    #[arg(long, default_value_t = 1.0, value_parser = nonnegative)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn at_least_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err("must be a whole number of at least 1".into()),
    }
}

fn positive(s: &str) -> Result<f64, String> {
    number(s).and_then(|v| if v > 0.0 { Ok(v) } else { Err("must be positive".into()) })
}

fn nonnegative(s: &str) -> Result<f64, String> {
    number(s).and_then(|v| if v >= 0.0 { Ok(v) } else { Err("must be nonnegative".into()) })
}

fn open_fraction(s: &str) -> Result<f64, String> {
    number(s).and_then(|v| if v > 0.0 && v < 1.0 { Ok(v) } else { Err("must lie in (0, 1)".into()) })
}

fn half_open_fraction(s: &str) -> Result<f64, String> {
    number(s).and_then(|v| if v > 0.0 && v <= 1.0 { Ok(v) } else { Err("must lie in (0, 1]".into()) })
}

enum Failure {
    Usage(String),
    Data(Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Data(Error::InvalidInput(format!("{}: {e}", path.display()))))
}

fn read_data(path: &PathBuf) -> Result<Data, Failure> {
    read_libsvm_file(path, true).map_err(|e| match e {
        Error::Io(io) => Failure::Data(Error::InvalidInput(format!("{}: {io}", path.display()))),
        other => Failure::Data(other),
    })
}

fn widen(d: &Data, dimension: usize) -> Result<Data, Error> {
    Data::with_dimension(d.points().to_vec(), dimension)
}

fn train(args: &TrainArgs) -> Result<(), Failure> {
    let data = read_data(&args.train_file)?;
    let (train, test) = match &args.test_file {
        Some(path) => {
            let test = read_data(path)?;
            let dim = data.dimension().max(test.dimension());
            (widen(&data, dim)?, widen(&test, dim)?)
        }
        None => stratified_split(&data, args.split, args.seed)?,
    };
    let measure = args.loss.spec(&train).map_err(|e| Failure::Usage(e.to_string()))?;
    let config = ExperimentConfig {
        eta: args.eta,
        buffer_size_s: args.buffer,
        passes: args.passes,
        radius: args.radius,
        seed: args.seed,
        ..ExperimentConfig::new(args.solver.into(), measure)
    };
    let outcome = run_experiment(&train, &test, &config)?;
    let mut out = create(&args.out)?;
    write_trace(&outcome.trace, &mut out)?;
    out.flush().map_err(Error::from)?;
    if let Some(path) = &args.model_out {
        let mut out = create(path)?;
        save_model(&outcome.model, &mut out)?;
        out.flush().map_err(Error::from)?;
    }
    let last = outcome.trace.last().expect("trace holds the initial row");
    println!(
        "solver={} loss={} train={} test={} epochs={} ms={} train_surrogate={:.6} test_measure={:.6}",
        config.solver,
        measure,
        train.len(),
        test.len(),
        outcome.epochs,
        last.wall_clock_ms,
        last.train_surrogate,
        last.test_measure
    );
    if let Some(r) = outcome.regret {
        println!(
            "avg_penalty={:.6} batch_opt={:.6} regret={:.6}",
            r.avg_penalty, r.batch_opt_loss, r.regret_upper
        );
    }
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<(), Failure> {
    let file = File::open(&args.model)
        .map_err(|e| Failure::Data(Error::InvalidInput(format!("{}: {e}", args.model.display()))))?;
    let w: Weights = load_model(BufReader::new(file))?;
    let data = read_data(&args.data)?;
    if data.dimension() > w.dimension() {
        return Err(Failure::Data(Error::DimensionMismatch {
            index: data.dimension(),
            dimension: w.dimension(),
        }));
    }
    let data = widen(&data, w.dimension())?;
    let measure = args.loss.spec(&data).map_err(|e| Failure::Usage(e.to_string()))?;
    let raw = raw_measure(&data, &w, &measure)?;
    let surrogate = measure.value(&data.refs(), &w)?;
    println!("{}={:.6} surrogate={:.6} n_pos={} n_neg={}", raw.measure, raw.value, surrogate, raw.support.0, raw.support.1);
    Ok(())
}

fn gen_synth(args: &SynthArgs) -> Result<(), Failure> {
    let spec = SynthSpec {
        n: args.n,
        dim: args.dim,
        pos_fraction: args.pos_fraction,
        separation: args.separation,
        noise: args.noise,
        seed: args.seed,
    };
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let d: Data = gen_synthetic(&spec)?;
    let mut out = create(&args.out)?;
    write_libsvm(&d, &mut out)?;
    out.flush().map_err(Error::from)?;
    println!("wrote {} points ({} positive) to {}", d.len(), d.n_pos(), args.out.display());
    Ok(())
}

fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    if args.trials == 0 {
        return Err(Failure::Usage("--trials must be at least 1".into()));
    }
    let report = structperf::verify::run_suite(args.trials, args.seed)?;
    print!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::GenSynth(a) => gen_synth(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Verification) => {
            eprintln!("error: verification failed");
            ExitCode::from(3)
        }
    }
}
