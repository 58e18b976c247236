//! `svmkit` command-line front end.
//!
//! [`run`] is the whole program; `main` only wires it to the process streams.
//! Every failure report on stderr starts with an `error:<category>: message`
//! line, and the category fixes the exit code:
//!
//! | category      | exit |
//! |---------------|------|
//! | `usage`       | 1    |
//! | `data`        | 2    |
//! | `convergence` | 3    |

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use svmkit::data::{load, synth_hard, write_csv, IngestSpec, Regime};
use svmkit::eval::{decision_grid, sweep, sweep_tsv, SweepSpec};
use svmkit::solver::PassTrace;
use svmkit::srm::{empirical_risk, srm_select, DEFAULT_ETA};
use svmkit::svm::{count_errors, decision_value, label_of, train_traced};
use svmkit::{Dataset, Error, KernelSpec, Model, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Convergence(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Data(_) => EXIT_DATA,
            Failure::Convergence(_) => EXIT_CONVERGENCE,
        }
    }

    fn line(&self) -> String {
        match self {
            Failure::Usage(m) => format!("error:usage: {m}"),
            Failure::Data(m) => format!("error:data: {m}"),
            Failure::Convergence(m) => format!("error:convergence: {m}"),
        }
    }
}

/// Library errors raised after flag validation concern the input data,
/// except an SRM run in which no degree converged.
impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::SrmNoConvergence(_) => Failure::Convergence(e.to_string()),
            e => Failure::Data(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

#[derive(Parser, Debug)]
#[command(name = "svmkit", version, about = "Soft-margin kernel SVM toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a seeded 2D problem as CSV.
    Synth(SynthArgs),
    /// Train a model and write it to a file.
    Train(TrainArgs),
    /// Write `label f(x)` for every input row.
    Predict(PredictArgs),
    /// Error rate of a stored model on a labelled file.
    Eval(EvalArgs),
    /// Train/test sweep over training-set sizes.
    Sweep(SweepArgs),
    /// Polynomial degree selection by the VC risk bound.
    Srm(SrmArgs),
    /// Decision values on a 2D lattice, for plotting.
    Grid(GridArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FormatArg {
    Wbc,
    Mushroom,
    Csv,
}

impl FormatArg {
    fn spec(self) -> IngestSpec {
        match self {
            FormatArg::Wbc => IngestSpec::wisconsin(),
            FormatArg::Mushroom => IngestSpec::mushroom(),
            FormatArg::Csv => IngestSpec::csv(),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum RegimeArg {
    Separable,
    Nonseparable,
    Hard,
}

#[derive(Args, Debug)]
struct Input {
    /// Data file, or `-` for stdin.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// The CSV file starts with a header row.
    #[arg(long)]
    header: bool,
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Largest KKT violation accepted at convergence.
    #[arg(long, default_value_t = 1e-3)]
    kkt_tol: f64,
    /// Passes without objective progress before the solver gives up.
    #[arg(long, default_value_t = 100)]
    max_passes: u32,
    /// Seed of the solver's fallback partner sweep.
    #[arg(long, default_value_t = 0)]
    solver_seed: u64,
    /// Exit with status 3 when any solve fails to converge.
    #[arg(long)]
    strict: bool,
}

impl SolverArgs {
    fn config(&self, c: f64) -> Outcome<SolverConfig> {
        let config = SolverConfig {
            c,
            kkt_tol: self.kkt_tol,
            max_passes: self.max_passes,
            seed: self.solver_seed,
            // The cutoff must stay below the tolerance for very tight tolerances.
            alpha_cutoff: SolverConfig::default().alpha_cutoff.min(self.kkt_tol / 10.0),
            ..SolverConfig::default()
        };
        config.validate().map_err(|e| usage(e.to_string()))?;
        Ok(config)
    }
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_enum)]
    regime: RegimeArg,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Flip 5% of the labels (hard regime only).
    #[arg(long)]
    noisy: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    input: Input,
    /// `linear`, `poly:p=3`, `rbf:sigma=10` or `sigmoid:kappa=0.1,delta=0`.
    #[arg(long, default_value = "linear")]
    kernel: KernelSpec,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long)]
    model_out: PathBuf,
    /// Write one line per solver pass to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    input: Input,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value = "linear")]
    kernel: KernelSpec,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, value_delimiter = ',', default_value = "100,200,300,400,500")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = SweepSpec::DEFAULT_REPEATS)]
    repeats: usize,
    /// Base seed of the per-run split seeds.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct SrmArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    degrees: Vec<u32>,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// The bound holds with probability `1 - eta`.
    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    xmin: f64,
    #[arg(long, allow_negative_numbers = true)]
    xmax: f64,
    #[arg(long, allow_negative_numbers = true)]
    ymin: f64,
    #[arg(long, allow_negative_numbers = true)]
    ymax: f64,
    #[arg(long, default_value_t = 101)]
    steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs one command and returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(stdout, "{e}");
            return EXIT_OK;
        }
        Err(e) => {
            let text = e.to_string();
            let text = text.strip_prefix("error: ").unwrap_or(&text);
            let _ = write!(stderr, "error:usage: {text}");
            return EXIT_USAGE;
        }
    };
    let mut io = Streams { stdin, stdout };
    match dispatch(cli.command, &mut io) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "{}", f.line());
            f.exit_code()
        }
    }
}

struct Streams<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
}

impl Streams<'_> {
    fn read_data(&mut self, input: &Input) -> Outcome<Dataset> {
        let spec = IngestSpec {
            has_header: input.header,
            ..input.format.spec()
        };
        let data = if input.data.as_os_str() == "-" {
            load(&mut *self.stdin, &spec)
        } else {
            load(BufReader::new(open(&input.data)?), &spec)
        };
        data.map_err(|e| Failure::Data(format!("{}: {e}", input.data.display())))
    }

    /// Runs `emit` against the named file, or stdout when `path` is `None` or `-`.
    fn write_to(&mut self, path: Option<&Path>, emit: impl FnOnce(&mut dyn Write) -> Outcome) -> Outcome {
        match path {
            Some(p) if p.as_os_str() != "-" => {
                let file = File::create(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
                let mut w = BufWriter::new(file);
                emit(&mut w)?;
                w.flush()?;
                Ok(())
            }
            _ => emit(&mut *self.stdout),
        }
    }
}

fn open(path: &Path) -> Outcome<File> {
    File::open(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Outcome<Model> {
    Model::load(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn check_c(c: f64) -> Outcome {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(usage(format!("--c must be positive and finite, got {c}")))
    }
}

fn dispatch(command: Command, io: &mut Streams<'_>) -> Outcome {
    match command {
        Command::Synth(a) => synth_cmd(a, io),
        Command::Train(a) => train_cmd(a, io),
        Command::Predict(a) => predict_cmd(a, io),
        Command::Eval(a) => eval_cmd(a, io),
        Command::Sweep(a) => sweep_cmd(a, io),
        Command::Srm(a) => srm_cmd(a, io),
        Command::Grid(a) => grid_cmd(a, io),
    }
}

fn synth_cmd(a: SynthArgs, io: &mut Streams<'_>) -> Outcome {
    if a.n < 2 || !a.n.is_multiple_of(2) {
        return Err(usage(format!("--n must be even and at least 2, got {}", a.n)));
    }
    if a.noisy && a.regime != RegimeArg::Hard {
        return Err(usage("--noisy applies to the hard regime only"));
    }
    let data = match a.regime {
        RegimeArg::Separable => Regime::Separable.generate(a.n, a.seed)?,
        RegimeArg::Nonseparable => Regime::Nonseparable.generate(a.n, a.seed)?,
        RegimeArg::Hard => synth_hard(a.n, a.seed, a.noisy)?,
    };
    io.write_to(a.out.as_deref(), |w| Ok(write_csv(&data, w)?))
}

fn train_cmd(a: TrainArgs, io: &mut Streams<'_>) -> Outcome {
    check_c(a.c)?;
    let config = a.solver.config(a.c)?;
    let data = io.read_data(&a.input)?;
    let mut trace: Vec<PassTrace> = Vec::new();
    let model = train_traced(&data, &a.kernel, &config, &mut trace)?;
    if let Some(path) = &a.trace {
        io.write_to(Some(path), |w| {
            for t in &trace {
                writeln!(w, "{t}")?;
            }
            Ok(())
        })?;
    }
    let meta = model.train_meta().expect("freshly trained models carry metadata");
    if a.solver.strict && !meta.converged {
        return Err(Failure::Convergence(format!(
            "solver stopped after {} iterations with KKT violation {:e}",
            meta.iterations, meta.max_kkt_violation
        )));
    }
    model
        .save(&a.model_out)
        .map_err(|e| Failure::Data(format!("{}: {e}", a.model_out.display())))?;
    writeln!(
        io.stdout,
        "n_sv={} iterations={} converged={} objective={} bias={} train_error={}",
        model.n_sv(),
        meta.iterations,
        meta.converged,
        meta.objective,
        model.bias(),
        empirical_risk(&model, &data)?
    )?;
    Ok(())
}

fn predict_cmd(a: PredictArgs, io: &mut Streams<'_>) -> Outcome {
    let model = load_model(&a.model)?;
    let data = io.read_data(&a.input)?;
    let values = data
        .points()
        .map(|x| decision_value(&model, x))
        .collect::<svmkit::Result<Vec<f64>>>()?;
    io.write_to(a.out.as_deref(), |w| {
        for f in values {
            writeln!(w, "{} {f}", label_of(f))?;
        }
        Ok(())
    })
}

fn eval_cmd(a: EvalArgs, io: &mut Streams<'_>) -> Outcome {
    let model = load_model(&a.model)?;
    let data = io.read_data(&a.input)?;
    let errors = count_errors(&model, &data)?;
    writeln!(
        io.stdout,
        "n={} errors={errors} error_rate={} n_sv={}",
        data.len(),
        empirical_risk(&model, &data)?,
        model.n_sv()
    )?;
    Ok(())
}

fn sweep_cmd(a: SweepArgs, io: &mut Streams<'_>) -> Outcome {
    check_c(a.c)?;
    let config = a.solver.config(a.c)?;
    if a.sizes.is_empty() || a.sizes.windows(2).any(|w| w[0] >= w[1]) || a.sizes[0] == 0 {
        return Err(usage("--sizes must be positive and strictly increasing"));
    }
    if a.repeats == 0 {
        return Err(usage("--repeats must be at least 1"));
    }
    let data = io.read_data(&a.input)?;
    let spec = SweepSpec {
        sizes: a.sizes,
        repeats: a.repeats,
        base_seed: a.seed,
        kernel: a.kernel,
        c: a.c,
    };
    let reports = sweep(&data, &spec, &config)?;
    io.write_to(a.out.as_deref(), |w| Ok(w.write_all(sweep_tsv(&reports, spec.repeats).as_bytes())?))?;
    let stalled = reports.iter().filter(|r| !r.converged).count();
    if a.solver.strict && stalled > 0 {
        return Err(Failure::Convergence(format!("{stalled} of {} runs did not converge", reports.len())));
    }
    Ok(())
}

fn srm_cmd(a: SrmArgs, io: &mut Streams<'_>) -> Outcome {
    check_c(a.c)?;
    let config = a.solver.config(a.c)?;
    if a.degrees.is_empty() || a.degrees[0] == 0 || a.degrees.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage("--degrees must be positive and strictly increasing"));
    }
    if !(a.eta > 0.0 && a.eta < 1.0) {
        return Err(usage(format!("--eta must lie in (0, 1), got {}", a.eta)));
    }
    let data = io.read_data(&a.input)?;
    let report = srm_select(&data, &a.degrees, &config, a.eta)?;
    io.write_to(a.out.as_deref(), |w| Ok(w.write_all(report.to_tsv().as_bytes())?))?;
    let stalled: Vec<u32> = report.entries.iter().filter(|e| !e.converged).map(|e| e.degree).collect();
    if a.solver.strict && !stalled.is_empty() {
        return Err(Failure::Convergence(format!("degrees {stalled:?} did not converge")));
    }
    Ok(())
}

fn grid_cmd(a: GridArgs, io: &mut Streams<'_>) -> Outcome {
    if a.steps < 2 {
        return Err(usage(format!("--steps must be at least 2, got {}", a.steps)));
    }
    for (name, lo, hi) in [("x", a.xmin, a.xmax), ("y", a.ymin, a.ymax)] {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(usage(format!("--{name}min must be below --{name}max")));
        }
    }
    let model = load_model(&a.model)?;
    if model.dim() != 2 {
        return Err(Failure::Data(format!(
            "{}: grid needs a 2D model, this one has dimension {}",
            a.model.display(),
            model.dim()
        )));
    }
    let cells = decision_grid(&model, (a.xmin, a.xmax), (a.ymin, a.ymax), a.steps)?;
    let header = format!("# model={} steps={}", a.model.display(), a.steps);
    io.write_to(a.out.as_deref(), |w| {
        writeln!(w, "{header}")?;
        for [x, y, f] in cells {
            writeln!(w, "{x} {y} {f}")?;
        }
        Ok(())
    })
}
