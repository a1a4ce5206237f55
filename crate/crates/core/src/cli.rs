//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical or I/O failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::doppler::{Engine, Spectrum};
use crate::error::Error;
use crate::faddeeva;
use crate::model::Preset;
use crate::scenario::Scenario;
use crate::threshold::{threshold_curve, threshold_surface, ThresholdMap, ThresholdOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable capping the worker pool (0 = one per core).
pub const THREADS_ENV: &str = "CASCADE_AT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "cascade-at", version, about = "Doppler-broadened cascade EIT / Autler-Townes spectra and thresholds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Δ₁ scan of I₂ and I₃.
    Spectrum(RunArgs),
    /// Threshold Ω₂ᵀ against the wavenumber ratio x.
    Threshold(RunArgs),
    /// Threshold Ω₂ᵀ over x × Doppler width.
    Surface(RunArgs),
    /// Faddeeva conformance and invariant smoke checks.
    Selftest,
    /// Print a preset as a scenario file.
    Preset {
        #[arg(value_enum)]
        name: PresetArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "preset")]
    scenario: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    #[arg(long, value_enum)]
    engine: Option<EngineArg>,
    #[arg(long, value_enum, default_value = "both")]
    observable: Observable,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Gauss-Hermite order; selects the Gauss-Hermite rule.
    #[arg(long)]
    quad_order: Option<usize>,
    #[arg(long, value_enum)]
    quadrature: Option<QuadratureArg>,
    #[arg(long, value_enum)]
    msum: Option<Switch>,
    #[arg(long, value_enum, default_value = "none")]
    normalize: Normalize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    CaseA,
    CaseB,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Preset {
        match p {
            PresetArg::CaseA => Preset::CaseA,
            PresetArg::CaseB => Preset::CaseB,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EngineArg {
    Full,
    Perturbative,
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Observable {
    #[value(name = "I2", alias = "i2")]
    I2,
    #[value(name = "I3", alias = "i3")]
    I3,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum QuadratureArg {
    Adaptive,
    GaussHermite,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Normalize {
    Peak,
    None,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::UnknownPreset(_)
            | Error::SelectionRule(_)
            | Error::UnsupportedPolarization(_)
            | Error::Precondition(_)
            | Error::SingularSystem => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) => m,
        }
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(f) => {
            eprintln!("cascade-at: {}", f.message());
            return f.code();
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("cascade-at: {}", f.message());
            f.code()
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| Failure::Config(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Numerical(format!("thread pool: {e}")))
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Spectrum(args) => spectrum(&args),
        Command::Threshold(args) => threshold(&args, false),
        Command::Surface(args) => threshold(&args, true),
        Command::Selftest => selftest(),
        Command::Preset { name, out } => {
            let text = Scenario::from_preset(name.into()).to_toml();
            write_output(out.as_ref(), &text)
        }
    }
}

/// Scenario after applying command-line overrides.
fn resolve(args: &RunArgs) -> Result<Scenario, Failure> {
    let mut scenario = match (&args.scenario, args.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read scenario {}: {e}", path.display())))?;
            Scenario::from_toml(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
        }
        (None, Some(p)) => Scenario::from_preset(p.into()),
        (None, None) => return Err(Failure::Config("one of --scenario or --preset is required".into())),
    };
    if let Some(e) = args.engine {
        scenario.scan.engine = match e {
            EngineArg::Full => "full",
            EngineArg::Perturbative => "perturbative",
            EngineArg::Analytic => "analytic",
        }
        .into();
    }
    if let Some(n) = args.quad_order {
        scenario.scan.quad_order = n;
        scenario.scan.quadrature = "gauss-hermite".into();
    }
    if let Some(q) = args.quadrature {
        scenario.scan.quadrature = match q {
            QuadratureArg::Adaptive => "adaptive",
            QuadratureArg::GaussHermite => "gauss-hermite",
        }
        .into();
    }
    if let Some(m) = args.msum {
        scenario.scan.msum = matches!(m, Switch::On);
    }
    Ok(scenario)
}

fn fingerprint(subcommand: &str, scenario: &Scenario, args: &RunArgs) -> String {
    let mut h = Sha256::new();
    h.update(subcommand.as_bytes());
    h.update(scenario.to_toml().as_bytes());
    h.update(format!("{:?}|{:?}", args.observable, args.normalize).as_bytes());
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn fmt_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.8e}")
    } else {
        "nan".into()
    }
}

fn spectrum(args: &RunArgs) -> Result<(), Failure> {
    let scenario = resolve(args)?;
    let sim = scenario.simulation()?;
    let grid = scenario.delta1_grid()?;
    let mut spec = sim.spectrum(&grid)?;
    if spec.analytic_fallbacks > 0 {
        eprintln!("cascade-at: note: {} grid points used numeric quadrature (coincident roots)", spec.analytic_fallbacks);
    }
    if args.normalize == Normalize::Peak {
        spec = spec.peak_normalized();
    }
    let text = spectrum_csv(&spec, args.observable, &fingerprint("spectrum", &scenario, args));
    write_output(args.out.as_ref(), &text)
}

fn spectrum_csv(spec: &Spectrum, observable: Observable, fp: &str) -> String {
    let mut out = format!("# cascade-at v1 spectrum {fp}\n");
    out.push_str(match observable {
        Observable::I2 => "delta1,I2\n",
        Observable::I3 => "delta1,I3\n",
        Observable::Both => "delta1,I2,I3\n",
    });
    for k in 0..spec.len() {
        out.push_str(&fmt_value(spec.delta1[k]));
        if observable != Observable::I3 {
            out.push(',');
            out.push_str(&fmt_value(spec.i2[k]));
        }
        if observable != Observable::I2 {
            out.push(',');
            out.push_str(&fmt_value(spec.i3[k]));
        }
        out.push('\n');
    }
    out
}

fn threshold(args: &RunArgs, surface: bool) -> Result<(), Failure> {
    let mut scenario = resolve(args)?;
    if scenario.fields.detuning_2 != 0.0 {
        eprintln!("cascade-at: note: thresholds are defined at resonant coupling; using detuning_2 = 0");
        scenario.fields.detuning_2 = 0.0;
    }
    let sim = scenario.simulation()?;
    let xs = scenario.x_grid()?;
    let opts = ThresholdOptions::default();
    let name = if surface { "surface" } else { "threshold" };
    let map = if surface {
        threshold_surface(&sim, &xs, &scenario.dnu_grid()?, &opts)?
    } else {
        threshold_curve(&sim, &xs, &opts)?
    };
    if !map.skipped_x.is_empty() {
        let skipped: Vec<String> = map.skipped_x.iter().map(|x| format!("{x}")).collect();
        eprintln!("cascade-at: note: skipped singular x values {}", skipped.join(", "));
    }
    let text = threshold_csv(&map, name, &fingerprint(name, &scenario, args));
    write_output(args.out.as_ref(), &text)
}

fn threshold_csv(map: &ThresholdMap, name: &str, fp: &str) -> String {
    let mut out = format!("# cascade-at v1 {name} {fp}\nx,dnu,omega_t,converged,region_two\n");
    for i in 0..map.x_grid.len() {
        for j in 0..map.dnu_grid.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_value(map.x_grid[i]),
                fmt_value(map.dnu_grid[j]),
                fmt_value(map.omega_t(i, j).unwrap_or(f64::NAN)),
                map.converged(i, j),
                map.region_two(i)
            );
        }
    }
    out
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Numerical(format!("cannot write {}: {e}", p.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Numerical(format!("stdout: {e}")))
        }
    }
}

fn selftest() -> Result<(), Failure> {
    let mut failed = 0;
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed += 1;
        }
    };

    let mut worst: f64 = 0.0;
    for i in 0..40 {
        let r = 10f64.powf(-3.0 + 4.5 * i as f64 / 39.0);
        for k in 0..10 {
            let theta = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / 10.0;
            let z = Complex64::from_polar(r, theta);
            if z.im < 0.0 && z.im * z.im - z.re * z.re > 600.0 {
                continue;
            }
            let (a, b) = (faddeeva::w(z)?, faddeeva::w_reference(z)?);
            worst = worst.max((a - b).norm() / b.norm());
        }
    }
    check("faddeeva vs reference", worst <= 1e-6, format!("max relative error {worst:.2e}"));

    let w0 = faddeeva::w(Complex64::new(0.0, 0.0))?;
    check("faddeeva w(0) = 1", (w0 - 1.0).norm() < 1e-8, format!("{w0}"));
    let z = Complex64::new(1.3, -0.7);
    let reflect = faddeeva::w(z)? + faddeeva::w(-z)? - 2.0 * (-z * z).exp();
    check("faddeeva reflection", reflect.norm() < 1e-8, format!("{:.2e}", reflect.norm()));

    let (scheme, drive, dopp) = crate::model::preset(Preset::CaseA);
    let rho = crate::liouville::steady_state(&scheme, &drive, crate::liouville::EffectiveDetunings { d1: 30.0, d2: -10.0 })?;
    check("density matrix hermitian", rho.hermiticity_defect() < 1e-12, format!("{:.2e}", rho.hermiticity_defect()));
    let pops = [rho.population(1), rho.population(2), rho.population(3)];
    check(
        "populations in [0, 1]",
        pops.iter().all(|p| (-1e-12..=1.0 + 1e-12).contains(p)) && rho.trace() <= 1.0 + 1e-12,
        format!("{pops:?}"),
    );

    let grid = [0.0, 150.0];
    let a = crate::doppler::average_analytic(&scheme, &drive, &dopp, &grid)?;
    let n = crate::doppler::average(Engine::Perturbative, &scheme, &drive, &dopp, Default::default(), &grid)?;
    let dev = (0..2).map(|k| ((a.i3[k] - n.i3[k]) / n.i3[k]).abs()).fold(0.0, f64::max);
    check("analytic vs numeric Doppler average", dev < 1e-6, format!("{dev:.2e}"));

    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("{failed} self-test check(s) failed")))
    }
}
