use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polyheat::analysis::{audit_cover, ball_operator, complex_poincare_check, group_poincare_check, whitney_cover};
use polyheat::bridge::{eigenvalue_comparison, large_time_compare, transfer_constants, validity_horizon};
use polyheat::complex::{library, GeometryBounds};
use polyheat::spectral::eigen::DENSE_LIMIT;
use polyheat::spectral::{diagonal_exponent_fit, eigensolve, heat_kernel_eval, heat_trace, kernel_csv, spectrum_csv};
use polyheat::stochastic::{folner_set, mc_kernel_estimate, return_probabilities};
use polyheat::verify::{run_suite, SuiteOptions};
use polyheat::{Complex, DiscreteOperator, Error, GroupModel, SpectralDecomposition};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "polyheat", version, about = "Heat kernels on Euclidean polyhedral complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a complex and print its summary (csv) or normalized document (json).
    Build(BuildArgs),
    /// Lowest eigenvalues of the discrete Laplacian.
    Spectrum(SpectrumArgs),
    /// Heat kernel h_t(p, q) from the spectral expansion.
    Kernel(KernelArgs),
    /// Heat trace at the given times.
    Trace(TraceArgs),
    /// Slope of log h_t(p,p) against log t over a window.
    Asymptotic(AsymptoticArgs),
    /// Monte Carlo estimate of h_t(p, q) from simulated Brownian paths.
    Mc(McArgs),
    /// Return probabilities of the simple random walk on a group.
    GroupWalk(GroupWalkArgs),
    /// Build and audit a Whitney cover of a ball.
    Whitney(WhitneyArgs),
    /// Poincaré inequality audit on a complex ball or a group ball.
    Poincare(PoincareArgs),
    /// Constants of the maps between a periodic complex and its deck group.
    Transfer(TransferArgs),
    /// Compare walk return probabilities with the heat kernel of a periodic complex.
    Compare(CompareArgs),
    /// Run a verification suite and report PASS/FAIL per check.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args)]
struct Input {
    /// Complex document (specschema-1 JSON).
    #[arg(long, conflicts_with = "library")]
    spec: Option<PathBuf>,
    /// Built-in complex: interval[:L], circle, star[:N], twostar:M,N, square,
    /// grid:NX,NY, z1, z2, z2graph, l, free:R.
    #[arg(long)]
    library: Option<String>,
}

#[derive(Args)]
struct Output {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = 0.01)]
    h: f64,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct KernelArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = 0.01)]
    h: f64,
    /// Times, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<f64>,
    #[arg(long)]
    p: String,
    #[arg(long)]
    q: String,
    /// Warn when the truncation bound exceeds this.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = 0.01)]
    h: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<f64>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct AsymptoticArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = 0.005)]
    h: f64,
    #[arg(long)]
    p: String,
    /// Fit window lo,hi.
    #[arg(long, value_delimiter = ',', num_args = 2, required = true)]
    window: Vec<f64>,
    #[arg(long, default_value_t = 12)]
    samples: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    p: String,
    #[arg(long)]
    q: String,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 200_000)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    bandwidth: f64,
    #[arg(long, default_value_t = 1e-4)]
    dt: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct GroupWalkArgs {
    /// z<d> or f<rank>.
    #[arg(long)]
    group: String,
    #[arg(long, default_value_t = 20)]
    steps: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct WhitneyArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    center: String,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 300)]
    points: usize,
    #[arg(long, default_value_t = 20)]
    chains: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Rows of the ball table in csv output.
    #[arg(long, default_value_t = 1000)]
    limit: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct PoincareArgs {
    #[command(flatten)]
    input: Input,
    /// Audit the weak inequality on this group (z<d> or f<rank>) instead of a complex.
    #[arg(long, conflicts_with_all = ["spec", "library"])]
    group: Option<String>,
    #[arg(long)]
    center: Option<String>,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 0.01)]
    h: f64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TransferArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = 0.1)]
    h: f64,
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum CompareMode {
    #[default]
    LargeTime,
    Eigen,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value_t)]
    mode: CompareMode,
    /// Times for the large-time table, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "10,20,50,100")]
    times: Vec<f64>,
    /// Word radius of the truncation.
    #[arg(long, default_value_t = 40)]
    rho: usize,
    #[arg(long, default_value_t = 0.25)]
    h: f64,
    /// Følner set index for the eigenvalue comparison.
    #[arg(long, default_value_t = 1)]
    folner: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long)]
    quick: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Deck group for the compare suite: z1, z2 or f2.
    #[arg(long)]
    group: Option<String>,
    /// Mesh size of the spectral oracle check.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format written to --out; stdout always gets the text report.
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

/// Failure of a subcommand, split by exit code.
enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::Invalid(_)
            | Error::Range(_)
            | Error::Window(_)
            | Error::Horizon { .. }
            | Error::Radius(_)
            | Error::Size(_) => Failure::Usage(e.to_string()),
            e => Failure::Run(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Build(a) => build(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Kernel(a) => kernel(a),
        Command::Trace(a) => trace(a),
        Command::Asymptotic(a) => asymptotic(a),
        Command::Mc(a) => mc(a),
        Command::GroupWalk(a) => group_walk(a),
        Command::Whitney(a) => whitney(a),
        Command::Poincare(a) => poincare(a),
        Command::Transfer(a) => transfer(a),
        Command::Compare(a) => compare(a),
        Command::Verify(a) => verify(a),
    }
}

fn load(input: &Input) -> Result<Complex, Failure> {
    match (&input.spec, &input.library) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            Complex::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
        }
        (None, Some(name)) => named_complex(name),
        (None, None) => Err(Failure::Usage("one of --spec or --library is required".into())),
    }
}

fn named_complex(name: &str) -> Result<Complex, Failure> {
    let (head, tail) = name.split_once(':').unwrap_or((name, ""));
    let nums = |n: usize| -> Result<Vec<usize>, Failure> {
        let v: Vec<usize> = tail.split(',').filter(|s| !s.is_empty()).map(|s| s.trim().parse()).collect::<Result<_, _>>()
            .map_err(|_| Failure::Usage(format!("bad parameters in `{name}`")))?;
        if v.len() != n || v.contains(&0) {
            return Err(Failure::Usage(format!("`{head}` takes {n} positive integer parameter(s)")));
        }
        Ok(v)
    };
    Ok(match head {
        "interval" => {
            let len = if tail.is_empty() { 1.0 } else { tail.parse().map_err(|_| Failure::Usage(format!("bad length in `{name}`")))? };
            if !(len > 0.0) {
                return Err(Failure::Usage(format!("interval length {len} must be positive")));
            }
            library::interval(len)
        }
        "circle" => library::circle(),
        "star" => library::star(if tail.is_empty() { 3 } else { nums(1)?[0] }),
        "twostar" => {
            let v = nums(2)?;
            library::two_star(v[0], v[1])
        }
        "square" => library::unit_square(),
        "grid" => {
            let v = nums(2)?;
            library::square_grid(v[0], v[1])
        }
        "z1" => library::z1_cell(),
        "z2" => library::z2_cell(),
        "z2graph" => library::z2_graph_cell(),
        "l" => library::l_complex(),
        "free" => library::free_graph_cell(nums(1)?[0]),
        _ => return Err(Failure::Usage(format!("unknown library complex `{name}`"))),
    })
}

fn parse_group(name: &str) -> Result<GroupModel, Failure> {
    let bad = || Failure::Usage(format!("group `{name}` must be z<d> or f<rank>"));
    let n: usize = name.get(1..).and_then(|s| s.parse().ok()).filter(|&n| n > 0).ok_or_else(bad)?;
    match name.as_bytes()[0] {
        b'z' => Ok(GroupModel::zd(n)),
        b'f' => Ok(GroupModel::free(n)),
        _ => Err(bad()),
    }
}

fn emit(o: &Output, csv: impl FnOnce() -> String, json: impl FnOnce() -> String) -> Result<(), Failure> {
    let mut text = match o.format {
        Format::Csv => csv(),
        Format::Json => json(),
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &o.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

/// Header plus rows through the csv writer.
fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn pairs(rows: &[(&str, String)]) -> String {
    table(&["key", "value"], rows.iter().map(|(k, v)| vec![k.to_string(), v.clone()]))
}

/// Full spectrum when it fits the dense solver, otherwise the lowest `fallback` pairs.
fn decompose(x: &Complex, h: f64, fallback: usize) -> Result<(DiscreteOperator, SpectralDecomposition), Failure> {
    let d = DiscreteOperator::build(x, h)?;
    let count = if d.len() <= DENSE_LIMIT { d.len() } else { fallback.min(d.len()) };
    let s = eigensolve(&d, count)?;
    Ok((d, s))
}

fn build(a: BuildArgs) -> Outcome {
    let x = load(&a.input)?;
    let b = GeometryBounds::of(&x).ok();
    emit(
        &a.output,
        || {
            let mut rows = vec![
                ("dimension", x.dimension().to_string()),
                ("vertices", x.vertices().len().to_string()),
                ("edges", x.edges().len().to_string()),
                ("faces", x.faces().len().to_string()),
                ("measure", format!("{:.12e}", x.total_measure())),
                ("min_edge", format!("{:.12e}", x.min_edge_length())),
            ];
            if let Some(b) = b {
                rows.extend([
                    ("r0", format!("{:.12e}", b.r0)),
                    ("kappa", format!("{:.12e}", b.kappa)),
                    ("p0", format!("{:.12e}", b.p0)),
                ]);
            }
            if let Some(d) = x.deck() {
                rows.push(("deck_group", d.group.name()));
            }
            pairs(&rows)
        },
        || to_json(&x.to_spec()),
    )?;
    Ok(true)
}

fn spectrum(a: SpectrumArgs) -> Outcome {
    let x = load(&a.input)?;
    let d = DiscreteOperator::build(&x, a.h)?;
    let s = eigensolve(&d, a.count.min(d.len()))?;
    emit(&a.output, || spectrum_csv(&s), || to_json(&s.values))?;
    Ok(true)
}

fn kernel(a: KernelArgs) -> Outcome {
    let x = load(&a.input)?;
    let p = x.parse_point(&a.p)?;
    let q = x.parse_point(&a.q)?;
    let (d, s) = decompose(&x, a.h, 400)?;
    let mut rows = Vec::with_capacity(a.t.len());
    for &t in &a.t {
        let v = heat_kernel_eval(&s, &d, &x, t, p, q, a.tol)?;
        if v.warning {
            eprintln!("warning: truncation bound {:.3e} at t = {t} exceeds {:.1e}", v.trunc, a.tol);
        }
        rows.push((v, x.format_point(p), x.format_point(q)));
    }
    emit(&a.output, || kernel_csv(&rows), || to_json(&rows))?;
    Ok(true)
}

fn trace(a: TraceArgs) -> Outcome {
    let x = load(&a.input)?;
    let (_, s) = decompose(&x, a.h, 400)?;
    let vals = a.t.iter().map(|&t| heat_trace(&s, t, a.tol)).collect::<Result<Vec<_>, _>>()?;
    emit(
        &a.output,
        || {
            table(
                &["t", "value", "trunc_error"],
                vals.iter().map(|v| vec![v.t.to_string(), format!("{:.12e}", v.value), format!("{:.3e}", v.trunc)]),
            )
        },
        || to_json(&vals),
    )?;
    Ok(true)
}

fn asymptotic(a: AsymptoticArgs) -> Outcome {
    let x = load(&a.input)?;
    let p = x.parse_point(&a.p)?;
    let (d, s) = decompose(&x, a.h, 400)?;
    let fit = diagonal_exponent_fit(&s, &d, &x, p, (a.window[0], a.window[1]), a.samples)?;
    emit(
        &a.output,
        || {
            let mut out = table(
                &["log_t", "log_h"],
                fit.samples.iter().map(|(lt, lh)| vec![format!("{lt:.12e}"), format!("{lh:.12e}")]),
            );
            writeln!(out, "# slope {:.6}, intercept {:.6}", fit.slope, fit.intercept).unwrap();
            out
        },
        || to_json(&fit),
    )?;
    Ok(true)
}

fn mc(a: McArgs) -> Outcome {
    let x = load(&a.input)?;
    let p = x.parse_point(&a.p)?;
    let q = x.parse_point(&a.q)?;
    let e = mc_kernel_estimate(&x, p, q, a.t, a.n, a.bandwidth, a.dt, a.seed)?;
    emit(
        &a.output,
        || {
            table(
                &["t", "p", "q", "estimate", "std_err", "hits", "samples"],
                [vec![
                    a.t.to_string(),
                    x.format_point(p),
                    x.format_point(q),
                    format!("{:.12e}", e.estimate),
                    format!("{:.3e}", e.std_err),
                    e.hits.to_string(),
                    e.samples.to_string(),
                ]],
            )
        },
        || to_json(&e),
    )?;
    Ok(true)
}

fn group_walk(a: GroupWalkArgs) -> Outcome {
    let g = parse_group(&a.group)?;
    let p = return_probabilities(&g, a.steps)?;
    emit(
        &a.output,
        || table(&["steps", "return_probability"], p.iter().enumerate().map(|(n, v)| vec![n.to_string(), format!("{v:.15e}")])),
        || to_json(&p),
    )?;
    Ok(true)
}

fn whitney(a: WhitneyArgs) -> Outcome {
    let x = load(&a.input)?;
    let z = x.parse_point(&a.center)?;
    let w = whitney_cover(&x, z, a.r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let audit = audit_cover(&w, a.points, a.chains, &mut rng);
    emit(
        &a.output,
        || w.to_csv(a.limit),
        || to_json(&serde_json::json!({ "cover": w, "audit": audit, "pass": audit.pass() })),
    )?;
    if !audit.pass() {
        eprintln!("cover audit failed: {audit:?}");
    }
    Ok(audit.pass())
}

fn poincare(a: PoincareArgs) -> Outcome {
    let report = if let Some(name) = &a.group {
        let g = parse_group(name)?;
        if a.r < 1.0 || a.r.fract() != 0.0 {
            return Err(Failure::Usage(format!("group radius {} must be a positive integer", a.r)));
        }
        group_poincare_check(&g, a.r as usize, a.samples, a.seed)?
    } else {
        let x = load(&a.input)?;
        let c = a.center.as_deref().ok_or_else(|| Failure::Usage("--center is required on a complex".into()))?;
        let z = x.parse_point(c)?;
        let d = DiscreteOperator::build(&x, a.h)?;
        let ball = ball_operator(&x, &d, z, a.r)?;
        complex_poincare_check(&x, &ball, a.r, a.p, a.samples, a.seed)?
    };
    emit(
        &a.output,
        || {
            table(
                &["inequality", "samples", "worst_constant", "bound", "worst_family", "status"],
                [vec![
                    report.inequality.clone(),
                    report.samples.to_string(),
                    format!("{:.6e}", report.worst_constant),
                    format!("{:.6e}", report.bound),
                    report.worst_family.clone(),
                    if report.pass { "PASS" } else { "FAIL" }.to_string(),
                ]],
            )
        },
        || to_json(&report),
    )?;
    Ok(report.pass)
}

fn transfer(a: TransferArgs) -> Outcome {
    let y = load(&a.input)?;
    let c = transfer_constants(&y, a.h, a.samples, a.seed)?;
    let pass = c.norm_audit.pass && c.gradient_audit.pass;
    emit(
        &a.output,
        || {
            pairs(&[
                ("group", c.group.clone()),
                ("c_xg", format!("{:.6e}", c.c_xg)),
                ("diam", format!("{:.6e}", c.diam_y)),
                ("delta", format!("{:.6e}", c.delta)),
                ("centers", c.centers.to_string()),
                ("c_ns", c.c_ns.to_string()),
                ("c_sup", format!("{:.6e}", c.c_sup)),
                ("c_g", format!("{:.6e}", c.c_g)),
                ("c_over", c.c_over.to_string()),
                ("c_grad", format!("{:.6e}", c.c_grad)),
                ("c_delta", c.c_delta.map_or_else(|| "n/a".into(), |v| format!("{v:.6e}"))),
                ("norm_audit", pass_word(c.norm_audit.pass).into()),
                ("gradient_audit", pass_word(c.gradient_audit.pass).into()),
            ])
        },
        || to_json(&c),
    )?;
    Ok(pass)
}

fn pass_word(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn compare(a: CompareArgs) -> Outcome {
    let y = load(&a.input)?;
    match a.mode {
        CompareMode::LargeTime => {
            let horizon = validity_horizon(&y, a.rho);
            if let Some(&t) = a.times.iter().find(|&&t| t > horizon) {
                return Err(Failure::Usage(format!("t = {t} is past the validity horizon {horizon:.3} of radius {}", a.rho)));
            }
            let r = large_time_compare(&y, &a.times, a.rho, a.h)?;
            emit(
                &a.output,
                || {
                    table(
                        &["t", "walk", "heat", "ratio"],
                        r.rows.iter().map(|row| {
                            vec![row.t.to_string(), format!("{:.12e}", row.walk), format!("{:.12e}", row.heat), format!("{:.6e}", row.ratio)]
                        }),
                    )
                },
                || to_json(&r),
            )?;
            Ok(true)
        }
        CompareMode::Eigen => {
            let g = y.deck().ok_or_else(|| Failure::Usage("complex carries no deck group".into()))?.group.clone();
            let set = folner_set(&g, a.folner)?;
            let r = eigenvalue_comparison(&y, &set, a.h)?;
            emit(
                &a.output,
                || {
                    table(
                        &["index", "lambda", "beta", "bound"],
                        r.lambda.iter().zip(&r.beta).enumerate().map(|(i, (l, b))| {
                            vec![i.to_string(), format!("{l:.12e}"), format!("{b:.12e}"), format!("{:.12e}", r.c1 * r.c2 * (1.0 - b))]
                        }),
                    )
                },
                || to_json(&r),
            )?;
            Ok(r.pass())
        }
    }
}

fn verify(a: VerifyArgs) -> Outcome {
    let o = SuiteOptions { quick: a.quick, seed: a.seed, group: a.group, h: a.h };
    let report = run_suite(&a.suite, &o)?;
    print!("{}", report.to_text());
    if let Some(path) = &a.out {
        let body = match a.format {
            Format::Csv => report.to_csv(),
            Format::Json => report.to_json(),
        };
        std::fs::write(path, body)?;
    }
    Ok(report.pass())
}
