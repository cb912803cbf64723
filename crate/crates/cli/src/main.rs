use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use relu_forge::format::{complex_from_json, decomp_from_json, network_from_json, network_to_json};
use relu_forge::geometry::subdivision::{subset_intersections, MAX_PIECES};
use relu_forge::geometry::{
    build_simplex3_subdivision, check_cover, check_full_additivity, check_valuation, join, lift_to_simplex4,
    GeometryError, IdentityReport, Polytope, SubdivisionComplex,
};
use relu_forge::ir::{stats, ReluNetwork};
use relu_forge::passes::{cse, optimize, prune};
use relu_forge::synth::{build_max, build_tree_max, compile_cpwl, Method, SynthConfig, SynthError, TERM_LIMIT_ENV};
use relu_forge::verify::{check_exact_equiv, check_random, check_random_max, Verdict, DEFAULT_NEURON_CAP};
use relu_forge::Rational;

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_GUARD: u8 = 3;
const EXIT_INCONCLUSIVE: u8 = 4;

#[derive(Parser)]
#[command(name = "relu-forge", version, about = "Exact ReLU network synthesis and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a network for MAX_n or a CPWL decomposition.
    Synth(SynthArgs),
    /// Check a network against MAX_n or another network.
    Verify(VerifyArgs),
    /// Run the polytope subdivision checks.
    Geom {
        #[command(subcommand)]
        command: GeomCommand,
    },
    /// Print a CSV table of depths and sizes for each construction.
    Bench(BenchArgs),
    /// Print statistics of a network file.
    Inspect {
        #[arg(long)]
        net: PathBuf,
    },
    /// Shrink a network with semantics-preserving passes.
    Opt {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Max,
    Cpwl,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Tree,
    Five,
    Ternary,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Tree => Method::Tree,
            MethodArg::Five => Method::Five,
            MethodArg::Ternary => Method::Ternary,
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    target: Target,
    /// Number of arguments (max target).
    #[arg(long)]
    n: Option<usize>,
    /// Decomposition file (cpwl target).
    #[arg(long)]
    decomp: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long)]
    out: PathBuf,
    /// Apply the optimization passes to the result.
    #[arg(long)]
    opt: bool,
    /// Use the five-ary construction when the ternary term guard trips.
    #[arg(long)]
    fallback_five: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Random,
    Exact,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    net: PathBuf,
    /// `max` or `net:<path>`.
    #[arg(long)]
    against: String,
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest difference network handed to exact region enumeration.
    #[arg(long, default_value_t = DEFAULT_NEURON_CAP)]
    cap: usize,
}

#[derive(Subcommand)]
enum GeomCommand {
    /// Build and check the tetrahedron subdivision into four pyramids.
    Simplex3(GeomArgs),
    /// Lift the tetrahedron subdivision to the 4-simplex and check it.
    Lift4(GeomArgs),
    /// Check cover and full additivity of a subdivision file.
    CheckSubdivision {
        #[arg(long)]
        complex: PathBuf,
        #[command(flatten)]
        args: GeomArgs,
    },
}

#[derive(Args)]
struct GeomArgs {
    #[arg(long, default_value_t = 200)]
    directions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    n_max: usize,
    #[arg(long, value_delimiter = ',', default_value = "tree,five,ternary")]
    methods: Vec<MethodArg>,
}

/// A failed command: exit code and message for stderr.
struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Display) -> Failure {
    Failure {
        code,
        message: message.to_string(),
    }
}

fn input(message: impl Display) -> Failure {
    fail(EXIT_INPUT, message)
}

type CmdResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| input(format!("cannot write {}: {e}", path.display())))
}

fn load_network(path: &Path) -> Result<ReluNetwork, Failure> {
    network_from_json(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn stats_line(net: &ReluNetwork) -> String {
    let s = stats(net);
    format!("hidden_layers={} neurons={} dyadic={}", s.hidden_layers, s.neurons, s.is_dyadic)
}

fn synth_error(e: SynthError) -> Failure {
    match e {
        SynthError::TermLimit { .. } => fail(
            EXIT_GUARD,
            format!("{e}; the term-count guard is set by {TERM_LIMIT_ENV}, pass --fallback-five to build with the five-ary method instead"),
        ),
        other => input(other),
    }
}

fn synthesize(args: &SynthArgs, method: Method, config: &SynthConfig) -> Result<ReluNetwork, SynthError> {
    match args.target {
        Target::Max => build_max(args.n.unwrap_or(0), method, config),
        Target::Cpwl => {
            let path = args.decomp.as_ref().expect("checked by caller");
            let text = fs::read_to_string(path).map_err(|e| SynthError::Malformed(format!("{}: {e}", path.display())))?;
            let d = decomp_from_json(&text).map_err(|e| SynthError::Malformed(format!("{}: {e}", path.display())))?;
            compile_cpwl(&d, method, config)
        }
    }
}

fn cmd_synth(args: SynthArgs) -> CmdResult {
    match args.target {
        Target::Max if args.n.is_none() => return Err(input("--target max needs --n")),
        Target::Cpwl if args.decomp.is_none() => return Err(input("--target cpwl needs --decomp")),
        _ => {}
    }
    let config = SynthConfig::from_env();
    let method = Method::from(args.method);
    let net = match synthesize(&args, method, &config) {
        Ok(net) => net,
        Err(SynthError::TermLimit { n, .. }) if args.fallback_five => {
            eprintln!("warning: ternary term guard tripped for MAX_{n}, using the five-ary construction");
            synthesize(&args, Method::Five, &config).map_err(synth_error)?
        }
        Err(e) => return Err(synth_error(e)),
    };
    let net = if args.opt { optimize(&net) } else { net };
    write(&args.out, &network_to_json(&net))?;
    println!("{}", stats_line(&net));
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> CmdResult {
    let net = load_network(&args.net)?;
    let other = match args.against.as_str() {
        "max" => None,
        s => match s.strip_prefix("net:") {
            Some(p) => Some(load_network(Path::new(p))?),
            None => return Err(input(format!("--against must be `max` or `net:<path>`, got {s:?}"))),
        },
    };
    if net.output_dim() != 1 && other.is_none() {
        return Err(input("comparison against max needs a single-output network"));
    }
    if let Some(o) = &other {
        if (o.input_dim(), o.output_dim()) != (net.input_dim(), net.output_dim()) {
            return Err(input("networks have different input or output dimensions"));
        }
    }
    let report = match args.mode {
        Mode::Random => match &other {
            None => check_random_max(&net, args.samples, args.seed),
            Some(o) => check_random(&net, |x| o.eval(x).expect("dimensions checked"), args.samples, args.seed),
        },
        Mode::Exact => {
            let reference = match other {
                Some(o) => o,
                None => build_tree_max(net.input_dim()).map_err(input)?,
            };
            check_exact_equiv(&net, &reference, args.cap)
        }
    }
    .map_err(input)?;
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    Ok(match (report.verdict, args.mode) {
        (Verdict::Counterexample, _) => EXIT_FAIL,
        (Verdict::Equivalent, _) | (Verdict::Inconclusive, Mode::Random) => 0,
        (Verdict::Inconclusive, Mode::Exact) => {
            eprintln!("inconclusive: {}", report.reason.as_deref().unwrap_or("exact check not completed"));
            EXIT_INCONCLUSIVE
        }
    })
}

/// Collects per-check results and the resulting exit code.
struct Checks {
    failed: bool,
}

impl Checks {
    fn record(&mut self, name: &str, ok: bool, detail: impl Display) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        self.failed |= !ok;
    }

    fn identity(&mut self, name: &str, r: &IdentityReport) {
        match &r.failure {
            None => self.record(name, true, format!("{} directions", r.directions_checked)),
            Some((x, lhs, rhs)) => self.record(
                name,
                false,
                format!("direction {} gives {lhs} != {rhs}", fmt_point(x)),
            ),
        }
    }

    fn code(&self) -> u8 {
        if self.failed {
            EXIT_FAIL
        } else {
            0
        }
    }
}

fn fmt_point(x: &[Rational]) -> String {
    let parts: Vec<String> = x.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

fn geometry_failure(e: GeometryError) -> Failure {
    match e {
        GeometryError::EmptyIntersection { subset } => input(format!(
            "intersection of {{{}}} is empty; full additivity needs every Q_S to be non-empty",
            subset.join(", ")
        )),
        other => input(other),
    }
}

fn check_common(c: &SubdivisionComplex, args: &GeomArgs, checks: &mut Checks) -> Result<(), Failure> {
    let cover = check_cover(c, 1000, args.seed).map_err(geometry_failure)?;
    let detail = match &cover.uncovered {
        _ if !cover.pieces_inside => "a piece leaves the ambient polytope".to_string(),
        Some(x) => format!("point {} lies in no piece", fmt_point(x)),
        None => format!("{} sampled points covered", cover.samples),
    };
    checks.record("cover", cover.passed(), detail);
    let volumes = c
        .pieces
        .iter()
        .map(|p| p.polytope.volume())
        .collect::<Result<Vec<_>, _>>()
        .map_err(geometry_failure)?;
    let total: Rational = volumes.iter().cloned().sum();
    let ambient = c.ambient.volume().map_err(geometry_failure)?;
    let listed: Vec<String> = volumes.iter().map(ToString::to_string).collect();
    checks.record(
        "volumes",
        total == ambient,
        format!("pieces [{}] sum to {total}, ambient {ambient}", listed.join(", ")),
    );
    let add = check_full_additivity(c, args.directions, args.seed).map_err(geometry_failure)?;
    checks.identity(
        &format!("full additivity over {} subsets", (1usize << c.pieces.len()) - 1),
        &add,
    );
    Ok(())
}

fn check_certificates(c: &SubdivisionComplex, checks: &mut Checks) -> Result<(), Failure> {
    for p in &c.pieces {
        let Some(cert) = &p.certificate else { continue };
        let value = cert.eval().map_err(geometry_failure)?;
        let depth = cert.depth();
        checks.record(
            &format!("certificate of {}", p.name),
            value == p.polytope && depth == 2,
            format!("depth {depth}, {} vertices", value.vertices().len()),
        );
    }
    Ok(())
}

fn cmd_geom(command: GeomCommand) -> CmdResult {
    let mut checks = Checks { failed: false };
    match command {
        GeomCommand::Simplex3(args) => {
            let c = build_simplex3_subdivision();
            check_certificates(&c, &mut checks)?;
            let two_thirds = Rational::new(2, 3);
            for p in &c.pieces {
                let v = p.polytope.volume().map_err(geometry_failure)?;
                checks.record(&format!("volume of {}", p.name), v == two_thirds, &v);
            }
            check_common(&c, &args, &mut checks)?;
            for (i, j) in [(0, 2), (0, 3)] {
                let r = check_valuation(&c.pieces[i].polytope, &c.pieces[j].polytope, args.directions, args.seed)
                    .map_err(geometry_failure)?;
                checks.identity(&format!("valuation Q{} Q{}", i + 1, j + 1), &r);
            }
        }
        GeomCommand::Lift4(args) => {
            let c = lift_to_simplex4(&build_simplex3_subdivision()).map_err(geometry_failure)?;
            check_certificates(&c, &mut checks)?;
            let sizes: Vec<usize> = c.pieces.iter().map(|p| p.polytope.vertices().len()).collect();
            checks.record("piece vertices", sizes.iter().all(|&s| s == 6), format!("{sizes:?}"));
            let mut hull: Polytope = c.pieces[0].polytope.clone();
            for p in &c.pieces[1..] {
                hull = join(&hull, &p.polytope).map_err(geometry_failure)?;
            }
            checks.record("hull of pieces", hull == c.ambient, format!("{} vertices", hull.vertices().len()));
            check_common(&c, &args, &mut checks)?;
        }
        GeomCommand::CheckSubdivision { complex, args } => {
            let c = complex_from_json(&read(&complex)?).map_err(|e| input(format!("{}: {e}", complex.display())))?;
            if c.pieces.len() > MAX_PIECES {
                return Err(input(format!("{} pieces, at most {MAX_PIECES} supported", c.pieces.len())));
            }
            subset_intersections(&c).map_err(geometry_failure)?;
            check_common(&c, &args, &mut checks)?;
        }
    }
    Ok(checks.code())
}

fn cmd_bench(args: BenchArgs) -> CmdResult {
    let config = SynthConfig::from_env();
    println!("n,method,hidden_layers,neurons_raw,neurons_after_cse,dyadic");
    for n in 2..=args.n_max {
        for &m in &args.methods {
            let method = Method::from(m);
            match build_max(n, method, &config) {
                Ok(net) => {
                    let s = stats(&net);
                    let reduced = prune(&cse(&net));
                    println!(
                        "{n},{method},{},{},{},{}",
                        s.hidden_layers,
                        s.neurons,
                        reduced.neurons(),
                        s.is_dyadic
                    );
                }
                Err(SynthError::TermLimit { .. }) => println!("{n},{method},skipped,skipped,skipped,skipped"),
                Err(e) => return Err(input(e)),
            }
        }
    }
    Ok(0)
}

fn cmd_inspect(net: &Path) -> CmdResult {
    let net = load_network(net)?;
    let s = stats(&net);
    println!("{}", stats_line(&net));
    println!("input_dim={} output_dim={}", net.input_dim(), net.output_dim());
    println!("widths={:?}", net.hidden_widths());
    let denoms: Vec<String> = s.weight_denominators.iter().map(|(d, c)| format!("{d}:{c}")).collect();
    println!("denominators={}", denoms.join(","));
    Ok(0)
}

fn cmd_opt(net: &Path, out: &Path) -> CmdResult {
    let before = load_network(net)?;
    let after = optimize(&before);
    write(out, &network_to_json(&after))?;
    eprintln!("neurons {} -> {}", before.neurons(), after.neurons());
    println!("{}", stats_line(&after));
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Geom { command } => cmd_geom(command),
        Command::Bench(a) => cmd_bench(a),
        Command::Inspect { net } => cmd_inspect(&net),
        Command::Opt { net, out } => cmd_opt(&net, &out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
