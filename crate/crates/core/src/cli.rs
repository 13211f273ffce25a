//! Instance files, the random instance generator and the command handlers
//! behind the `toric-factor` binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorization::{verify_trace, FactorOptions, FactorizationTrace, Factorizer, DEFAULT_GUARD};
use crate::formal_real::{rationally_independent, FormalReal, RealBasis};
use crate::json::IntLiteral;
use crate::lattice::{
    interior_contains, star_subdivide, LatticeVector, Side, StepRecord, TraceStep, UnimodularCone, ValuationVector,
};
use crate::monomial::{factor_monomial, verify_script, MonoidalScript, MonomialMap};

pub const BASIS_REF: &str = "basis";

/// Per-instance options; command-line flags override them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_digits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValuationJson {
    pub basis_ref: String,
    pub ambient: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InstanceJson {
    ConePair {
        basis: RealBasis,
        sigma: UnimodularCone,
        tau: UnimodularCone,
        v: ValuationJson,
        #[serde(default)]
        options: InstanceOptions,
    },
    Monomial {
        #[serde(rename = "A")]
        a: Vec<Vec<IntLiteral>>,
        nu_x: Vec<Vec<String>>,
        basis: RealBasis,
        #[serde(default)]
        options: InstanceOptions,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConePairInstance {
    pub basis: Arc<RealBasis>,
    pub sigma: UnimodularCone,
    pub tau: UnimodularCone,
    pub v: ValuationVector,
    pub options: InstanceOptions,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialInstance {
    pub basis: Arc<RealBasis>,
    pub a: Vec<Vec<BigInt>>,
    pub nu_x: Vec<FormalReal>,
    pub options: InstanceOptions,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    ConePair(ConePairInstance),
    Monomial(MonomialInstance),
}

fn reals(basis: &Arc<RealBasis>, rows: &[Vec<String>]) -> Result<Vec<FormalReal>> {
    rows.iter().map(|r| FormalReal::from_strings(basis, r)).collect()
}

/// Rebuilds the basis at a lower working precision when requested.
fn with_precision(basis: RealBasis, digits: Option<usize>) -> Result<Arc<RealBasis>> {
    match digits {
        Some(d) if d != basis.precision_digits() => Ok(Arc::new(RealBasis::new(
            basis.labels().to_vec(),
            basis.embeddings().to_vec(),
            d,
        )?)),
        _ => Ok(Arc::new(basis)),
    }
}

impl Instance {
    pub fn from_json(json: InstanceJson, precision_digits: Option<usize>) -> Result<Self> {
        match json {
            InstanceJson::ConePair {
                basis,
                sigma,
                tau,
                v,
                options,
            } => {
                let basis = with_precision(basis, precision_digits.or(options.precision_digits))?;
                if v.basis_ref != BASIS_REF {
                    return Err(Error::InvalidBasis(format!("unknown basis reference {:?}", v.basis_ref)));
                }
                let v = ValuationVector::new(reals(&basis, &v.ambient)?)?;
                if v.ambient().is_empty() {
                    return Err(Error::DimensionMismatch { expected: sigma.dim(), found: 0 });
                }
                Ok(Instance::ConePair(ConePairInstance {
                    basis,
                    sigma,
                    tau,
                    v,
                    options,
                }))
            }
            InstanceJson::Monomial {
                a,
                nu_x,
                basis,
                options,
            } => {
                let basis = with_precision(basis, precision_digits.or(options.precision_digits))?;
                Ok(Instance::Monomial(MonomialInstance {
                    a: crate::json::int_matrix_from_json(a),
                    nu_x: reals(&basis, &nu_x)?,
                    basis,
                    options,
                }))
            }
        }
    }

    pub fn to_json(&self) -> InstanceJson {
        match self {
            Instance::ConePair(c) => InstanceJson::ConePair {
                basis: (*c.basis).clone(),
                sigma: c.sigma.clone(),
                tau: c.tau.clone(),
                v: ValuationJson {
                    basis_ref: BASIS_REF.into(),
                    ambient: c.v.ambient().iter().map(FormalReal::to_strings).collect(),
                },
                options: c.options.clone(),
            },
            Instance::Monomial(m) => InstanceJson::Monomial {
                a: crate::json::int_matrix_to_json(&m.a),
                nu_x: m.nu_x.iter().map(FormalReal::to_strings).collect(),
                basis: (*m.basis).clone(),
                options: m.options.clone(),
            },
        }
    }

    pub fn options(&self) -> &InstanceOptions {
        match self {
            Instance::ConePair(c) => &c.options,
            Instance::Monomial(m) => &m.options,
        }
    }
}

/// A cone built from the identity by random additions `g_i += g_j` or
/// `g_i -= g_j`, skipping any that would exceed `entry_bound`.
pub fn random_unimodular(rng: &mut ChaCha8Rng, n: usize, entry_bound: i64, ops: usize) -> UnimodularCone {
    let mut gens: Vec<Vec<i64>> = (0..n).map(|k| (0..n).map(|j| i64::from(j == k)).collect()).collect();
    if n < 2 {
        return UnimodularCone::identity(n);
    }
    for _ in 0..ops {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
        let next: Vec<i64> = gens[i].iter().zip(&gens[j]).map(|(a, b)| a + sign * b).collect();
        if next.iter().all(|x| x.abs() <= entry_bound) {
            gens[i] = next;
        }
    }
    UnimodularCone::new(gens.iter().map(|g| LatticeVector::from_i64(g)).collect()).expect("elementary operations")
}

const COEFF_BOUND: i64 = 9;
const COEFF_RETRIES: usize = 64;

/// A seeded random instance: `sigma` is the identity, `tau` comes from
/// [`random_unimodular`], and `v` has positive coordinates in `tau` whose
/// coefficient vectors over `{1, sqrt2, ..., sqrt(p_n)}` are independent; `v`
/// is also interior to `sigma`.
pub fn gen_instance(n: usize, entry_bound: i64, ops: usize, seed: u64) -> Result<ConePairInstance> {
    if n < 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = RealBasis::default_sqrt(n + 1);
    let sigma = UnimodularCone::identity(n);
    loop {
        let tau = random_unimodular(&mut rng, n, entry_bound, ops);
        for _ in 0..COEFF_RETRIES {
            let coords = (0..n)
                .map(|_| {
                    let c = (0..=n)
                        .map(|_| BigRational::from_integer(rng.gen_range(1..=COEFF_BOUND).into()))
                        .collect();
                    FormalReal::from_coeffs(&basis, c)
                })
                .collect::<Result<Vec<_>>>()?;
            if !rationally_independent(&coords) {
                continue;
            }
            let v = ValuationVector::from_cone_coordinates(&tau, &coords)?;
            if interior_contains(&sigma, &v)? {
                return Ok(ConePairInstance {
                    basis,
                    sigma,
                    tau,
                    v,
                    options: InstanceOptions {
                        seed: Some(seed),
                        ..InstanceOptions::default()
                    },
                });
            }
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "toric-factor", version, about = "Factor nonsingular cones along a valuation vector")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Iteration guard; overrides the instance options.
    #[arg(long, global = true)]
    pub guard: Option<u64>,
    /// Working precision of the basis embeddings, in decimal digits.
    #[arg(long, global = true)]
    pub precision_digits: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Sigma,
    Tau,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factor a cone pair whose valuation has independent coordinates.
    Factor { instance: PathBuf },
    /// Factor a cone pair whose valuation may be dependent or zero.
    FactorDependent { instance: PathBuf },
    /// Turn a monomial map into monoidal transforms of both rings.
    Monomialize { instance: PathBuf },
    /// Check a trace (cone pair) or a script (monomial) against its instance.
    Verify { instance: PathBuf, artifact: PathBuf },
    /// Print a seeded random cone-pair instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        entry_bound: i64,
        #[arg(long, default_value_t = 20)]
        ops: usize,
    },
    /// One star subdivision of one side of a cone pair.
    Subdivide {
        instance: PathBuf,
        #[arg(long, value_enum)]
        side: SideArg,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
    },
}

/// A failed command: exit code 1 for engine and verification failures, 2 for
/// bad input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CliError {
    #[serde(skip)]
    pub code: i32,
    pub error: String,
    pub message: String,
}

impl CliError {
    fn input(error: &str, message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            error: error.into(),
            message: message.into(),
        }
    }

    fn engine(e: &Error) -> Self {
        CliError {
            code: 1,
            error: e.kind().into(),
            message: e.to_string(),
        }
    }

    fn invalid(e: &Error) -> Self {
        CliError {
            code: 2,
            error: e.kind().into(),
            message: e.to_string(),
        }
    }
}

/// What a successful command produced. `code` is 1 when a verification found
/// a violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub body: String,
    pub summary: Option<String>,
    pub code: i32,
}

fn read_text(path: &Path) -> std::result::Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)
            .map_err(|e| CliError::input("Io", format!("standard input: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| CliError::input("Io", format!("{}: {e}", path.display())))
}

pub fn load_instance(path: &Path, precision_digits: Option<usize>) -> std::result::Result<Instance, CliError> {
    let text = read_text(path)?;
    let json: InstanceJson = serde_json::from_str(&text).map_err(|e| CliError::input("Schema", e.to_string()))?;
    Instance::from_json(json, precision_digits).map_err(|e| CliError::invalid(&e))
}

fn cone_pair(instance: Instance) -> std::result::Result<ConePairInstance, CliError> {
    match instance {
        Instance::ConePair(c) => Ok(c),
        Instance::Monomial(_) => Err(CliError::input("Schema", "expected a cone-pair instance")),
    }
}

fn monomial(instance: Instance) -> std::result::Result<(MonomialMap, MonomialInstance), CliError> {
    match instance {
        Instance::Monomial(m) => Ok((MonomialMap::new(m.a.clone()).map_err(|e| CliError::invalid(&e))?, m)),
        Instance::ConePair(_) => Err(CliError::input("Schema", "expected a monomial instance")),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn render_steps(out: &mut String, side: Side, steps: &[TraceStep]) {
    let _ = writeln!(out, "{side}:");
    for step in steps {
        let _ = match step {
            TraceStep::Star(r) => writeln!(
                out,
                "  star ({}, {}) replaces {} with {}",
                r.pair.0, r.pair.1, r.replaced, r.new_generator
            ),
            TraceStep::Permute { perm } => writeln!(out, "  permute {perm:?}"),
        };
    }
}

pub fn render_trace(trace: &FactorizationTrace) -> String {
    let mut out = String::new();
    render_steps(&mut out, Side::Sigma, &trace.sigma_steps);
    render_steps(&mut out, Side::Tau, &trace.tau_steps);
    let _ = writeln!(out, "rho: {}", trace.final_cone);
    out
}

fn trace_outcome(trace: &FactorizationTrace, format: Format) -> Outcome {
    Outcome {
        body: match format {
            Format::Json => to_json(trace),
            Format::Text => render_trace(trace),
        },
        summary: Some(format!(
            "sigma steps {}, tau steps {}, rho {}",
            FactorizationTrace::star_count(&trace.sigma_steps),
            FactorizationTrace::star_count(&trace.tau_steps),
            trace.final_cone
        )),
        code: 0,
    }
}

fn factor_options(cli: &Cli, options: &InstanceOptions) -> FactorOptions {
    FactorOptions {
        guard: cli.guard.or(options.guard).unwrap_or(DEFAULT_GUARD),
    }
}

/// Runs one command without touching the process: the result goes into the
/// returned [`Outcome`].
pub fn run(cli: &Cli) -> std::result::Result<Outcome, CliError> {
    match &cli.command {
        Command::Factor { instance } | Command::FactorDependent { instance } => {
            let inst = cone_pair(load_instance(instance, cli.precision_digits)?)?;
            let mut f = Factorizer::new(factor_options(cli, &inst.options));
            let trace = if matches!(cli.command, Command::Factor { .. }) {
                f.factor(&inst.tau, &inst.sigma, &inst.v)
            } else {
                f.factor_dependent(&inst.tau, &inst.sigma, &inst.v)
            }
            .map_err(|e| CliError::engine(&e))?;
            Ok(trace_outcome(&trace, cli.format))
        }
        Command::Monomialize { instance } => {
            let (map, inst) = monomial(load_instance(instance, cli.precision_digits)?)?;
            let script = factor_monomial(&map, &inst.nu_x, factor_options(cli, &inst.options))
                .map_err(|e| CliError::engine(&e))?;
            Ok(Outcome {
                body: match cli.format {
                    Format::Json => to_json(&script),
                    Format::Text => script.to_text(),
                },
                summary: Some(format!(
                    "R transforms {}, S transforms {}",
                    MonoidalScript::transform_count(&script.r_transforms),
                    MonoidalScript::transform_count(&script.s_transforms)
                )),
                code: 0,
            })
        }
        Command::Verify { instance, artifact } => {
            let inst = load_instance(instance, cli.precision_digits)?;
            let text = read_text(artifact)?;
            let schema = |e: serde_json::Error| CliError::input("Schema", e.to_string());
            let (ok, body, line) = match inst {
                Instance::ConePair(c) => {
                    let trace: FactorizationTrace = serde_json::from_str(&text).map_err(schema)?;
                    let report = verify_trace(&c.sigma, &c.tau, &c.v, &trace);
                    let line = match &report.violation {
                        None => format!("ok: sigma steps {}, tau steps {}", report.sigma_steps, report.tau_steps),
                        Some(v) => match v.step {
                            Some(k) => format!("violation at {} step {k}: {}", v.side, v.reason),
                            None => format!("violation on {}: {}", v.side, v.reason),
                        },
                    };
                    (report.ok, to_json(&report), line)
                }
                Instance::Monomial(_) => {
                    let (map, m) = monomial(inst)?;
                    let script: MonoidalScript = serde_json::from_str(&text).map_err(schema)?;
                    let report = verify_script(&map, &m.nu_x, &script);
                    let line = match &report.violation {
                        None => format!("ok: R transforms {}, S transforms {}", report.r_transforms, report.s_transforms),
                        Some(v) => match v.step {
                            Some(k) => format!("violation at {:?} step {k}: {}", v.ring, v.reason),
                            None => format!("violation: {}", v.reason),
                        },
                    };
                    (report.ok, to_json(&report), line)
                }
            };
            Ok(Outcome {
                body: match cli.format {
                    Format::Json => body,
                    Format::Text => format!("{line}\n"),
                },
                summary: (cli.format == Format::Json).then_some(line),
                code: if ok { 0 } else { 1 },
            })
        }
        Command::Gen { n, entry_bound, ops } => {
            if *n < 2 {
                return Err(CliError::input("InvalidArgument", "n must be at least 2"));
            }
            if *entry_bound < 1 {
                return Err(CliError::input("InvalidArgument", "entry bound must be positive"));
            }
            let mut inst = gen_instance(*n, *entry_bound, *ops, cli.seed.unwrap_or(0)).map_err(|e| CliError::engine(&e))?;
            inst.options.guard = cli.guard;
            inst.options.precision_digits = cli.precision_digits;
            Ok(Outcome {
                body: to_json(&Instance::ConePair(inst).to_json()),
                summary: None,
                code: 0,
            })
        }
        Command::Subdivide { instance, side, i, j } => {
            let inst = cone_pair(load_instance(instance, cli.precision_digits)?)?;
            let (side, cone) = match side {
                SideArg::Sigma => (Side::Sigma, &inst.sigma),
                SideArg::Tau => (Side::Tau, &inst.tau),
            };
            let (cone, step) = star_subdivide(cone, *i, *j, &inst.v, side).map_err(|e| CliError::engine(&e))?;
            #[derive(Serialize)]
            struct Subdivision<'a> {
                cone: &'a UnimodularCone,
                step: &'a StepRecord,
            }
            Ok(Outcome {
                body: match cli.format {
                    Format::Json => to_json(&Subdivision { cone: &cone, step: &step }),
                    Format::Text => format!("{cone}\n"),
                },
                summary: None,
                code: 0,
            })
        }
    }
}

/// Parses arguments, runs the command and writes its output. Returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            match &cli.output {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &outcome.body) {
                        let err = CliError::input("Io", format!("{}: {e}", path.display()));
                        eprintln!("{}", serde_json::to_string(&err).expect("serializable"));
                        return 1;
                    }
                }
                None => print!("{}", outcome.body),
            }
            if let Some(summary) = outcome.summary {
                eprintln!("{summary}");
            }
            outcome.code
        }
        Err(err) => {
            eprintln!("{}", serde_json::to_string(&err).expect("serializable"));
            err.code
        }
    }
}
