//! Command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quasibell_core::joint::{
    alpha_family_correlator, frechet_pair_check, frechet_triple_check, mixed_state_correlator,
    noncommuting_pair_table, noncommuting_triple_table, positivity_interval, FrechetPairReport,
};
use quasibell_core::optimizer::{
    coplanarity_report, local_stationarity_check, Ansatz, CoplanarityReport, OptimizationResult,
    OptimizeConfig, StationarityReport,
};
use quasibell_core::quasi_bell::{
    classical_bound_sample, table1, werner_value, ClassicalBoundReport, QuasiBellInstance,
    DEFAULT_ENUMERATION_CAP,
};
use quasibell_core::sampling::{random_unit, seeded_rng};
use quasibell_core::symmetrize::{
    moyal_product_operator, symmetrize_bruteforce, symmetrize_pairing, symmetrize_triple,
    ProductSpec, DEFAULT_MOYAL_STEP,
};
use quasibell_core::werner::{linear_grid, sweep};
use quasibell_core::{CorrelatorSpec, Direction, SymmetrizedOperator};
use serde::{Deserialize, Serialize};

use crate::acceptance;
use crate::error::{CliError, CliResult};
use crate::format::{emit, pretty_table, to_json, Provenance, TableRecord};
use crate::input::{parse_axis, parse_bloch, parse_range, read_instance, InstanceFile};
use crate::parallel;
use crate::properties::{pair_frechet_run, pure_collapse_run, triple_frechet_run};

#[derive(Debug, Parser)]
#[command(
    name = "quasibell",
    version,
    about = "Quasi-Bell inequalities for two qubits"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for restarts and enumeration.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Joint (quasi-)probability tables of noncommuting observables.
    Joint(JointArgs),
    /// Symmetrized product of spin observables.
    Symmetrize(SymmetrizeArgs),
    /// Classical certificates and quantum values of K_N.
    Bell(BellArgs),
    /// Maximize |<K_N>| over measurement axes.
    Optimize(OptimizeArgs),
    /// Werner-state noise thresholds and sweeps.
    Werner(WernerArgs),
    /// Run the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JointMode {
    Explicit,
    Independence,
    Mixed,
    Symmetrized,
    Alpha,
}

#[derive(Debug, Args, Serialize)]
pub struct JointArgs {
    /// Alice's Bloch vector.
    #[arg(long, default_value = "0,0,0")]
    pub u: String,
    #[arg(long, default_value = "0,0,1")]
    pub a0: String,
    #[arg(long, default_value = "1,0,0")]
    pub a1: String,
    /// Third axis; builds an eight-entry table.
    #[arg(long)]
    pub a2: Option<String>,
    #[arg(long, value_enum, default_value = "symmetrized")]
    pub mode: JointMode,
    #[arg(long, allow_hyphen_values = true)]
    pub c01: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c02: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c12: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c012: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Run the randomized Fréchet/positivity property suites instead.
    #[arg(long)]
    pub check_frechet: bool,
    /// Instances per property suite.
    #[arg(long, default_value_t = 500)]
    pub random: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bruteforce,
    Pairing,
    Moyal,
}

#[derive(Debug, Args, Serialize)]
pub struct SymmetrizeArgs {
    /// Axis of one factor; repeat for each factor.
    #[arg(long = "a", allow_hyphen_values = true)]
    pub axes: Vec<String>,
    /// Number of random factors (with --random).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub random: bool,
    #[arg(long, value_enum, default_value = "pairing")]
    pub method: Method,
    /// Other methods to compare against, comma-separated.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub compare: Vec<Method>,
    /// Finite-difference step for the characteristic-function route.
    #[arg(long)]
    pub step: Option<f64>,
    /// Lift the factor-count guard of the permutation average.
    #[arg(long)]
    pub allow_large: bool,
    /// Bloch vector at which to report the expectation value.
    #[arg(long)]
    pub u: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct BellArgs {
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// Print the four order-2 test expressions over all b triples.
    #[arg(long)]
    pub table1: bool,
    /// Enumerate every classical assignment.
    #[arg(long)]
    pub enumerate: bool,
    /// Enumeration cap on the number of assignments.
    #[arg(long)]
    pub cap: Option<u64>,
    /// Evaluate this many random assignments instead of enumerating.
    #[arg(long)]
    pub sample: Option<u64>,
    /// Instance file `{N, a_dirs, b_dirs}` to evaluate.
    #[arg(long)]
    pub evaluate: Option<PathBuf>,
    /// Evaluate the built-in optimum for order 1 or 2.
    #[arg(long)]
    pub known: bool,
    /// Werner noise level for the reported value.
    #[arg(long)]
    pub z: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub order: usize,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long, value_enum)]
    pub ansatz: Option<AnsatzArg>,
    /// Evaluations per restart.
    #[arg(long)]
    pub max_evals: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also write the optimal axes as an instance file.
    #[arg(long)]
    pub instance_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzArg {
    Full,
    Reduced,
}

impl From<AnsatzArg> for Ansatz {
    fn from(a: AnsatzArg) -> Self {
        match a {
            AnsatzArg::Full => Ansatz::Full,
            AnsatzArg::Reduced => Ansatz::Reduced,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct WernerArgs {
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// Instance file; default is the known optimum (N <= 2) or an optimization.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// `start:stop:step` grid of noise levels.
    #[arg(long, default_value = "0:1:0.01")]
    pub sweep: String,
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct SelftestArgs {
    /// Include the optimization run for orders 7–10.
    #[arg(long)]
    pub extended: bool,
}

/// Keys accepted in the `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub format: Option<Format>,
    pub restarts: Option<usize>,
    pub ansatz: Option<AnsatzArg>,
    pub max_evals: Option<usize>,
    pub tol: Option<f64>,
    pub cap: Option<u64>,
    pub step: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        Ok(toml::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Flags merged over the config file.
struct Context {
    seed: u64,
    jobs: Option<usize>,
    format: Format,
    out: Option<PathBuf>,
    file: FileConfig,
}

impl Context {
    fn new(g: &GlobalArgs) -> CliResult<Self> {
        let file = match &g.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        Ok(Self {
            seed: g.seed.or(file.seed).unwrap_or(0),
            jobs: g.jobs.or(file.jobs),
            format: g.format.or(file.format).unwrap_or(Format::Json),
            out: g.out.clone(),
            file,
        })
    }

    fn emit(&self, text: &str) -> CliResult<()> {
        emit(self.out.as_deref(), text)
    }

    fn provenance<C: Serialize>(&self, config: &C, refs: &[&'static str]) -> Provenance {
        Provenance::new(Some(self.seed), config, refs)
    }
}

const REF_PAIR_TABLE: &str = "p(a0,a1) = 1/4 (1 + a0 a0.u + a1 a1.u + a0 a1 <a0 a1>)";
const REF_TRIPLE_TABLE: &str =
    "p(a0,a1,a2) = 1/8 (1 + sum a_i a_i.u + sum a_i a_j <a_i a_j> + a0 a1 a2 <a0 a1 a2>)";
const REF_SYMMETRIZE: &str = "S(a_0..a_{k-1}) = (1/k!) sum over orderings of prod (a_j.sigma)";
const REF_PAIRING: &str = "S = (1/(k-1)!!) sum_matchings prod (a_i.a_j) for even k; (1/k!!) sum_u a_u f(rest) . sigma for odd k";
const REF_MOYAL: &str =
    "S = d^k / (i^k d theta_0..d theta_{k-1}) exp(i sum theta_j a_j.sigma) at theta = 0";
const REF_KN: &str = "K_N = A_N^T M_N B_N, (M_N)_ij = 2^-N (-1)^popcount(i&j)";
const REF_QUANTUM: &str = "<K_N> = -sum_ij (M_N)_ij alpha_i . beta_j in the singlet";
const REF_WERNER: &str = "<K_N>_z = z <K_N>; threshold z* = 1/|<K_N>|";

/// Parses `std::env::args` and runs; the exit code follows [`CliError::code`].
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let ctx = Context::new(&cli.global)?;
    match &cli.command {
        Command::Joint(a) => cmd_joint(&ctx, a),
        Command::Symmetrize(a) => cmd_symmetrize(&ctx, a),
        Command::Bell(a) => cmd_bell(&ctx, a),
        Command::Optimize(a) => cmd_optimize(&ctx, a),
        Command::Werner(a) => cmd_werner(&ctx, a),
        Command::Selftest(a) => cmd_selftest(&ctx, a),
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.6}")
}

#[derive(Serialize)]
struct JointRecord {
    mode: JointMode,
    #[serde(flatten)]
    table: TableRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    frechet_pair: Option<FrechetPairSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frechet_triple: Option<FrechetTripleSummary>,
}

#[derive(Serialize)]
struct FrechetPairSummary {
    frechet_holds: bool,
    positive: bool,
    equivalent: bool,
}

impl From<&FrechetPairReport> for FrechetPairSummary {
    fn from(r: &FrechetPairReport) -> Self {
        Self {
            frechet_holds: r.frechet_holds,
            positive: r.positive,
            equivalent: r.equivalent,
        }
    }
}

#[derive(Serialize)]
struct FrechetTripleSummary {
    lower_holds: bool,
    upper_holds: bool,
    positive: bool,
}

fn require(name: &str, v: Option<f64>) -> CliResult<f64> {
    v.ok_or_else(|| CliError::Invalid(format!("--{name} is required in this mode")))
}

fn cmd_joint(ctx: &Context, a: &JointArgs) -> CliResult<()> {
    if a.check_frechet {
        return joint_properties(ctx, a);
    }
    let u = parse_bloch(&a.u)?;
    let a0 = parse_axis("a0", &a.a0)?;
    let a1 = parse_axis("a1", &a.a1)?;
    let record = match &a.a2 {
        None => {
            let c = match a.mode {
                JointMode::Explicit => require("c01", a.c01)?,
                JointMode::Independence => a0.dot(u) * a1.dot(u),
                JointMode::Mixed => mixed_state_correlator(u, a0, a1)?,
                JointMode::Symmetrized => a0.dot(a1),
                JointMode::Alpha => alpha_family_correlator(u, a0, a1, require("alpha", a.alpha)?)?,
            };
            let t = noncommuting_pair_table(u, a0, a1, &CorrelatorSpec::pair(c))?;
            let report = frechet_pair_check(&t)?;
            JointRecord {
                mode: a.mode,
                table: TableRecord::new(&t, Some(positivity_interval(u, a0, a1)?)),
                frechet_pair: Some((&report).into()),
                frechet_triple: None,
            }
        }
        Some(s) => {
            let a2 = parse_axis("a2", s)?;
            let dirs = [a0, a1, a2];
            let spec = match a.mode {
                JointMode::Explicit => CorrelatorSpec::triple(
                    require("c01", a.c01)?,
                    require("c02", a.c02)?,
                    require("c12", a.c12)?,
                    require("c012", a.c012)?,
                ),
                JointMode::Independence => CorrelatorSpec::independence(u, &dirs),
                JointMode::Symmetrized => CorrelatorSpec::triple(
                    a0.dot(a1),
                    a0.dot(a2),
                    a1.dot(a2),
                    symmetrize_triple(a0, a1, a2)?.expectation(u),
                ),
                JointMode::Mixed | JointMode::Alpha => {
                    return Err(CliError::Invalid(
                        "mixed and alpha modes take two axes".into(),
                    ))
                }
            };
            let t = noncommuting_triple_table(u, dirs, &spec)?;
            let pairs = [t.marginalize(2), t.marginalize(1), t.marginalize(0)];
            let r = frechet_triple_check(&t, [&pairs[0], &pairs[1], &pairs[2]])?;
            JointRecord {
                mode: a.mode,
                table: TableRecord::new(&t, None),
                frechet_pair: None,
                frechet_triple: Some(FrechetTripleSummary {
                    lower_holds: r.lower_holds,
                    upper_holds: r.upper_holds,
                    positive: r.positive,
                }),
            }
        }
    };
    let refs: &[&str] = if a.a2.is_some() {
        &[REF_TRIPLE_TABLE]
    } else {
        &[REF_PAIR_TABLE]
    };
    match ctx.format {
        Format::Json => ctx.emit(&to_json(&ctx.provenance(a, refs), &record)?),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["outcome", "p"])?;
            for (k, p) in &record.table.entries {
                w.write_record([k.as_str(), &p.to_string()])?;
            }
            ctx.emit(
                &String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8"),
            )
        }
        Format::Table => {
            let rows: Vec<Vec<String>> = record
                .table
                .entries
                .iter()
                .map(|(k, p)| vec![k.clone(), fmt_f(*p)])
                .collect();
            let mut s = pretty_table(&["outcome", "p"], &rows);
            s += &format!("min entry {}\n", fmt_f(record.table.min_entry));
            ctx.emit(&s)
        }
    }
}

#[derive(Serialize)]
struct PropertyRecord {
    pair: crate::properties::PairFrechetRun,
    triple: crate::properties::TripleFrechetRun,
    pure_collapse: crate::properties::PureCollapseRun,
    counterexamples: usize,
}

fn joint_properties(ctx: &Context, a: &JointArgs) -> CliResult<()> {
    let pair = pair_frechet_run(a.random, ctx.seed)?;
    let triple = triple_frechet_run(a.random, ctx.seed)?;
    let pure = pure_collapse_run(a.random, ctx.seed)?;
    let collapse_bad = usize::from(pure.max_width > 1e-9 || pure.max_deviation > 1e-9);
    let record = PropertyRecord {
        pair,
        triple,
        pure_collapse: pure,
        counterexamples: pair.counterexamples + triple.counterexamples() + collapse_bad,
    };
    let text = match ctx.format {
        Format::Json => to_json(&ctx.provenance(a, &[REF_PAIR_TABLE, REF_TRIPLE_TABLE]), &record)?,
        _ => format!(
            "pair: {} instances, {} counterexamples ({} positive, {} negative)\n\
             triple: {} instances, {} upper / {} lower counterexamples, {} rewrite mismatches, {} lower-only\n\
             pure-state collapse: {} instances, max width {:.1e}\n\
             {} counterexamples\n",
            pair.instances,
            pair.counterexamples,
            pair.positive,
            pair.negative,
            triple.instances,
            triple.upper_counterexamples,
            triple.lower_counterexamples,
            triple.rewrite_mismatches,
            triple.lower_strictly_weaker,
            pure.instances,
            pure.max_width,
            record.counterexamples
        ),
    };
    ctx.emit(&text)?;
    if record.counterexamples > 0 {
        return Err(CliError::Counterexample(format!(
            "{} property violations",
            record.counterexamples
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct SymmetrizeRecord {
    k: usize,
    directions: Vec<[f64; 3]>,
    scalar: f64,
    vector: [f64; 3],
    method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    expectation: Option<f64>,
    agreement_residuals: std::collections::BTreeMap<String, f64>,
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Bruteforce => "bruteforce",
        Method::Pairing => "pairing",
        Method::Moyal => "moyal",
    }
}

fn symmetrize_with(
    m: Method,
    spec: &ProductSpec,
    step: f64,
    allow_large: bool,
) -> CliResult<SymmetrizedOperator> {
    Ok(match m {
        Method::Bruteforce => symmetrize_bruteforce(spec, allow_large)?,
        Method::Pairing => symmetrize_pairing(spec)?,
        Method::Moyal => moyal_product_operator(spec, step)?.operator,
    })
}

fn cmd_symmetrize(ctx: &Context, a: &SymmetrizeArgs) -> CliResult<()> {
    let dirs: Vec<Direction> = if a.random {
        let k =
            a.k.ok_or_else(|| CliError::Invalid("--random needs --k".into()))?;
        let mut rng = seeded_rng(ctx.seed, 0);
        (0..k).map(|_| random_unit(&mut rng)).collect()
    } else {
        if a.axes.is_empty() {
            return Err(CliError::Invalid(
                "give factors with --a x,y,z or use --random --k K".into(),
            ));
        }
        if let Some(k) = a.k.filter(|k| *k != a.axes.len()) {
            return Err(CliError::Invalid(format!(
                "--k {k} but {} axes given",
                a.axes.len()
            )));
        }
        a.axes
            .iter()
            .enumerate()
            .map(|(j, s)| parse_axis(&format!("a{j}"), s))
            .collect::<CliResult<_>>()?
    };
    let step = a.step.or(ctx.file.step).unwrap_or(DEFAULT_MOYAL_STEP);
    let spec = ProductSpec::new(dirs.clone())?;
    let main = symmetrize_with(a.method, &spec, step, a.allow_large)?;
    let mut residuals = std::collections::BTreeMap::new();
    let mut worst_excess = false;
    for &other in a.compare.iter().filter(|m| **m != a.method) {
        let s = symmetrize_with(other, &spec, step, a.allow_large)?;
        let r = main.max_abs_diff(&s);
        let tol = if a.method == Method::Moyal || other == Method::Moyal {
            1e-5
        } else {
            1e-10
        };
        worst_excess |= r > tol;
        residuals.insert(
            format!("{}-{}", method_name(a.method), method_name(other)),
            r,
        );
    }
    let expectation =
        a.u.as_deref()
            .map(parse_bloch)
            .transpose()?
            .map(|u| main.expectation(u));
    let record = SymmetrizeRecord {
        k: dirs.len(),
        directions: dirs.iter().map(|d| d.to_array()).collect(),
        scalar: main.scalar,
        vector: main.vector.to_array(),
        method: a.method,
        expectation,
        agreement_residuals: residuals,
    };
    let text = match ctx.format {
        Format::Json => to_json(
            &ctx.provenance(a, &[REF_SYMMETRIZE, REF_PAIRING, REF_MOYAL]),
            &record,
        )?,
        _ => {
            let v = record.vector;
            let mut s = format!(
                "k = {}, method {}\nscalar {}\nvector ({}, {}, {})\n",
                record.k,
                method_name(a.method),
                fmt_f(record.scalar),
                fmt_f(v[0]),
                fmt_f(v[1]),
                fmt_f(v[2])
            );
            if let Some(e) = expectation {
                s += &format!("expectation {}\n", fmt_f(e));
            }
            for (k, r) in &record.agreement_residuals {
                s += &format!("residual {k}: {r:.2e}\n");
            }
            s
        }
    };
    ctx.emit(&text)?;
    if worst_excess {
        return Err(CliError::Counterexample(
            "methods disagree beyond tolerance".into(),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct Table1Record {
    columns: Vec<&'static str>,
    rows: Vec<[i64; 8]>,
}

#[derive(Serialize)]
struct PerIndexVectors {
    alpha: Vec<[f64; 3]>,
    beta: Vec<[f64; 3]>,
}

#[derive(Serialize)]
struct BellRecord {
    #[serde(rename = "N")]
    order: usize,
    classical_bound: f64,
    quantum_value: f64,
    werner_z: f64,
    werner_value: f64,
    a_dirs: Vec<[f64; 3]>,
    b_dirs: Vec<[f64; 3]>,
    per_index_vectors: PerIndexVectors,
}

fn cmd_bell(ctx: &Context, a: &BellArgs) -> CliResult<()> {
    if a.table1 {
        if a.order != 2 {
            return Err(CliError::Invalid(
                "the test-expression grid is defined at order 2".into(),
            ));
        }
        let columns = vec!["+++", "++-", "+-+", "+--", "-++", "-+-", "--+", "---"];
        let record = Table1Record {
            columns: columns.clone(),
            rows: table1().to_vec(),
        };
        let labels = [
            "b0+b1+b2+b0b1b2",
            "b0-b1+b2-b0b1b2",
            "b0+b1-b2-b0b1b2",
            "b0-b1-b2+b0b1b2",
        ];
        let text = match ctx.format {
            Format::Json => to_json(&ctx.provenance(a, &[REF_KN]), &record)?,
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(std::iter::once("expression").chain(columns.iter().copied()))?;
                for (label, row) in labels.iter().zip(&record.rows) {
                    w.write_record(
                        std::iter::once(label.to_string()).chain(row.iter().map(i64::to_string)),
                    )?;
                }
                String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8")
            }
            Format::Table => {
                let header: Vec<&str> = std::iter::once("expression")
                    .chain(columns.iter().copied())
                    .collect();
                let rows: Vec<Vec<String>> = labels
                    .iter()
                    .zip(&record.rows)
                    .map(|(l, r)| {
                        std::iter::once(l.to_string())
                            .chain(r.iter().map(i64::to_string))
                            .collect()
                    })
                    .collect();
                pretty_table(&header, &rows)
            }
        };
        return ctx.emit(&text);
    }
    if a.enumerate || a.sample.is_some() {
        let report: ClassicalBoundReport = match a.sample {
            Some(n) => classical_bound_sample(a.order, n, ctx.seed),
            None => {
                let cap = a.cap.or(ctx.file.cap).unwrap_or(DEFAULT_ENUMERATION_CAP);
                parallel::classical_bound_verify(a.order, cap, &parallel::pool(ctx.jobs))?
            }
        };
        let text = match ctx.format {
            Format::Json => to_json(&ctx.provenance(a, &[REF_KN]), &report)?,
            _ => format!(
                "min {:+} max {:+} over {} assignments{}\n",
                report.min,
                report.max,
                report.assignments,
                if report.exhaustive { "" } else { " (sampled)" }
            ),
        };
        ctx.emit(&text)?;
        if !report.certified() {
            return Err(CliError::Counterexample(format!(
                "{} assignments with |K_N| != 1",
                report.violations
            )));
        }
        return Ok(());
    }
    let inst = match (&a.evaluate, a.known) {
        (Some(p), _) => read_instance(p)?,
        (None, true) => known_optimum(a.order)?,
        (None, false) => {
            return Err(CliError::Invalid(
                "choose --table1, --enumerate, --sample, --evaluate or --known".into(),
            ))
        }
    };
    let z = a.z.unwrap_or(1.0);
    let q = inst.quantum_value();
    let (alpha, beta) = inst.per_index_vectors();
    let record = BellRecord {
        order: inst.order,
        classical_bound: 1.0,
        quantum_value: q,
        werner_z: z,
        werner_value: werner_value(&inst, z)?,
        a_dirs: inst.a_dirs.iter().map(|d| d.to_array()).collect(),
        b_dirs: inst.b_dirs.iter().map(|d| d.to_array()).collect(),
        per_index_vectors: PerIndexVectors {
            alpha: alpha.iter().map(|d| d.to_array()).collect(),
            beta: beta.iter().map(|d| d.to_array()).collect(),
        },
    };
    let text = match ctx.format {
        Format::Json => to_json(
            &ctx.provenance(a, &[REF_KN, REF_QUANTUM, REF_PAIRING]),
            &record,
        )?,
        _ => format!(
            "N = {}\nquantum value {}\n|value| / classical bound {}\nWerner z = {}: {}\n",
            record.order,
            fmt_f(q),
            fmt_f(q.abs()),
            z,
            fmt_f(record.werner_value)
        ),
    };
    ctx.emit(&text)
}

fn known_optimum(order: usize) -> CliResult<QuasiBellInstance> {
    match order {
        1 => Ok(QuasiBellInstance::chsh()),
        2 => Ok(QuasiBellInstance::order2_optimum()),
        _ => Err(CliError::Invalid(format!(
            "no built-in optimum at order {order}; use --evaluate or optimize"
        ))),
    }
}

fn optimize_config(
    ctx: &Context,
    order: usize,
    restarts: Option<usize>,
    a: Option<&OptimizeArgs>,
) -> OptimizeConfig {
    let d = OptimizeConfig::for_order(order);
    OptimizeConfig {
        restarts: restarts.or(ctx.file.restarts).unwrap_or(d.restarts),
        seed: ctx.seed,
        tol: a.and_then(|a| a.tol).or(ctx.file.tol).unwrap_or(d.tol),
        max_evals: a
            .and_then(|a| a.max_evals)
            .or(ctx.file.max_evals)
            .unwrap_or(d.max_evals),
        ansatz: a
            .and_then(|a| a.ansatz)
            .or(ctx.file.ansatz)
            .map(Ansatz::from)
            .unwrap_or(d.ansatz),
    }
}

#[derive(Serialize)]
struct OptimizeRecord {
    #[serde(rename = "N")]
    order: usize,
    #[serde(flatten)]
    result: OptimizationResult,
    stationarity: StationarityReport,
    coplanarity: CoplanarityReport,
}

fn cmd_optimize(ctx: &Context, a: &OptimizeArgs) -> CliResult<()> {
    let cfg = optimize_config(ctx, a.order, a.restarts, Some(a));
    let r = parallel::maximize(a.order, &cfg, &parallel::pool(ctx.jobs))?;
    let inst = r.instance();
    if let Some(p) = &a.instance_out {
        fs::write(
            p,
            serde_json::to_string_pretty(&InstanceFile::from_instance(&inst))? + "\n",
        )?;
    }
    let record = OptimizeRecord {
        order: a.order,
        stationarity: local_stationarity_check(&inst),
        coplanarity: coplanarity_report(&r),
        result: r,
    };
    let text = match ctx.format {
        Format::Json => to_json(&ctx.provenance(&cfg, &[REF_KN, REF_QUANTUM, REF_PAIRING]), &record)?,
        _ => format!(
            "N = {}\nbest value {} (|value| {})\nrestarts {}, evaluations {}, converged {}\ngradient norm {:.2e}\nmax plane angle {:.2e} rad\n",
            a.order,
            fmt_f(record.result.best_value),
            fmt_f(record.result.best_value.abs()),
            record.result.restarts_used,
            record.result.evaluations,
            record.result.converged,
            record.stationarity.gradient_norm,
            record.coplanarity.max_plane_angle
        ),
    };
    ctx.emit(&text)?;
    if !record.result.converged {
        return Err(CliError::BudgetExhausted(
            "best restart did not converge".into(),
        ));
    }
    Ok(())
}

/// Locality ranges for the CHSH inequality obtained by other constructions,
/// shown for orientation only.
const LITERATURE_RANGES: [f64; 4] = [0.7056, 0.7012, 0.6595, 0.6829];
const WERNER_CAVEAT: &str = "The quasi-Bell threshold should not be compared at face value with locality ranges of standard Bell inequalities: the joint measurements of noncommuting observables are not part of standard local hidden-variable models.";

#[derive(Serialize)]
struct WernerRecord {
    #[serde(rename = "N")]
    order: usize,
    quantum_value: f64,
    threshold: Option<f64>,
    a_dirs: Vec<[f64; 3]>,
    b_dirs: Vec<[f64; 3]>,
    rows: Vec<WernerRow>,
    literature_ranges: [f64; 4],
    caveat: &'static str,
}

#[derive(Serialize)]
struct WernerRow {
    z: f64,
    value: f64,
    violated: bool,
}

fn cmd_werner(ctx: &Context, a: &WernerArgs) -> CliResult<()> {
    let inst = match &a.instance {
        Some(p) => read_instance(p)?,
        None if (1..=2).contains(&a.order) => known_optimum(a.order)?,
        None => {
            let cfg = optimize_config(ctx, a.order, a.restarts, None);
            parallel::maximize(a.order, &cfg, &parallel::pool(ctx.jobs))?.instance()
        }
    };
    let (start, stop, step) = parse_range(&a.sweep)?;
    let s = sweep(&inst, &linear_grid(start, stop, step)?)?;
    let rows: Vec<WernerRow> = s
        .rows()
        .map(|(z, value, violated)| WernerRow { z, value, violated })
        .collect();
    match ctx.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r)?;
            }
            ctx.emit(
                &String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8"),
            )
        }
        Format::Json => {
            let record = WernerRecord {
                order: inst.order,
                quantum_value: inst.quantum_value(),
                threshold: s.threshold,
                a_dirs: inst.a_dirs.iter().map(|d| d.to_array()).collect(),
                b_dirs: inst.b_dirs.iter().map(|d| d.to_array()).collect(),
                rows,
                literature_ranges: LITERATURE_RANGES,
                caveat: WERNER_CAVEAT,
            };
            ctx.emit(&to_json(
                &ctx.provenance(a, &[REF_WERNER, REF_QUANTUM]),
                &record,
            )?)
        }
        Format::Table => {
            let mut text = match s.threshold {
                Some(t) => format!("N = {}: violation for z > {t:.4}\n", inst.order),
                None => format!("N = {}: no violation for any z\n", inst.order),
            };
            text += &format!(
                "locality ranges reported for CHSH by other constructions (not computed): {}\n{WERNER_CAVEAT}\n",
                LITERATURE_RANGES.map(|x| x.to_string()).join(", ")
            );
            ctx.emit(&text)
        }
    }
}

fn cmd_selftest(ctx: &Context, a: &SelftestArgs) -> CliResult<()> {
    let results = acceptance::run_all(acceptance::Options {
        extended: a.extended,
        jobs: ctx.jobs,
    });
    let text = match ctx.format {
        Format::Json => to_json(&ctx.provenance(a, &[]), &results)?,
        _ => results.iter().map(|r| r.line() + "\n").collect(),
    };
    ctx.emit(&text)?;
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.id.to_string())
        .collect();
    if !failed.is_empty() {
        return Err(CliError::Counterexample(format!(
            "criteria {} failed",
            failed.join(", ")
        )));
    }
    Ok(())
}
