//! Command-line front end: every subcommand prints line-delimited JSON records.
//!
//! Exit status: 0 when every internal consistency check passes, 1 when one fails, 2 on error.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;

use diagonal_circle::coefficients::{check_hypotheses_with_budget, DEFAULT_NODE_BUDGET};
use diagonal_circle::counting::{
    max_norm_for_height, BoxSpec, CountConfig, CountMode, Counter, Method,
};
use diagonal_circle::error::{Error, Result};
use diagonal_circle::integral::{
    assemble_i_with, default_truncation_with, real_density_oracle, IntegralConfig, OracleKind,
    OracleRequest,
};
use diagonal_circle::predictor::{
    compare_box, compare_hyperbolic, family_constant, predict, uniformity_batch, PredictOptions,
};
use diagonal_circle::report::{ser_u128, RecordWriter};
use diagonal_circle::series::{euler_factor_report, singular_series_with, SeriesConfig};
use diagonal_circle::solvability::{positivity_report_with, SearchConfig, DEFAULT_GAMMA_MAX};
use diagonal_circle::ProblemInstance;

#[derive(Parser)]
#[command(
    name = "diagcircle",
    version,
    about = "Counts and circle-method predictions for diagonal systems"
)]
struct Cli {
    /// Write records to FILE instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Add wall-clock `elapsed_ms` to every record (breaks byte-for-byte reproducibility).
    #[arg(long, global = true)]
    timing: bool,
    #[command(flatten)]
    budgets: Budgets,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact box count.
    Count {
        #[arg(long)]
        instance: PathBuf,
        /// Box bounds X1,...,Xk.
        #[arg(long = "box", value_delimiter = ',', required = true)]
        bounds: Vec<u64>,
        #[arg(long, value_enum, default_value = "all")]
        mode: ModeArg,
        /// Exclude solutions with a zero coordinate.
        #[arg(long)]
        nonzero: bool,
        #[arg(long, value_enum, default_value = "mitm")]
        method: MethodArg,
    },
    /// Number of points of height at most B with nonzero coordinates.
    Nofb {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        height: f64,
    },
    /// Truncated singular series and Euler factors.
    Series {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        truncation: u64,
        /// Starting depth of every Euler factor (default 2 v_p(d) + 1).
        #[arg(long)]
        euler_depth: Option<u32>,
        /// Also emit one record per prime with both evaluation paths.
        #[arg(long)]
        per_prime: bool,
    },
    /// Singular integral by quadrature, optionally with Monte Carlo oracles.
    Integral {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        truncation: Option<f64>,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Real and p-adic solvability and the sign of the box constant.
    Solvable {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        prime_bound: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_GAMMA_MAX)]
        gamma_max: u32,
    },
    /// Assembled constants.
    Predict {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        predict: PredictArgs,
    },
    /// Empirical counts against the prediction.
    Compare {
        #[arg(long)]
        instance: PathBuf,
        /// Box X1,...,Xk; repeat for several rows.
        #[arg(long = "box", value_delimiter = ',', num_args = 1.., action = clap::ArgAction::Append)]
        boxes: Vec<u64>,
        /// Height bounds B (comma separated).
        #[arg(long, value_delimiter = ',')]
        height: Vec<f64>,
        #[arg(long, value_enum, default_value = "all")]
        mode: ModeArg,
        #[arg(long)]
        nonzero: bool,
        #[command(flatten)]
        predict: PredictArgs,
    },
    /// Family constant c_r(u) over derived matrices.
    Family {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        u: Vec<u64>,
        /// Largest admissible |Y(u)|.
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        #[command(flatten)]
        predict: PredictArgs,
    },
    /// Box comparison at one common box over every instance file in a directory.
    Batch {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        k0: String,
        #[arg(long = "box", value_delimiter = ',', required = true)]
        bounds: Vec<u64>,
        #[arg(long, value_enum, default_value = "all")]
        mode: ModeArg,
        #[arg(long)]
        nonzero: bool,
        #[command(flatten)]
        predict: PredictArgs,
    },
    /// Rank hypotheses and K(Λ).
    Hypotheses {
        #[arg(long)]
        instance: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    All,
    Positive,
    Primitive,
}

impl From<ModeArg> for CountMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::All => CountMode::All,
            ModeArg::Positive => CountMode::Positive,
            ModeArg::Primitive => CountMode::Primitive,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Naive,
    Mitm,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum OracleChoice {
    None,
    B0,
    Density,
    Both,
}

#[derive(Args, Clone)]
struct OracleArgs {
    #[arg(long, value_enum, default_value = "none")]
    oracle: OracleChoice,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Slab half-width of the real-density oracle.
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
}

impl OracleArgs {
    fn request(&self, kind: OracleKind) -> OracleRequest {
        OracleRequest {
            kind,
            samples: self.samples,
            seed: self.seed,
            epsilon: self.epsilon,
        }
    }
}

/// Resource limits; every engine refuses with a budget error instead of approximating.
#[derive(Args, Clone)]
struct Budgets {
    /// Largest hashed partial-sum map of the counting engines.
    #[arg(long, global = true)]
    max_entries: Option<usize>,
    /// Largest number of column assignments visited by the naive engine.
    #[arg(long, global = true)]
    naive_budget: Option<u128>,
    /// Largest residue state space q^R of the congruence count.
    #[arg(long, global = true)]
    phi_states: Option<usize>,
    /// Rough operation budget per Euler-factor depth.
    #[arg(long, global = true)]
    euler_budget: Option<f64>,
    /// Largest number of integrand evaluations of two-dimensional quadrature.
    #[arg(long, global = true)]
    quadrature_points: Option<u64>,
    /// Work budget of the p-adic search at each precision.
    #[arg(long, global = true)]
    search_budget: Option<f64>,
    /// Node budget of the invertible-block search.
    #[arg(long, global = true)]
    node_budget: Option<u64>,
}

impl Budgets {
    fn count(&self) -> CountConfig {
        let mut c = CountConfig::default();
        c.max_entries = self.max_entries.unwrap_or(c.max_entries);
        c.naive_budget = self.naive_budget.unwrap_or(c.naive_budget);
        c
    }

    fn series(&self) -> SeriesConfig {
        let mut c = SeriesConfig::default();
        c.phi_state_budget = self.phi_states.unwrap_or(c.phi_state_budget);
        c.euler_cost_budget = self.euler_budget.unwrap_or(c.euler_cost_budget);
        c
    }

    fn integral(&self) -> IntegralConfig {
        let mut c = IntegralConfig::default();
        c.point_budget = self.quadrature_points.unwrap_or(c.point_budget);
        c
    }

    fn search(&self) -> SearchConfig {
        let mut c = SearchConfig::default();
        c.budget = self.search_budget.unwrap_or(c.budget);
        c
    }

    fn nodes(&self) -> u64 {
        self.node_budget.unwrap_or(DEFAULT_NODE_BUDGET)
    }
}

#[derive(Args, Clone)]
struct PredictArgs {
    #[arg(long)]
    series_truncation: Option<u64>,
    #[arg(long)]
    integral_truncation: Option<f64>,
    #[arg(long)]
    prime_bound: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_GAMMA_MAX)]
    gamma_max: u32,
    #[command(flatten)]
    oracle: OracleArgs,
}

impl PredictArgs {
    fn options(&self, budgets: &Budgets) -> Result<PredictOptions> {
        let oracle = match self.oracle.oracle {
            OracleChoice::None => None,
            OracleChoice::B0 => Some(self.oracle.request(OracleKind::BZero)),
            OracleChoice::Density => Some(self.oracle.request(OracleKind::RealDensity)),
            OracleChoice::Both => {
                return Err(Error::Argument("predict accepts a single oracle".into()))
            }
        };
        Ok(PredictOptions {
            series_truncation: self.series_truncation,
            integral_truncation: self.integral_truncation,
            prime_bound: self.prime_bound,
            gamma_max: self.gamma_max,
            oracle,
            series: budgets.series(),
            integral: budgets.integral(),
            search: budgets.search(),
            count: budgets.count(),
            hypothesis_budget: budgets.nodes(),
            ..PredictOptions::default()
        })
    }
}

/// Record with the instance it refers to and, under `--timing`, the wall-clock time.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    #[serde(skip_serializing_if = "Option::is_none")]
    instance: Option<&'a ProblemInstance>,
    #[serde(flatten)]
    body: &'a T,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<f64>,
}

struct Output {
    writer: RecordWriter,
    timing: bool,
    start: Instant,
    consistent: bool,
}

impl Output {
    fn push<T: Serialize>(
        &mut self,
        kind: &str,
        inst: Option<&ProblemInstance>,
        body: &T,
    ) -> Result<()> {
        let elapsed_ms = self
            .timing
            .then(|| self.start.elapsed().as_secs_f64() * 1e3);
        self.writer.push(
            kind,
            &Envelope {
                instance: inst,
                body,
                elapsed_ms,
            },
        )
    }

    fn check(&mut self, passed: bool, what: &str) -> Result<()> {
        if !passed {
            self.consistent = false;
        }
        self.push("check", None, &CheckRecord { name: what, passed })
    }
}

#[derive(Serialize)]
struct CheckRecord<'a> {
    name: &'a str,
    passed: bool,
}

#[derive(Serialize)]
struct HeightRecord {
    height: f64,
    max_norm_product: u64,
    #[serde(serialize_with = "ser_u128")]
    count: u128,
}

fn load(path: &Path) -> Result<ProblemInstance> {
    ProblemInstance::load(path)
}

fn run(cli: &Cli, out: &mut Output) -> Result<()> {
    let budgets = &cli.budgets;
    match &cli.cmd {
        Cmd::Count {
            instance,
            bounds,
            mode,
            nonzero,
            method,
        } => {
            let inst = load(instance)?;
            let spec = BoxSpec::new(bounds.clone(), (*mode).into()).nonzero(*nonzero);
            let method = match method {
                MethodArg::Naive => Method::Naive,
                MethodArg::Mitm => Method::MeetInMiddle,
            };
            let report = Counter::with_config(&inst, budgets.count()).box_count(&spec, method)?;
            out.push("count", Some(&inst), &report)?;
        }
        Cmd::Nofb { instance, height } => {
            let inst = load(instance)?;
            let e = inst.height_exponent();
            if e <= 0 {
                return Err(Error::Argument(format!("s − Rd = {e} must be positive")));
            }
            let count = Counter::with_config(&inst, budgets.count()).hyperbolic_count(*height)?;
            let rec = HeightRecord {
                height: *height,
                max_norm_product: max_norm_for_height(*height, e as u32),
                count,
            };
            out.push("nofb", Some(&inst), &rec)?;
        }
        Cmd::Series {
            instance,
            truncation,
            euler_depth,
            per_prime,
        } => {
            let inst = load(instance)?;
            let est = singular_series_with(&inst, *truncation, *euler_depth, &budgets.series())?;
            let worst = est
                .euler_factors
                .iter()
                .map(|e| e.mismatch)
                .fold(0.0, f64::max);
            out.push("series", Some(&inst), &est)?;
            if *per_prime {
                for e in &est.euler_factors {
                    let rep = euler_factor_report(&inst, e.p, e.depth)?;
                    out.push("euler_factor", None, &rep)?;
                }
            }
            out.check(
                worst <= diagonal_circle::series::TOLERANCE,
                "euler_factor_paths",
            )?;
        }
        Cmd::Integral {
            instance,
            truncation,
            oracle,
        } => {
            let inst = load(instance)?;
            let y = match truncation {
                Some(y) => *y,
                None => default_truncation_with(&inst, &budgets.integral())?,
            };
            let first = match oracle.oracle {
                OracleChoice::None => None,
                OracleChoice::B0 | OracleChoice::Both => Some(oracle.request(OracleKind::BZero)),
                OracleChoice::Density => Some(oracle.request(OracleKind::RealDensity)),
            };
            let est = assemble_i_with(&inst, y, first, &budgets.integral())?;
            out.push("integral", Some(&inst), &est)?;
            if let (Some(d), Some(err)) = (est.discrepancy, est.oracle_error) {
                out.check(
                    d <= 3.0 * err.hypot(est.quadrature_error),
                    "integral_oracle_agreement",
                )?;
            }
            if oracle.oracle == OracleChoice::Both {
                let dens = real_density_oracle(&inst, oracle.epsilon, oracle.samples, oracle.seed)?;
                out.push("oracle", None, &dens)?;
                let d = (dens.value - est.value).abs();
                out.check(
                    d <= 3.0 * dens.error.hypot(est.quadrature_error),
                    "density_oracle_agreement",
                )?;
            }
        }
        Cmd::Solvable {
            instance,
            prime_bound,
            gamma_max,
        } => {
            let inst = load(instance)?;
            let rep = positivity_report_with(&inst, *prime_bound, *gamma_max, budgets.search())?;
            out.push("solvability", Some(&inst), &rep)?;
        }
        Cmd::Predict {
            instance,
            predict: args,
        } => {
            let inst = load(instance)?;
            let p = predict(&inst, &args.options(budgets)?)?;
            out.push("prediction", Some(&inst), &p)?;
            out.consistent &= p.consistent();
        }
        Cmd::Compare {
            instance,
            boxes,
            height,
            mode,
            nonzero,
            predict: args,
        } => {
            let inst = load(instance)?;
            if boxes.is_empty() == height.is_empty() {
                return Err(Error::Argument("give either --box or --height".into()));
            }
            let opts = args.options(budgets)?;
            let p = predict(&inst, &opts)?;
            out.push("prediction", Some(&inst), &p)?;
            out.consistent &= p.consistent();
            if !boxes.is_empty() {
                let k = inst.k() as usize;
                if boxes.len() % k != 0 {
                    return Err(Error::Argument(format!("each --box needs {k} bounds")));
                }
                let rows: Vec<Vec<u64>> = boxes.chunks(k).map(<[u64]>::to_vec).collect();
                let cmp = compare_box(&inst, &rows, (*mode).into(), *nonzero, &p, &opts)?;
                out.push("box_comparison", None, &cmp)?;
            } else {
                let cmp = compare_hyperbolic(&inst, height, &p, &opts)?;
                out.push("height_comparison", None, &cmp)?;
            }
        }
        Cmd::Family {
            instance,
            r,
            u,
            budget,
            predict: args,
        } => {
            let inst = load(instance)?;
            let rep = family_constant(&inst, *r, u, &args.options(budgets)?, *budget)?;
            out.push("family", Some(&inst), &rep)?;
            out.check(rep.k_bound_holds, "derived_k_bound")?;
        }
        Cmd::Batch {
            dir,
            k0,
            bounds,
            mode,
            nonzero,
            predict: args,
        } => {
            let k0: BigInt = k0
                .parse()
                .map_err(|_| Error::Argument(format!("K0 = {k0} is not an integer")))?;
            let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            let mut members = Vec::with_capacity(files.len());
            for f in &files {
                let name = f
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default();
                members.push((name, load(f)?));
            }
            let rep = uniformity_batch(
                &members,
                &k0,
                bounds,
                (*mode).into(),
                *nonzero,
                &args.options(budgets)?,
            )?;
            for s in &rep.skipped {
                eprintln!("skipping {}: K = {} exceeds K0 = {}", s.name, s.k, k0);
            }
            out.push("batch", None, &rep)?;
        }
        Cmd::Hypotheses { instance } => {
            let inst = load(instance)?;
            let rep = check_hypotheses_with_budget(&inst, budgets.nodes());
            out.push("hypotheses", Some(&inst), &rep)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = Output {
        writer: RecordWriter::new(),
        timing: cli.timing,
        start: Instant::now(),
        consistent: true,
    };
    let result = run(&cli, &mut out);
    let written = match &cli.out {
        Some(path) => File::create(path)
            .map_err(Error::from)
            .and_then(|f| out.writer.write_to(f)),
        None => out.writer.write_to(io::stdout().lock()),
    };
    if let Err(e) = result.and(written) {
        let _ = writeln!(io::stderr(), "error: {e}");
        return ExitCode::from(2);
    }
    if out.consistent {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
