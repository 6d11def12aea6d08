//! Command-line surface: price-of-anarchy certificates, rule design,
//! closed-form evaluation, dynamics, exhaustive analysis, benchmark sweeps
//! and instance validation.
//!
//! Exit codes: 0 success, 2 validation failure, 3 capacity exceeded,
//! 4 I/O error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gmmc_cli::experiment::{self, ExperimentConfig, Scenario};
use gmmc_cli::gen::{self, CachingParams, RuleChoice};
use gmmc_cli::io;
use gmmc_core::dynamics::{run_best_response_with_schedule, Schedule};
use gmmc_core::oracle::Oracle;
use gmmc_core::poa::{self, Method};
use gmmc_core::{closed_form, design, fmt_g12, Allocation, WelfareBasis};

#[derive(Parser)]
#[command(
    name = "gmmc",
    version,
    about = "Price-of-anarchy computation, certification and utility design \
             for multiagent resource-allocation games"
)]
struct Cli {
    /// Seed for randomized subcommands
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the primary artifact to this path instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance for the self-checks printed by some subcommands
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the price of anarchy of a rule against a basis
    Poa(PoaArgs),
    /// Synthesize the rule maximizing the price of anarchy
    Design(DesignArgs),
    /// Evaluate a named closed-form expression
    ClosedForm(ClosedFormArgs),
    /// Run best-response dynamics on an instance file
    Dynamics(DynamicsArgs),
    /// Exhaustive analysis of a desk-scale instance file
    Oracle(OracleArgs),
    /// Seeded benchmark sweeps with CSV output
    Bench(BenchArgs),
    /// Check an instance file against the standing assumptions
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisKind {
    /// w = 1 (covering welfare)
    Covering,
    /// w(j) = (1 - (1-p)^j)/p
    VehicleTarget,
    /// w(j) = j^d
    Power,
}

#[derive(Args)]
struct BasisArgs {
    /// Welfare basis family
    #[arg(long, value_enum, default_value_t = BasisKind::Covering)]
    basis: BasisKind,
    /// Number of agents
    #[arg(long)]
    n: usize,
    /// Success probability of the vehicle-target basis
    #[arg(long, default_value_t = 0.8)]
    p: f64,
    /// Exponent of the power basis
    #[arg(long, default_value_t = 1.0)]
    d: f64,
}

impl BasisArgs {
    fn build(&self) -> gmmc_core::Result<WelfareBasis> {
        match self.basis {
            BasisKind::Covering => Ok(WelfareBasis::covering(self.n)),
            BasisKind::VehicleTarget => WelfareBasis::success_probability(self.n, self.p),
            BasisKind::Power => WelfareBasis::power(self.n, self.d),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleKind {
    Sv,
    Mc,
    Gairing,
    Optimal,
    File,
}

#[derive(Args)]
struct RuleArgs {
    /// Distribution rule
    #[arg(long, value_enum, default_value_t = RuleKind::Sv)]
    rule: RuleKind,
    /// Rule JSON ({"f": [...]}) for --rule file
    #[arg(long)]
    rule_file: Option<PathBuf>,
}

impl RuleArgs {
    fn choice(&self) -> Result<RuleChoice, CliError> {
        Ok(match self.rule {
            RuleKind::Sv => RuleChoice::EqualSplit,
            RuleKind::Mc => RuleChoice::MarginalContribution,
            RuleKind::Gairing => RuleChoice::FactorialOptimal,
            RuleKind::Optimal => RuleChoice::DesignedOptimal,
            RuleKind::File => {
                let path = self.rule_file.as_ref().ok_or_else(|| {
                    CliError::Usage("--rule file requires --rule-file".into())
                })?;
                let rule = io::load_rule(path).map_err(CliError::Io)??;
                RuleChoice::Fixed(rule)
            }
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Primal,
    Dual,
    Reduced,
    Auto,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Primal => Method::Primal,
            MethodArg::Dual => Method::Dual,
            MethodArg::Reduced => Method::ReducedDual,
            MethodArg::Auto => Method::Auto,
        }
    }
}

#[derive(Args)]
struct PoaArgs {
    #[command(flatten)]
    basis: BasisArgs,
    #[command(flatten)]
    rule: RuleArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    /// Reconstruct and attach the tight worst-case instance
    #[arg(long)]
    witness: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum DesignFamily {
    General,
    Submodular,
    Covering,
}

#[derive(Args)]
struct DesignArgs {
    #[command(flatten)]
    basis: BasisArgs,
    #[arg(long, value_enum, default_value_t = DesignFamily::General)]
    family: DesignFamily,
}

#[derive(Clone, Copy, ValueEnum)]
enum Formula {
    PoaGairing,
    CoveringWstar,
    CoveringWstarNonincreasing,
    SubmodularWstar,
    PoaShapley,
    PoaMc,
    Supermodular,
    Curvature,
    CurvatureApprox,
    SmoothnessBound,
}

#[derive(Args)]
struct ClosedFormArgs {
    #[arg(long, value_enum)]
    formula: Formula,
    #[command(flatten)]
    basis: BasisArgs,
    #[command(flatten)]
    rule: RuleArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    RoundRobin,
    Random,
}

#[derive(Args)]
struct DynamicsArgs {
    /// Instance JSON file
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    max_rounds: usize,
    #[arg(long, value_enum, default_value_t = ScheduleArg::RoundRobin)]
    schedule: ScheduleArg,
    /// Start from a random profile instead of all-zero choices
    #[arg(long)]
    random_init: bool,
    /// Write the step trace as CSV here
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Instance JSON file
    #[arg(long)]
    instance: PathBuf,
    /// Profile-space cap
    #[arg(long, default_value_t = gmmc_core::oracle::DEFAULT_PROFILE_CAP)]
    cap: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioKind {
    VehicleTarget,
    Caching,
    RandomSingleton,
    File,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioKind,
    #[command(flatten)]
    rule: RuleArgs,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Agents (vehicle-target / random-singleton)
    #[arg(long, default_value_t = 10)]
    agents: usize,
    /// Targets or resources
    #[arg(long, default_value_t = 11)]
    targets: usize,
    #[arg(long, default_value_t = 0.8)]
    p: f64,
    /// Caching grid edge lengths
    #[arg(long, default_value_t = 200.0)]
    grid_x: f64,
    #[arg(long, default_value_t = 200.0)]
    grid_y: f64,
    #[arg(long, default_value_t = 20)]
    nodes: usize,
    #[arg(long, default_value_t = 200)]
    items: usize,
    #[arg(long, default_value_t = 0.8)]
    alpha: f64,
    #[arg(long, default_value_t = 200.0)]
    radius: f64,
    #[arg(long, default_value_t = 1)]
    capacity: usize,
    /// Paper-scale caching shortcut (800x800, 100 nodes, 1000 items)
    #[arg(long)]
    paper_scale: bool,
    /// Instance file for --scenario file
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Certify each sample with the exhaustive oracle when feasible
    #[arg(long)]
    oracle: bool,
    /// Use the total-query-rate surrogate denominator (caching)
    #[arg(long)]
    surrogate: bool,
    #[arg(long, default_value_t = 10_000)]
    max_rounds: usize,
}

#[derive(Args)]
struct ValidateArgs {
    /// Instance JSON file
    #[arg(long)]
    instance: PathBuf,
}

enum CliError {
    Core(gmmc_core::Error),
    Io(std::io::Error),
    Usage(String),
    /// Standing-assumption violations found by `validate`.
    Violations(Vec<String>),
}

impl From<gmmc_core::Error> for CliError {
    fn from(e: gmmc_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn report_and_code(self) -> u8 {
        match self {
            CliError::Core(e) => {
                eprintln!("error: {e}");
                match e {
                    gmmc_core::Error::Capacity(_) => 3,
                    gmmc_core::Error::Internal(_) => 1,
                    _ => 2,
                }
            }
            CliError::Io(e) => {
                eprintln!("i/o error: {e}");
                4
            }
            CliError::Usage(msg) => {
                eprintln!("usage error: {msg}");
                2
            }
            CliError::Violations(violations) => {
                for v in &violations {
                    println!("violation: {v}");
                }
                2
            }
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(CliError::Io),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => ExitCode::from(e.report_and_code()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Poa(ref args) => cmd_poa(&cli, args),
        Command::Design(ref args) => cmd_design(&cli, args),
        Command::ClosedForm(ref args) => cmd_closed_form(&cli, args),
        Command::Dynamics(ref args) => cmd_dynamics(&cli, args),
        Command::Oracle(ref args) => cmd_oracle(&cli, args),
        Command::Bench(ref args) => cmd_bench(&cli, args),
        Command::Validate(ref args) => cmd_validate(&cli, args),
    }
}

fn cmd_poa(cli: &Cli, args: &PoaArgs) -> Result<(), CliError> {
    let w = args.basis.build()?;
    let f = args.rule.choice()?.build(&w)?;
    let report = if args.witness {
        poa::compute_poa_with_witness(&f, &w, args.method.into())?
    } else {
        poa::compute_poa(&f, &w, args.method.into())?
    };

    let mut text = String::new();
    text.push_str(&format!("n: {}\n", report.n));
    text.push_str(&format!("method: {}\n", report.method));
    text.push_str(&format!("w_star: {}\n", fmt_g12(report.w_star)));
    text.push_str(&format!("poa: {}\n", fmt_g12(report.poa)));
    if let Some(lambda) = report.lambda {
        text.push_str(&format!("lambda: {}\n", fmt_g12(lambda)));
    }
    if let Some(mu) = report.mu {
        text.push_str(&format!("mu: {}\n", fmt_g12(mu)));
    }
    if let Some(witness) = &report.witness {
        let eq_welfare = witness.instance.welfare(&witness.equilibrium);
        let opt_welfare = witness.instance.welfare(&witness.optimal);
        let tight = (opt_welfare / eq_welfare - report.w_star).abs() <= cli.tol.max(1e-6);
        let nash = witness
            .instance
            .is_nash_with_tol(&witness.equilibrium, cli.tol)
            .is_equilibrium;
        text.push_str(&format!(
            "witness_resources: {}\n",
            witness.instance.num_resources()
        ));
        text.push_str(&format!("witness_equilibrium_welfare: {}\n", fmt_g12(eq_welfare)));
        text.push_str(&format!("witness_optimal_welfare: {}\n", fmt_g12(opt_welfare)));
        text.push_str(&format!("witness_is_nash: {nash}\n"));
        text.push_str(&format!("witness_tight: {tight}\n"));
        let file = io::WitnessFile::new(&witness.instance, &witness.equilibrium, &witness.optimal);
        text.push_str(&serde_json::to_string_pretty(&file).expect("serializable"));
        text.push('\n');
    }
    emit(&cli.out, &text)
}

fn cmd_design(cli: &Cli, args: &DesignArgs) -> Result<(), CliError> {
    let w = args.basis.build()?;
    let (rule, report) = match args.family {
        DesignFamily::General => design::optimal_rule(&w)?,
        DesignFamily::Submodular => design::optimal_rule_submodular(&w)?,
        DesignFamily::Covering => design::optimal_rule_covering(args.basis.n)?,
    };
    let mut text = String::new();
    text.push_str(&format!("n: {}\n", report.n));
    text.push_str(&format!("poa: {}\n", fmt_g12(report.poa)));
    text.push_str(&format!("w_star: {}\n", fmt_g12(report.w_star)));
    let values: Vec<String> = rule.interior().iter().map(|&v| fmt_g12(v)).collect();
    text.push_str(&format!("f: [{}]\n", values.join(", ")));
    if let Some(path) = &cli.out {
        io::save_rule(path, &rule).map_err(CliError::Io)?;
        println!("{text}rule written to {}", path.display());
        Ok(())
    } else {
        print!("{text}");
        Ok(())
    }
}

fn cmd_closed_form(cli: &Cli, args: &ClosedFormArgs) -> Result<(), CliError> {
    let text = match args.formula {
        Formula::PoaGairing => {
            format!("poa: {}\n", fmt_g12(closed_form::poa_gairing(args.basis.n)?))
        }
        Formula::SmoothnessBound => {
            format!("bound: {}\n", fmt_g12(poa::smoothness_bound(args.basis.n)))
        }
        Formula::Curvature => {
            let w = args.basis.build()?;
            format!("curvature: {}\n", fmt_g12(closed_form::curvature(&w)))
        }
        Formula::CurvatureApprox => {
            let w = args.basis.build()?;
            format!("approx: {}\n", fmt_g12(closed_form::curvature_approx(&w)))
        }
        Formula::PoaShapley => {
            let w = args.basis.build()?;
            format!("poa: {}\n", fmt_g12(closed_form::poa_shapley_submodular(&w)?))
        }
        Formula::PoaMc => {
            let w = args.basis.build()?;
            format!("poa: {}\n", fmt_g12(closed_form::poa_mc_submodular(&w)?))
        }
        Formula::CoveringWstar => {
            let w = WelfareBasis::covering(args.basis.n);
            let f = args.rule.choice()?.build(&w)?;
            let r = closed_form::covering_wstar(&f)?;
            format!(
                "w_star: {}\npoa: {}\nattained_at: ({}, {})\n",
                fmt_g12(r.value),
                fmt_g12(1.0 / r.value),
                r.at.0,
                r.at.1
            )
        }
        Formula::CoveringWstarNonincreasing => {
            let w = WelfareBasis::covering(args.basis.n);
            let f = args.rule.choice()?.build(&w)?;
            let r = closed_form::covering_wstar_nonincreasing(&f)?;
            format!(
                "w_star: {}\npoa: {}\nattained_at: ({}, {})\n",
                fmt_g12(r.value),
                fmt_g12(1.0 / r.value),
                r.at.0,
                r.at.1
            )
        }
        Formula::SubmodularWstar => {
            let w = args.basis.build()?;
            let f = args.rule.choice()?.build(&w)?;
            let r = closed_form::submodular_wstar(&f, &w)?;
            format!(
                "w_star: {}\npoa: {}\nattained_at: ({}, {})\n",
                fmt_g12(r.value),
                fmt_g12(1.0 / r.value),
                r.at.0,
                r.at.1
            )
        }
        Formula::Supermodular => {
            let w = args.basis.build()?;
            let f = args.rule.choice()?.build(&w)?;
            format!("poa: {}\n", fmt_g12(closed_form::supermodular_poa(&f, &w)?))
        }
    };
    emit(&cli.out, &text)
}

fn cmd_dynamics(cli: &Cli, args: &DynamicsArgs) -> Result<(), CliError> {
    let instance = io::load_instance(&args.instance)??;
    let init = if args.random_init {
        let mut rng = gen::sample_rng(cli.seed, 1);
        let choices = (0..instance.num_agents())
            .map(|i| rand::Rng::random_range(&mut rng, 0..instance.actions(i).len()))
            .collect();
        Allocation::new(&instance, choices)?
    } else {
        Allocation::new(&instance, vec![0; instance.num_agents()])?
    };
    let schedule = match args.schedule {
        ScheduleArg::RoundRobin => Schedule::RoundRobin,
        ScheduleArg::Random => Schedule::Random { seed: cli.seed },
    };
    let (terminal, trace) =
        run_best_response_with_schedule(&instance, &init, args.max_rounds, schedule)?;
    if let Some(path) = &args.trace {
        fs::write(path, trace.to_csv()).map_err(CliError::Io)?;
    }
    let check = instance.is_nash_with_tol(&terminal, cli.tol);
    let mut text = String::new();
    text.push_str(&format!("converged: {}\n", trace.converged));
    text.push_str(&format!("rounds: {}\n", trace.rounds));
    text.push_str(&format!("welfare: {}\n", fmt_g12(instance.welfare(&terminal))));
    text.push_str(&format!(
        "potential: {}\n",
        fmt_g12(instance.potential(&terminal))
    ));
    text.push_str(&format!("is_nash: {}\n", check.is_equilibrium));
    let choices: Vec<String> = terminal.choices().iter().map(|c| c.to_string()).collect();
    text.push_str(&format!("choices: [{}]\n", choices.join(", ")));
    emit(&cli.out, &text)
}

fn cmd_oracle(cli: &Cli, args: &OracleArgs) -> Result<(), CliError> {
    let instance = io::load_instance(&args.instance)??;
    let oracle = Oracle::with_cap(args.cap);
    let (opt_alloc, opt) = oracle.exact_optimum(&instance)?;
    let nash = oracle.all_nash(&instance)?;
    let (worst_alloc, worst) = oracle.worst_nash(&instance)?;
    let efficiency = oracle.instance_efficiency(&instance)?;
    let mut text = String::new();
    text.push_str(&format!("optimum_welfare: {}\n", fmt_g12(opt)));
    let oc: Vec<String> = opt_alloc.choices().iter().map(|c| c.to_string()).collect();
    text.push_str(&format!("optimum_choices: [{}]\n", oc.join(", ")));
    text.push_str(&format!("equilibria: {}\n", nash.len()));
    text.push_str(&format!("worst_equilibrium_welfare: {}\n", fmt_g12(worst)));
    let wc: Vec<String> = worst_alloc.choices().iter().map(|c| c.to_string()).collect();
    text.push_str(&format!("worst_equilibrium_choices: [{}]\n", wc.join(", ")));
    text.push_str(&format!("efficiency: {}\n", fmt_g12(efficiency)));
    emit(&cli.out, &text)
}

fn cmd_bench(cli: &Cli, args: &BenchArgs) -> Result<(), CliError> {
    let scenario = match args.scenario {
        ScenarioKind::VehicleTarget => Scenario::VehicleTarget {
            n_agents: args.agents,
            n_targets: args.targets,
            p: args.p,
        },
        ScenarioKind::Caching => {
            let params = if args.paper_scale {
                CachingParams::paper_scale(args.alpha)
            } else {
                CachingParams {
                    grid_x: args.grid_x,
                    grid_y: args.grid_y,
                    n_nodes: args.nodes,
                    n_items: args.items,
                    alpha: args.alpha,
                    radius: args.radius,
                    capacity: args.capacity,
                }
            };
            Scenario::Caching(params)
        }
        ScenarioKind::RandomSingleton => Scenario::RandomSingleton {
            n_agents: args.agents,
            n_resources: args.targets,
        },
        ScenarioKind::File => {
            let path = args.instance.clone().ok_or_else(|| {
                CliError::Usage("--scenario file requires --instance".into())
            })?;
            Scenario::File { path }
        }
    };
    let mut config = ExperimentConfig::new(scenario, args.rule.choice()?, cli.seed, args.samples);
    config.with_oracle = args.oracle;
    config.surrogate_ratio = args.surrogate;
    config.max_rounds = args.max_rounds;
    let table = experiment::run_experiment(&config)?;
    emit(&cli.out, &experiment::table_to_csv(&table))
}

fn cmd_validate(cli: &Cli, args: &ValidateArgs) -> Result<(), CliError> {
    let instance = io::load_instance(&args.instance)??;
    let violations = instance.validate_standing_assumptions();
    if violations.is_empty() {
        emit(&cli.out, "ok\n")
    } else {
        Err(CliError::Violations(violations))
    }
}
