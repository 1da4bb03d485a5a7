use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use alldiffprec::dc::{self, OracleError};
use alldiffprec::fast::{propagate_bc_with, SweepOptions, SweepReport};
use alldiffprec::format::{self, InstanceFile};
use alldiffprec::fuzz::{fuzz_differential, FuzzConfig};
use alldiffprec::generators::{
    gen_instruction_schedule, planted_instance, random_bounds, random_dag,
};
use alldiffprec::sat::{encode_3sat, parse_dimacs};
use alldiffprec::search::{
    solve, Branching, Model, Route, SearchConfig, SolveOutcome, ValueOrder, VarOrder,
};
use alldiffprec::{build_interval_instance, Instance, Mode, PropagationOutcome};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXIT_UNSAT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_LIMIT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "alldiffprec",
    version,
    about = "AllDifferent with precedences: propagation, search and testing"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one propagator to fixpoint and print the bounds.
    Propagate {
        /// Instance file, `-` for stdin.
        file: String,
        #[arg(long, value_enum, default_value_t = RouteArg::Fast)]
        route: RouteArg,
        /// Print one line per inner step of the sweep (fast routes only).
        #[arg(long)]
        trace: bool,
    },
    /// Search for a solution.
    Solve {
        file: String,
        #[arg(long, value_enum, default_value_t = RouteArg::Fast)]
        route: RouteArg,
        #[arg(long, value_enum, default_value_t = VarOrderArg::MinDomain)]
        var_order: VarOrderArg,
        #[arg(long, value_enum, default_value_t = ValueOrderArg::Asc)]
        value_order: ValueOrderArg,
        #[arg(long, value_enum, default_value_t = BranchingArg::Assign)]
        branching: BranchingArg,
        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        node_limit: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Domain consistency by exhaustive enumeration.
    Dc {
        file: String,
        /// Largest product of domain sizes to enumerate.
        #[arg(long, default_value_t = dc::DEFAULT_CAP)]
        cap: u128,
    },
    /// Encode a 3-CNF formula (DIMACS) as an instance.
    EncodeSat {
        cnf: String,
        #[arg(long)]
        json: bool,
    },
    /// Compare every propagator with the exhaustive oracle on random instances.
    Fuzz {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 7, value_parser = clap::value_parser!(u64).range(1..))]
        max_n: u64,
        #[arg(long, default_value_t = 9, value_parser = clap::value_parser!(i64).range(1..))]
        max_d: i64,
        #[arg(long, default_value_t = 0.3)]
        edge_prob: f64,
        /// Skip the domain-consistency comparison.
        #[arg(long)]
        no_dc: bool,
    },
    /// Time the propagators on growing random instances.
    Bench {
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
        max_n: u64,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
        step: u64,
        #[arg(long, default_value_t = 20)]
        repeats: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print a generated instance.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 9)]
        d: i64,
        #[arg(long, default_value_t = 0.3)]
        edge_prob: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Fast,
    FastCompressed,
    Reference,
    BinarySearch,
    #[value(alias = "decomposition")]
    Decomp,
    Weak,
}

impl RouteArg {
    fn route(self) -> Route {
        match self {
            Self::Fast => Route::Fast(Mode::FullUniverse),
            Self::FastCompressed => Route::Fast(Mode::Compressed),
            Self::Reference => Route::Reference,
            Self::BinarySearch => Route::BinarySearch,
            Self::Decomp => Route::Decomposition,
            Self::Weak => Route::Weak,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VarOrderArg {
    MinDomain,
    Lex,
    Topological,
}

#[derive(Clone, Copy, ValueEnum)]
enum ValueOrderArg {
    Asc,
    Desc,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchingArg {
    Assign,
    Split,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Random,
    Schedule,
}

fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("cannot read {path}"))
    }
}

fn load(path: &str) -> Result<(InstanceFile, Instance)> {
    let file = format::parse(&read_input(path)?).with_context(|| format!("in {path}"))?;
    let inst = file.to_instance().with_context(|| format!("in {path}"))?;
    Ok((file, inst))
}

fn propagate(out: &mut String, path: &str, route: RouteArg, trace: bool) -> Result<u8> {
    let (file, inst) = load(path)?;
    let bounds = inst.bounds();
    let result = match (route.route(), trace) {
        (Route::Fast(mode), true) => {
            let opts = SweepOptions {
                mode,
                audit: false,
                trace: true,
            };
            let mut report = SweepReport::default();
            let result = propagate_bc_with(inst.graph(), &bounds, &opts, &mut report);
            if inst.value_offset() != 0 {
                writeln!(out, "# trace values are shifted by {}", inst.value_offset())?;
            }
            for step in &report.trace {
                writeln!(out, "{step}")?;
            }
            result
        }
        (_, true) => bail!("--trace needs a fast route"),
        (r, false) => r.propagate(inst.graph(), &bounds),
    };
    match result {
        PropagationOutcome::Failure => {
            writeln!(out, "failure")?;
            Ok(EXIT_UNSAT)
        }
        PropagationOutcome::Consistent(b) => {
            for (name, d) in file.names().iter().zip(inst.denormalize_bounds(&b)) {
                writeln!(out, "{name} {d}")?;
            }
            Ok(0)
        }
    }
}

fn solve_cmd(out: &mut String, path: &str, config: SearchConfig) -> Result<u8> {
    let (file, inst) = load(path)?;
    let r = solve(&Model::from_instance(&inst), &config);
    let code = match &r.outcome {
        SolveOutcome::Solution(values) => {
            writeln!(out, "solution")?;
            for (name, v) in file.names().iter().zip(values) {
                writeln!(out, "{name} = {v}")?;
            }
            0
        }
        SolveOutcome::Unsatisfiable => {
            writeln!(out, "unsatisfiable")?;
            EXIT_UNSAT
        }
        SolveOutcome::NodeLimit => {
            writeln!(out, "node limit reached")?;
            EXIT_LIMIT
        }
    };
    writeln!(out, "nodes {} failures {}", r.nodes, r.failures)?;
    Ok(code)
}

fn dc_cmd(out: &mut String, path: &str, cap: u128) -> Result<u8> {
    let (file, inst) = load(path)?;
    match dc::enforce_dc(inst.graph(), &inst.raw_domains(), cap) {
        Err(e @ OracleError::Explosion { .. }) => {
            writeln!(out, "{e}")?;
            Ok(EXIT_LIMIT)
        }
        Ok(None) => {
            writeln!(out, "failure")?;
            Ok(EXIT_UNSAT)
        }
        Ok(Some(doms)) => {
            for (name, d) in file.names().iter().zip(doms) {
                let vals: Vec<String> = d.iter().map(|v| v.to_string()).collect();
                writeln!(out, "{name} {{{}}}", vals.join(","))?;
            }
            Ok(0)
        }
    }
}

fn encode_sat(out: &mut String, path: &str, json: bool) -> Result<u8> {
    let formula = parse_dimacs(&read_input(path)?)?;
    let inst = encode_3sat(&formula)?;
    let mut file = InstanceFile::from_instance(&inst);
    file.meta.insert("source".into(), "3-sat".into());
    file.meta
        .insert("vars".into(), formula.num_vars.to_string());
    file.meta
        .insert("clauses".into(), formula.clauses.len().to_string());
    write!(
        out,
        "{}",
        if json {
            file.to_json() + "\n"
        } else {
            file.to_text()
        }
    )?;
    Ok(0)
}

fn fuzz(out: &mut String, config: FuzzConfig) -> Result<u8> {
    let report = fuzz_differential(&config);
    for d in &report.discrepancies {
        writeln!(out, "{d}")?;
    }
    writeln!(out, "{}", report.summary())?;
    Ok(if report.is_clean() { 0 } else { EXIT_LIMIT })
}

fn bench(out: &mut String, max_n: usize, step: usize, repeats: usize, seed: u64) -> Result<()> {
    let routes = [
        Route::Fast(Mode::FullUniverse),
        Route::Fast(Mode::Compressed),
        Route::Reference,
        Route::BinarySearch,
    ];
    writeln!(
        out,
        "{:>5} {:>5} {:>16} {:>12}",
        "n", "d", "route", "mean_us"
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in (step..=max_n).step_by(step) {
        let d = 2 * n as i64;
        let cases: Vec<_> = (0..repeats)
            .map(|_| planted_instance(&mut rng, n, d, 0.3, n as i64 / 2).0)
            .collect();
        for route in routes {
            let mut total = Duration::ZERO;
            for c in &cases {
                let t = Instant::now();
                std::hint::black_box(route.propagate(&c.graph, &c.bounds));
                total += t.elapsed();
            }
            let mean = total.as_secs_f64() * 1e6 / repeats.max(1) as f64;
            writeln!(out, "{n:>5} {d:>5} {:>16} {mean:>12.1}", route.name())?;
        }
    }
    Ok(())
}

fn gen(out: &mut String, kind: GenKind, n: usize, d: i64, p: f64, seed: u64) -> Result<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = match kind {
        GenKind::Random => {
            let edges = random_dag(&mut rng, n, p);
            let b = random_bounds(&mut rng, n, d);
            let pairs: Vec<_> = b.iter().map(|x| (x.lb, x.ub)).collect();
            build_interval_instance(&pairs, &edges)?
        }
        GenKind::Schedule => gen_instruction_schedule(n, &random_dag(&mut rng, n, p), None)?,
    };
    write!(out, "{}", InstanceFile::from_instance(&inst).to_text())?;
    Ok(0)
}

fn run(out: &mut String, cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Propagate { file, route, trace } => propagate(out, &file, route, trace),
        Cmd::Solve {
            file,
            route,
            var_order,
            value_order,
            branching,
            node_limit,
            seed,
        } => {
            let config = SearchConfig {
                var_order: match var_order {
                    VarOrderArg::MinDomain => VarOrder::MinDomain,
                    VarOrderArg::Lex => VarOrder::Lex,
                    VarOrderArg::Topological => VarOrder::Topological,
                },
                value_order: match value_order {
                    ValueOrderArg::Asc => ValueOrder::Ascending,
                    ValueOrderArg::Desc => ValueOrder::Descending,
                },
                branching: match branching {
                    BranchingArg::Assign => Branching::AssignBound,
                    BranchingArg::Split => Branching::Split,
                },
                route: route.route(),
                node_limit,
                seed,
            };
            solve_cmd(out, &file, config)
        }
        Cmd::Dc { file, cap } => dc_cmd(out, &file, cap),
        Cmd::EncodeSat { cnf, json } => encode_sat(out, &cnf, json),
        Cmd::Fuzz {
            seed,
            count,
            max_n,
            max_d,
            edge_prob,
            no_dc,
        } => {
            if !(0.0..=1.0).contains(&edge_prob) {
                bail!("--edge-prob must be in [0, 1]");
            }
            fuzz(
                out,
                FuzzConfig {
                    seed,
                    count,
                    max_n: max_n as usize,
                    max_d,
                    edge_prob,
                    check_dc: !no_dc,
                    ..FuzzConfig::default()
                },
            )
        }
        Cmd::Bench {
            max_n,
            step,
            repeats,
            seed,
        } => {
            bench(out, max_n as usize, step as usize, repeats, seed)?;
            Ok(0)
        }
        Cmd::Gen {
            kind,
            n,
            d,
            edge_prob,
            seed,
        } => {
            if !(0.0..=1.0).contains(&edge_prob) || n == 0 || d < 1 {
                bail!("need n >= 1, d >= 1 and an edge probability in [0, 1]");
            }
            gen(out, kind, n, d, edge_prob, seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let code = match run(&mut out, cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    };
    // a closed pipe is not an error worth reporting
    let _ = io::stdout().lock().write_all(out.as_bytes());
    ExitCode::from(code)
}
