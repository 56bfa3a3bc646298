use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;

use cliq2_core::approx::{
    approx_join_traced, approx_meet_traced, deviation, DeviationKind, TestSets,
};
use cliq2_core::bounds::{
    self, check_appendix_b, parse_rational, schedule, smallest_passing_log2m, Theorem13Threshold,
};
use cliq2_core::checks;
use cliq2_core::circuit::{demorgan_convert, dmn_of_rail_circuit, Circuit};
use cliq2_core::double_tests::{enum_neg2, enum_pos2};
use cliq2_core::formula::{self, DmnFormula};
use cliq2_core::graphs::{DoubleGraph, EdgeIndex};
use cliq2_core::report::Report;
use cliq2_core::semantics::{
    self, equiv_formulas, Equivalence, Sampling, Semantics, TriAssignment,
};
use cliq2_core::sunflower::{pluck, PluckConfig};
use cliq2_core::{Error, Family, Mode, Params, Result};

/// Environment variable overriding the enumeration cap.
const CAP_ENV: &str = "CLIQ2_CAP";

#[derive(Parser)]
#[command(
    name = "cliq2",
    version,
    about = "Checks and experiments for the double clique approximation method"
)]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Opts {
    /// Number of vertices.
    #[arg(long, global = true)]
    m: Option<u32>,
    /// Clique size.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Largest number of vertices per side in approximator members.
    #[arg(long, global = true)]
    ell: Option<usize>,
    /// Sunflower petal count.
    #[arg(long, global = true)]
    p: Option<usize>,
    /// Plucking threshold; defaults to (p-1)^ell * ell!.
    #[arg(long = "L", global = true)]
    threshold: Option<BigUint>,
    #[arg(long, global = true, default_value = "relaxed")]
    mode: String,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for data-parallel steps; output does not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Truth tables for the three-valued connectives.
    #[arg(long, global = true, default_value = "absorbing")]
    semantics: String,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate positive or negative double tests.
    Enum {
        #[arg(value_enum)]
        which: Which,
    },
    /// Run one property suite.
    Check {
        #[arg(value_enum)]
        which: CheckName,
        /// Largest formula size for randomized formula suites.
        #[arg(long, default_value_t = 12)]
        max_nodes: usize,
        #[arg(long, default_value_t = 25)]
        max_gates: usize,
        #[arg(long, default_value_t = 10)]
        max_vars: usize,
        /// Restrict acceptance to POS2 (lemma9).
        #[arg(long)]
        positive_only: bool,
    },
    /// Pluck a family until its vertex norm is at most L.
    Pluck { input: String },
    /// Approximators on families, or AP of a formula.
    Approx {
        #[arg(value_enum)]
        op: ApproxOp,
        input: String,
        second: Option<String>,
    },
    /// Deviation sets of an approximator step or of a whole formula.
    Deviation {
        #[arg(value_enum)]
        kind: DeviationName,
        input: String,
        second: Option<String>,
    },
    /// Evaluate a formula under a three-valued assignment.
    Eval {
        input: String,
        /// `i=0|1|?` entries separated by commas; unlisted indices are `?`.
        #[arg(long, conflicts_with = "graph")]
        assign: Option<String>,
        /// A double graph standing for the assignment it encodes.
        #[arg(long)]
        graph: Option<String>,
    },
    /// Compare two formulas under `sim` or `approx`.
    Equiv {
        left: String,
        right: String,
        #[arg(long, value_enum, default_value = "sim")]
        relation: Relation,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Minimal members of a family.
    Base { input: String },
    /// Push negations of a circuit to its inputs.
    Demorgan { input: String },
    /// Read a rail circuit over `x1..xn`, `y1..yn` as a DMN formula, or run
    /// the brute-force CLIQ2 rail chain.
    Rail { input: Option<String> },
    /// Exact bound arithmetic.
    Bounds {
        #[arg(value_enum)]
        which: BoundsName,
        #[arg(long, default_value_t = 48)]
        log2m: u64,
        #[arg(long, default_value = "1/100")]
        epsilon: String,
        /// Circuit size to compare against the lower bound (thresholds).
        #[arg(long)]
        query: Option<BigUint>,
        /// Search for the smallest passing log2 m up to this value (appendixB).
        #[arg(long)]
        search: Option<u64>,
    },
    /// Experiments at desk scale.
    Experiment {
        #[arg(value_enum)]
        which: ExperimentName,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Pos2,
    Neg2,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckName {
    Lemma1,
    Disjointness,
    Conditions23,
    Lemma3,
    Lemma5,
    Lemma7,
    Lemma9,
    Lemma11,
    Lemma15,
    Lemma18,
    Lemma19,
    Lemma20,
    Lemma22,
    Theorem24,
    Pigeonhole,
}

#[derive(Clone, Copy, ValueEnum)]
enum ApproxOp {
    Join,
    Meet,
    Formula,
}

#[derive(Clone, Copy, ValueEnum)]
enum DeviationName {
    JoinPos,
    JoinNeg,
    MeetPos,
    MeetNeg,
    TotalPos,
    TotalNeg,
    Chains,
    Lemma12,
}

#[derive(Clone, Copy, ValueEnum)]
enum Relation {
    Sim,
    Approx,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundsName {
    #[value(name = "appendixB")]
    AppendixB,
    Schedule,
    Thresholds,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentName {
    Theorem13,
}

/// Per-command fallbacks for the parameter flags.
struct Defaults {
    m: u32,
    k: usize,
    ell: usize,
    p: usize,
    trials: usize,
}

const BASE: Defaults = Defaults {
    m: 5,
    k: 3,
    ell: 3,
    p: 4,
    trials: 100,
};

impl Opts {
    fn params(&self, d: Defaults) -> Result<Params> {
        let mut params = Params::new(
            self.m.unwrap_or(d.m),
            self.k.unwrap_or(d.k),
            self.ell.unwrap_or(d.ell),
            self.p.unwrap_or(d.p),
        )?;
        if let Some(l) = &self.threshold {
            params = params.with_threshold(l.clone())?;
        }
        params = params.with_mode(self.mode()?)?;
        if let Ok(cap) = std::env::var(CAP_ENV) {
            let cap = cap
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParams(format!("{CAP_ENV} must be an integer")))?;
            params = params.with_cap(cap);
        }
        Ok(params)
    }

    fn mode(&self) -> Result<Mode> {
        self.mode.parse()
    }

    fn semantics(&self) -> Result<Semantics> {
        self.semantics.parse()
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn trials(&self, d: &Defaults) -> usize {
        self.trials.unwrap_or(d.trials)
    }
}

/// Reads a path, or standard input for `-`.
fn read_input(path: &str) -> Result<String> {
    let io = |e: std::io::Error| Error::InvalidParams(format!("cannot read {path}: {e}"));
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io)
    }
}

fn read_family(path: &str) -> Result<Family> {
    Family::parse(&read_input(path)?)
}

fn read_formula(path: &str, m: u32) -> Result<DmnFormula> {
    DmnFormula::parse(&read_input(path)?, Some(EdgeIndex::new(m)?.n()))
}

fn read_circuit(path: &str) -> Result<Circuit> {
    let (c, warnings) = Circuit::parse(&read_input(path)?)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(c)
}

fn second(arg: &Option<String>, what: &str) -> Result<String> {
    arg.clone()
        .ok_or_else(|| Error::InvalidParams(format!("{what} needs a second input")))
}

fn family_lines(x: &Family) -> Vec<String> {
    x.iter().map(ToString::to_string).collect()
}

fn run(cli: &Cli) -> Result<Report> {
    let o = &cli.opts;
    match &cli.command {
        Command::Enum { which } => {
            let params = o.params(BASE)?;
            let mut r = Report::new(match which {
                Which::Pos2 => "enum-pos2",
                Which::Neg2 => "enum-neg2",
            });
            r.field("m", params.m).field("k", params.k);
            match which {
                Which::Pos2 => {
                    let pos = enum_pos2(&params)?;
                    r.field("count", pos.len()).big(
                        "formula",
                        bounds::pos2_count_formula(params.m as u64, params.k as u64),
                    );
                    r.section("members", family_lines(&pos));
                }
                Which::Neg2 => {
                    let neg = enum_neg2(&params)?;
                    r.field("count", neg.len());
                    r.section(
                        "members",
                        neg.pairs().iter().map(ToString::to_string).collect(),
                    );
                }
            }
            Ok(r)
        }
        Command::Check {
            which,
            max_nodes,
            max_gates,
            max_vars,
            positive_only,
        } => {
            let sem = o.semantics()?;
            let seed = o.seed();
            match which {
                CheckName::Lemma1 => checks::lemma1(&o.params(Defaults { m: 6, ..BASE })?),
                CheckName::Disjointness => checks::lemma1_disjointness(&o.params(BASE)?),
                CheckName::Pigeonhole => checks::pigeonhole(&o.params(BASE)?),
                CheckName::Conditions23 => {
                    let d = Defaults {
                        trials: 200,
                        ..BASE
                    };
                    checks::conditions23(&o.params(BASE)?, seed, o.trials(&d))
                }
                CheckName::Lemma3 => {
                    let d = Defaults {
                        ell: 2,
                        p: 3,
                        trials: 200,
                        ..BASE
                    };
                    checks::lemma3(
                        &o.params(Defaults {
                            ell: 2,
                            p: 3,
                            ..BASE
                        })?,
                        seed,
                        o.trials(&d),
                    )
                }
                CheckName::Lemma5 => {
                    checks::lemma5(o.ell.unwrap_or(2), o.p.unwrap_or(3), seed, o.trials(&BASE))
                }
                CheckName::Lemma7 => checks::lemma7(
                    &o.params(Defaults {
                        m: 12,
                        k: 5,
                        ..BASE
                    })?,
                    seed,
                    o.trials(&BASE),
                ),
                CheckName::Lemma9 => {
                    let params = o.params(Defaults {
                        ell: 2,
                        p: 3,
                        ..BASE
                    })?;
                    checks::lemma9(&params, seed, o.trials(&BASE), *positive_only)
                }
                CheckName::Lemma11 => {
                    let d = Defaults {
                        trials: 500,
                        ..BASE
                    };
                    checks::lemma11(&o.params(BASE)?, seed, o.trials(&d), *max_nodes)
                }
                CheckName::Lemma15 => {
                    let d = Defaults {
                        trials: 200,
                        ..BASE
                    };
                    checks::lemma15(o.m.unwrap_or(4), seed, o.trials(&d), *max_nodes, sem)
                }
                CheckName::Lemma18 => checks::lemma18(&o.params(BASE)?),
                CheckName::Lemma19 => checks::lemma19(o.m.unwrap_or(4), seed, o.trials(&BASE), sem),
                CheckName::Lemma20 => checks::lemma20(&o.params(BASE)?, sem),
                CheckName::Lemma22 => {
                    let d = Defaults {
                        trials: 1000,
                        ..BASE
                    };
                    checks::lemma22(seed, o.trials(&d), *max_gates, *max_vars)
                }
                CheckName::Theorem24 => checks::theorem24(&o.params(BASE)?, sem),
            }
        }
        Command::Pluck { input } => {
            let params = o.params(BASE)?;
            let x = read_family(input)?;
            let (out, trace) = pluck(&x, &PluckConfig::from_params(&params))?;
            let mut r = Report::new("pluck");
            r.field("p", params.p)
                .field("ell", params.ell)
                .big("L", &params.threshold);
            r.field("initial_norm", trace.initial_norm)
                .field("steps", trace.steps.len())
                .field("dropped", trace.dropped());
            let mut lines = Vec::new();
            for (i, s) in trace.steps.iter().enumerate() {
                lines.push(format!(
                    "step {} side={} {} count={}->{}",
                    i + 1,
                    s.side,
                    s.sunflower,
                    s.count_before,
                    s.count_after
                ));
                for rep in &s.replaced {
                    match &rep.after {
                        Some(a) => lines.push(format!("  {} => {a}", rep.before)),
                        None => lines.push(format!("  {} => dropped (clash)", rep.before)),
                    }
                }
            }
            r.section("steps", lines)
                .field("result_size", out.len())
                .section("result", family_lines(&out));
            Ok(r)
        }
        Command::Approx {
            op,
            input,
            second: other,
        } => {
            let params = o.params(BASE)?;
            let mut r = Report::new("approx");
            r.big("L", &params.threshold)
                .field("ell", params.ell)
                .field("p", params.p);
            match op {
                ApproxOp::Formula => {
                    let phi = read_formula(input, params.m)?;
                    let ap = formula::approx_set(&phi, &params)?;
                    r.field("op", "formula")
                        .field("formula", phi.to_string())
                        .field("cs", phi.cs());
                    r.section("result", ap.lines());
                }
                ApproxOp::Join | ApproxOp::Meet => {
                    let x = read_family(input)?;
                    let y = read_family(&second(other, "approx")?)?;
                    let join = matches!(op, ApproxOp::Join);
                    let (out, trace) = if join {
                        approx_join_traced(&x, &y, &params)?
                    } else {
                        approx_meet_traced(&x, &y, &params)?
                    };
                    r.field("op", if join { "join" } else { "meet" })
                        .field("pluck_steps", trace.steps.len())
                        .field("dropped", trace.dropped())
                        .field("result_size", out.len())
                        .section("result", family_lines(&out));
                }
            }
            Ok(r)
        }
        Command::Deviation {
            kind,
            input,
            second: other,
        } => {
            let params = o.params(BASE)?;
            let tests = TestSets::new(&params)?;
            let step = |k: DeviationKind| -> Result<Report> {
                let x = read_family(input)?;
                let y = read_family(&second(other, "deviation")?)?;
                let d = deviation(k, &x, &y, &tests)?;
                let mut r = Report::new("deviation");
                r.field("kind", k.name())
                    .big("count", &d.count)
                    .field(
                        "bound",
                        format!("{} {}", d.relation.symbol(), bounds::fmt_rational(&d.bound)),
                    )
                    .field("bound_applicable", d.bound_applicable)
                    .field("bound_degenerate", d.degenerate)
                    .field("bound_holds", d.bound_holds())
                    .section("members", d.members.lines());
                if k == DeviationKind::JoinPos {
                    r.require(d.members.is_empty());
                }
                Ok(r)
            };
            match kind {
                DeviationName::JoinPos => step(DeviationKind::JoinPos),
                DeviationName::JoinNeg => step(DeviationKind::JoinNeg),
                DeviationName::MeetPos => step(DeviationKind::MeetPos),
                DeviationName::MeetNeg => step(DeviationKind::MeetNeg),
                DeviationName::TotalPos => {
                    formula::total_deviation_pos(&read_formula(input, params.m)?, &tests)
                }
                DeviationName::TotalNeg => {
                    formula::total_deviation_neg(&read_formula(input, params.m)?, &tests)
                }
                DeviationName::Lemma12 => {
                    formula::lemma12_report(&read_formula(input, params.m)?, &tests)
                }
                DeviationName::Chains => {
                    let phi = read_formula(input, params.m)?;
                    let c = formula::deviation_chains(&phi, &tests)?;
                    let mut r = Report::new("chains");
                    r.field("formula", phi.to_string());
                    for (i, n) in c.checked.iter().enumerate() {
                        r.field(format!("checked_item{}", i + 1), *n);
                    }
                    r.field("violations", c.violations.len());
                    r.section(
                        "violations",
                        c.violations
                            .iter()
                            .map(|v| format!("item {} at {}: {}", v.item, v.subterm, v.witness))
                            .collect(),
                    );
                    r.require(c.holds());
                    Ok(r)
                }
            }
        }
        Command::Eval {
            input,
            assign,
            graph,
        } => {
            let m = o.m.unwrap_or(BASE.m);
            let index = EdgeIndex::new(m)?;
            let phi = read_formula(input, m)?;
            let t = match (assign, graph) {
                (_, Some(g)) => TriAssignment::of_graph(&g.parse::<DoubleGraph>()?, &index)?,
                (Some(a), None) => TriAssignment::parse(a, index.n())?,
                (None, None) => TriAssignment::undefined(index.n()),
            };
            let sem = o.semantics()?;
            let mut r = Report::new("eval");
            r.field("formula", phi.to_string())
                .field("assignment", t.to_string())
                .field("graph", t.graph(&index)?.to_string())
                .field("semantics", sem.to_string())
                .field("value", semantics::eval(&phi, &t, sem)?.to_string());
            Ok(r)
        }
        Command::Equiv {
            left,
            right,
            relation,
            samples,
        } => {
            let m = o.m.unwrap_or(BASE.m);
            let (a, b) = (read_formula(left, m)?, read_formula(right, m)?);
            let rel = match relation {
                Relation::Sim => Equivalence::Sim,
                Relation::Approx => Equivalence::Approx,
            };
            let sem = o.semantics()?;
            let v = equiv_formulas(
                &a,
                &b,
                m,
                rel,
                sem,
                Sampling {
                    seed: o.seed(),
                    samples: *samples,
                },
            )?;
            let mut r = Report::new("equiv");
            r.field(
                "relation",
                if rel == Equivalence::Sim {
                    "sim"
                } else {
                    "approx"
                },
            )
            .field("semantics", sem.to_string())
            .field("coverage", v.describe())
            .field("equivalent", v.equivalent);
            if let Some(c) = &v.counterexample {
                r.field("counterexample", c.assignment.to_string())
                    .field("left", c.left.to_string())
                    .field("right", c.right.to_string());
            }
            r.require(v.equivalent);
            Ok(r)
        }
        Command::Base { input } => {
            let x = read_family(input)?;
            let b = semantics::base(&x);
            let mut r = Report::new("base");
            r.field("input_size", x.len())
                .field("base_size", b.len())
                .section("base", family_lines(&b));
            Ok(r)
        }
        Command::Demorgan { input } => {
            let b = read_circuit(input)?;
            let star = demorgan_convert(&b);
            let mut r = Report::new("demorgan");
            r.field("size", b.size())
                .field("converted_size", star.size());
            r.field("size_within_double", star.size() <= 2 * b.size());
            let same = b.variables().len() > 20 || {
                let vars = b.variables();
                let n = vars.len();
                let mut ok = true;
                for bits in 0u32..1 << n {
                    let value = |x: &str| {
                        vars.iter()
                            .position(|v| v == x)
                            .map(|i| bits >> (n - 1 - i) & 1 == 1)
                    };
                    if b.eval_with(value)? != star.eval_with(value)? {
                        ok = false;
                        break;
                    }
                }
                ok
            };
            r.field("truth_tables_agree", same);
            r.section(
                "circuit",
                star.to_string().lines().map(String::from).collect(),
            );
            r.require(star.size() <= 2 * b.size() && same);
            Ok(r)
        }
        Command::Rail { input } => match input {
            Some(path) => {
                let m = o.m.unwrap_or(BASE.m);
                let c = read_circuit(path)?;
                let psi = dmn_of_rail_circuit(&c, m)?;
                let mut r = Report::new("rail");
                r.field("circuit_size", c.size())
                    .field("cs", psi.cs())
                    .field("formula", psi.to_string());
                Ok(r)
            }
            None => checks::theorem24(&o.params(BASE)?, o.semantics()?),
        },
        Command::Bounds {
            which,
            log2m,
            epsilon,
            query,
            search,
        } => match which {
            BoundsName::AppendixB => {
                let eps = parse_rational(epsilon)?;
                let rep = check_appendix_b(*log2m, &eps)?;
                let mut r = Report::new("appendixB");
                r.field("log2m", *log2m)
                    .field("epsilon", bounds::fmt_rational(&eps));
                for res in &rep.results {
                    let line = res.to_string();
                    let rest = line
                        .split_once(" = ")
                        .map(|(_, v)| v.to_string())
                        .unwrap_or(line);
                    r.field(res.name, rest);
                }
                r.field("failing", rep.failing().join(","));
                if let Some(max) = search {
                    let found = smallest_passing_log2m(&eps, *max)?;
                    r.field(
                        "smallest_passing_log2m",
                        found.map_or("none".to_string(), |t| t.to_string()),
                    );
                }
                r.require(rep.all_hold());
                Ok(r)
            }
            BoundsName::Schedule => {
                let s = schedule(*log2m, o.mode()?)?;
                let mut r = Report::new("schedule");
                r.field("log2m", *log2m)
                    .big("m", &s.m)
                    .big("ell", &s.ell)
                    .big("k", &s.k)
                    .big("p", &s.p);
                match &s.threshold {
                    Some(l) => r.big("L", l),
                    None => r.field("log2_L", s.log2_l().bounds(64)?.display(4)),
                };
                r.field("chain_holds", s.chain_holds);
                Ok(r)
            }
            BoundsName::Thresholds => {
                let params = o.params(BASE)?;
                let b = bounds::bound_expressions(&params);
                let mut r = Report::new("thresholds");
                r.field("params", params.to_string())
                    .big("L", &params.threshold)
                    .big("pos2_count", &b.pos2_count)
                    .big("coloring_pairs", &b.coloring_pairs)
                    .big("join_neg", bounds::fmt_rational(&b.join_neg))
                    .big("meet_pos", &b.meet_pos)
                    .field("meet_pos_degenerate", b.meet_pos_degenerate)
                    .big("meet_neg", bounds::fmt_rational(&b.meet_neg))
                    .big("quarter_pairs", bounds::fmt_rational(&b.quarter_pairs))
                    .field("bound_applicable", params.bound_applicable());
                let s = schedule(*log2m, Mode::Relaxed)?;
                let t = Theorem13Threshold::of_schedule(&s);
                r.field("schedule_log2m", *log2m)
                    .field("lower_bound_log2", t.log2_bounds(64)?.display(4));
                if let Some(n) = query {
                    r.big("query", n).field("query_meets_bound", t.is_met(n)?);
                }
                Ok(r)
            }
        },
        Command::Experiment {
            which: ExperimentName::Theorem13,
        } => checks::theorem13(&o.params(BASE)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.opts.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(r) => {
            if cli.opts.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&r.to_json()).expect("report serializes")
                );
            } else {
                print!("{}", r.to_text());
            }
            if r.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e @ Error::Premise { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
