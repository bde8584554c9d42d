//! `ko7`: parse, step, normalize and audit KO7 terms from the shell.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ko7::confluence::{
    critical_pair_coverage, local_join_sweep, non_join_witness_full, unique_nf_sweep,
    COVERAGE_MIN_SIZE,
};
use ko7::measure::{check_decrease_sweep, measure3};
use ko7::nogo::{
    boundary_report, catalog, duplication_stress_check, family_by_name, find_violation, kbo_search,
    poly_search, CounterexampleReport, HuntOutcome, CATALOG_MAX_SIZE,
};
use ko7::normalize::{normalize_full, normalize_safe, reaches_target, FullRunResult, DEFAULT_FUEL};
use ko7::rewrite::RelationKind;
use ko7::term::Term;

const USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "ko7", version, about = "KO7 operator-only rewrite calculus")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Echo the canonical form of a term.
    Parse(TermInput),
    /// List the one-step reducts of a term.
    Step {
        #[command(flatten)]
        input: TermInput,
        /// full-root, safe, safe-ctx or full.
        #[arg(long, default_value = "safe", value_parser = relation)]
        relation: RelationKind,
    },
    /// Reduce a term to normal form.
    Normalize {
        #[command(flatten)]
        input: TermInput,
        /// Print every step.
        #[arg(long)]
        trace: bool,
        /// safe (guarded root rules) or full (all rules, any position).
        #[arg(long, default_value = "safe", value_parser = ["safe", "full"])]
        relation: String,
        /// Step limit for the full relation.
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
    /// Print the delta flag, the rec multiset and the weighted size.
    Measure(TermInput),
    /// Decide whether TERM reduces to the normal form TARGET.
    Reaches { term: String, target: String },
    /// Run a sweep or search.
    #[command(subcommand)]
    Check(Check),
    /// Print a fixed witness.
    #[command(subcommand)]
    Witness(Witness),
}

#[derive(Args)]
struct TermInput {
    /// S-expression such as "(merge void (delta void))".
    #[arg(required_unless_present = "file")]
    term: Option<String>,
    /// Read one term per line instead.
    #[arg(long, conflicts_with = "term")]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct Sweep {
    #[arg(long, default_value_t = 6)]
    max_size: usize,
}

#[derive(Subcommand)]
enum Check {
    /// Every safe root step lowers the measure.
    Decrease(Sweep),
    /// Every one-step fork joins.
    LocalJoin {
        #[command(flatten)]
        sweep: Sweep,
        #[arg(long, default_value = "safe", value_parser = relation)]
        relation: RelationKind,
        /// Terms explored per side of each fork.
        #[arg(long, default_value_t = 200)]
        budget: usize,
    },
    /// Every term has exactly one safe normal form.
    UniqueNf(Sweep),
    /// Hunt a counterexample for one catalog family, or all of them.
    Nogo {
        #[arg(long, default_value_t = CATALOG_MAX_SIZE)]
        max_size: usize,
        /// Family name or id; `measure3` hunts the guarded relation instead.
        #[arg(long)]
        family: Option<String>,
    },
    /// LPO orients every rule, the bare precedence rank does not.
    Lpo {
        #[arg(long, default_value_t = CATALOG_MAX_SIZE)]
        max_size: usize,
    },
    /// Fit the node-count growth of rec-succ against the duplicated operand.
    Stress(Sweep),
    /// Root shapes and their unique targets.
    Coverage {
        #[arg(long, default_value_t = COVERAGE_MIN_SIZE)]
        max_size: usize,
    },
    /// Exhaustive linear-interpretation search.
    Poly {
        #[arg(long, default_value_t = 3)]
        bound: u64,
    },
    /// Exhaustive symbol-weight search.
    Kbo {
        #[arg(long, default_value_t = 3)]
        bound: u64,
    },
}

#[derive(Subcommand)]
enum Witness {
    /// The eqw fork whose full normal forms differ.
    Nonjoin,
}

fn relation(s: &str) -> Result<RelationKind, String> {
    RelationKind::from_name(s).ok_or_else(|| format!("unknown relation `{s}`"))
}

/// Text or JSON, chosen once per run.
struct Out {
    json: bool,
}

impl Out {
    fn emit<T: Serialize>(&self, value: &T, text: impl FnOnce() -> String) {
        if self.json {
            println!(
                "{}",
                serde_json::to_string(value).expect("reports serialize")
            );
        } else {
            print!("{}", text());
        }
    }
}

fn verdict(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn parse_term(src: &str) -> Result<Term, String> {
    src.parse().map_err(|e| format!("`{src}`: {e}"))
}

fn read_terms(input: &TermInput) -> Result<Vec<Term>, String> {
    match (&input.term, &input.file) {
        (Some(t), _) => Ok(vec![parse_term(t)?]),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            text.lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| parse_term(l).map_err(|e| format!("line {}: {e}", i + 1)))
                .collect()
        }
        (None, None) => unreachable!("clap requires one of the two"),
    }
}

fn hunt_text(o: &HuntOutcome) -> String {
    match o {
        HuntOutcome::Counterexample(CounterexampleReport {
            family,
            witness,
            value_before,
            value_after,
            verdict,
        }) => format!(
            "{family}: counterexample {witness} ({value_before} -> {value_after}, {verdict:?})\n"
        ),
        HuntOutcome::NoViolation {
            family,
            instances_checked,
            max_size,
        } => {
            format!(
                "{family}: no violation in {instances_checked} instances up to size {max_size}\n"
            )
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let out = Out { json: cli.json };
    match cli.command {
        Command::Parse(input) => {
            for t in read_terms(&input)? {
                out.emit(&t, || format!("{t}\n"));
            }
        }
        Command::Step { input, relation } => {
            for t in read_terms(&input)? {
                let steps = relation.steps(&t);
                out.emit(&steps, || {
                    if steps.is_empty() {
                        return format!("{t} is {relation}-normal\n");
                    }
                    steps.iter().map(|w| format!("{w}\n")).collect()
                });
            }
        }
        Command::Normalize {
            input,
            trace,
            relation,
            fuel,
        } => {
            let mut ok = true;
            for t in read_terms(&input)? {
                if relation == "safe" {
                    let tr = normalize_safe(&t).map_err(|e| e.to_string())?;
                    out.emit(&tr, || {
                        let mut s = String::new();
                        if trace {
                            for st in &tr.steps {
                                s += &format!("{} ({} -> {})\n", st.witness, st.before, st.after);
                            }
                        }
                        s + &format!("{}\n", tr.final_term)
                    });
                } else {
                    let r = normalize_full(&t, fuel);
                    out.emit(&r, || match &r {
                        FullRunResult::Normalized {
                            steps, normal_form, ..
                        } => {
                            let mut s = String::new();
                            if trace {
                                s = steps.iter().map(|w| format!("{w}\n")).collect();
                            }
                            s + &format!("{normal_form}\n")
                        }
                        FullRunResult::FuelExhausted {
                            last_term,
                            steps_taken,
                        } => {
                            format!("fuel exhausted after {steps_taken} steps at {last_term}\n")
                        }
                    });
                    ok &= matches!(r, FullRunResult::Normalized { .. });
                }
            }
            return Ok(verdict(ok));
        }
        Command::Measure(input) => {
            for t in read_terms(&input)? {
                let m = measure3(&t);
                out.emit(&m, || {
                    format!("dflag {}\nkappaM {}\ntau {}\n", m.dflag, m.kappa_m, m.tau)
                });
            }
        }
        Command::Reaches { term, target } => {
            let (t, c) = (parse_term(&term)?, parse_term(&target)?);
            let yes = reaches_target(&t, &c).map_err(|e| e.to_string())?;
            out.emit(&yes, || format!("{yes}\n"));
        }
        Command::Check(check) => return Ok(run_check(&out, check)),
        Command::Witness(Witness::Nonjoin) => {
            let r = non_join_witness_full().map_err(|e| e.to_string())?;
            out.emit(&r, || r.to_string());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_check(out: &Out, check: Check) -> ExitCode {
    match check {
        Check::Decrease(Sweep { max_size }) => {
            let r = check_decrease_sweep(max_size);
            out.emit(&r, || {
                let mut s = format!(
                    "{} safe root steps up to size {max_size}, {} violations\n",
                    r.checked,
                    r.violations.len()
                );
                for (rule, c) in &r.per_rule {
                    s += &format!(
                        "  {rule}: dflag {} kappaM {} tau {}\n",
                        c.dflag, c.kappa_m, c.tau
                    );
                }
                for w in &r.violations {
                    s += &format!("violation: {w}\n");
                }
                s
            });
            verdict(r.passed())
        }
        Check::LocalJoin {
            sweep,
            relation,
            budget,
        } => {
            let r = local_join_sweep(sweep.max_size, relation, budget);
            out.emit(&r, || {
                let mut s = format!(
                    "{} {relation} forks up to size {}: {} joined, {} inconclusive, {} violations\n",
                    r.forks_checked,
                    r.max_size,
                    r.joined,
                    r.inconclusive.len(),
                    r.violations.len()
                );
                for v in &r.violations {
                    s += &format!("violation: {} / {}\n", v.fork.left, v.fork.right);
                }
                s
            });
            verdict(r.passed())
        }
        Check::UniqueNf(Sweep { max_size }) => {
            let r = unique_nf_sweep(max_size);
            out.emit(&r, || {
                let mut s = format!(
                    "{} terms up to size {max_size}, {} with more than one normal form\n",
                    r.terms_checked,
                    r.violations.len()
                );
                for v in &r.violations {
                    s += &format!("violation: {}\n", v.term);
                }
                s
            });
            verdict(r.passed())
        }
        Check::Nogo { max_size, family } => {
            let families = match family {
                None => catalog(),
                Some(name) => match family_by_name(&name) {
                    Some(f) => vec![f],
                    None => {
                        eprintln!("error: unknown family `{name}`");
                        return ExitCode::from(USAGE);
                    }
                },
            };
            let mut ok = true;
            let outcomes: Vec<HuntOutcome> = families
                .iter()
                .map(|f| {
                    // the canonical measure is only claimed on the guarded relation
                    let canonical = f.name == "measure3";
                    let rel = if canonical {
                        RelationKind::SafeRoot
                    } else {
                        RelationKind::FullRoot
                    };
                    let o = find_violation(f, rel, max_size);
                    ok &= o.counterexample().is_some() != canonical;
                    o
                })
                .collect();
            if let [one] = outcomes.as_slice() {
                out.emit(one, || hunt_text(one));
            } else {
                out.emit(&outcomes, || outcomes.iter().map(hunt_text).collect());
            }
            verdict(ok)
        }
        Check::Lpo { max_size } => {
            let r = boundary_report(max_size);
            out.emit(&r, || {
                let mut s = format!(
                    "lpo: {} of {} precedences orient all {} rule instances up to size {}\n",
                    r.lpo.orienting, r.lpo.tried, r.lpo.instances, r.lpo.max_size
                );
                if let Some(p) = &r.lpo.found {
                    s += &format!("  first: {p}\n");
                }
                s + &hunt_text(&r.head_precedence)
            });
            verdict(r.passed())
        }
        Check::Stress(Sweep { max_size }) => {
            let r = duplication_stress_check(max_size);
            out.emit(&r, || {
                let fit = match (r.slope, r.intercept) {
                    (Some(m), Some(c)) => {
                        format!("size(after) - size(before) = {m} * size(s) + {c}")
                    }
                    _ => "no exact linear fit".to_string(),
                };
                format!(
                    "{} rec-succ instances up to size {max_size}\n  fit: {fit}\n  \
                     fit failures {}, unit-redex failures {}, no strict drop {}\n",
                    r.instances, r.fit_failures, r.unit_redex_failures, r.no_strict_drop
                )
            });
            verdict(r.passed())
        }
        Check::Coverage { max_size } => {
            let r = critical_pair_coverage(max_size);
            out.emit(&r, || {
                r.rows
                    .iter()
                    .map(|(row, c)| {
                        format!(
                            "{:<40} instances {:>5}  on target {:>5}  blocked {:>5}  off target {}\n",
                            row.shape(),
                            c.instances,
                            c.on_target,
                            c.blocked,
                            c.off_target
                        )
                    })
                    .collect()
            });
            verdict(r.passed())
        }
        Check::Poly { bound } => {
            let r = poly_search(bound);
            out.emit(&r, || {
                format!(
                    "{} linear interpretations with coefficients up to {bound}: {} orient every rule\n  \
                     {} classes, {} refuted by scan, {} by tower witnesses\n",
                    r.assignments, r.orienting, r.classes, r.refuted_by_scan, r.refuted_by_tower
                )
            });
            verdict(r.passed())
        }
        Check::Kbo { bound } => {
            let r = kbo_search(bound);
            out.emit(&r, || {
                let mut s = format!(
                    "{} weight assignments up to {bound}: {} orient every rule, {} fail on rec-succ\n",
                    r.assignments, r.orienting, r.refuted_by_rec_succ
                );
                if let Some(w) = &r.sample_witness {
                    s += &format!("  e.g. {w}\n");
                }
                s
            });
            verdict(r.passed())
        }
    }
}

fn init_workers() -> Result<(), String> {
    let Ok(v) = std::env::var("KO7_WORKERS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or(format!("KO7_WORKERS: bad value `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_workers().and_then(|()| run(cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(USAGE)
        }
    }
}
