//! Command-line front end: file loading, the analysis subcommands, result
//! artifacts, and the `--check` self-verification mode that replays bounded
//! oracles against every emitted automaton.
//!
//! Exit codes: 0/1 carry verdicts (`NONEMPTY`/`EMPTY`, `IN`/`OUT`), 2 is a
//! malformed input with a line/column diagnostic, 3 an internal invariant
//! breach.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{ompa_emptiness, prestar, preplus, reduce_target};
use crate::config_auto::ConfigAutomaton;
use crate::error::{Error, Result};
use crate::gpa::gpa_emptiness;
use crate::liveness::repeated_reach;
use crate::ltl::{global_check, global_check_buchi, parse_ltl, GlobalCheck};
use crate::ompa::{Configuration, Ompa};
use crate::oracle;
use crate::text;

/// A parsed command-line invocation.
#[derive(Parser, Debug)]
#[command(
    name = "ompa-mc",
    about = "Saturation-based reachability and LTL model checking for ordered multi-pushdown automata",
    version
)]
pub struct Invocation {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct OracleBounds {
    /// Step budget for the bounded oracles of --check mode.
    #[arg(long, default_value_t = 12)]
    pub max_steps: usize,
    /// Height budget for the bounded oracles of --check mode.
    #[arg(long, default_value_t = 6)]
    pub max_height: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide language emptiness of a machine (%ompa) or GPA (%gpa).
    /// Prints NONEMPTY (exit 0) or EMPTY (exit 1).
    Empty {
        input: PathBuf,
        /// Re-verify the verdict with the bounded exploration oracle.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        bounds: OracleBounds,
    },
    /// Compute Pre* of the configurations recognized by an M-automaton.
    Prestar {
        machine: PathBuf,
        target: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write every intermediate automaton under this directory.
        #[arg(long)]
        dump_dir: Option<PathBuf>,
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        bounds: OracleBounds,
    },
    /// Compute Pre+ (at least one step) of a recognized configuration set.
    Preplus {
        machine: PathBuf,
        target: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        dump_dir: Option<PathBuf>,
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        bounds: OracleBounds,
    },
    /// Decide membership of a configuration in an automaton file.
    /// Prints IN (exit 0) or OUT (exit 1).
    Member {
        automaton: PathBuf,
        /// Configuration, e.g. "q | A B _ | _".
        configuration: String,
    },
    /// Configurations from which some infinite run visits a state infinitely
    /// often.
    Repeated {
        machine: PathBuf,
        #[arg(long)]
        state: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        dump_dir: Option<PathBuf>,
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        bounds: OracleBounds,
    },
    /// Global omega-regular check: write the violating and satisfying
    /// configuration sets of a formula (or of a Buchi automaton describing
    /// the violating traces).
    Ltl {
        machine: PathBuf,
        #[arg(long, conflicts_with = "buchi")]
        formula: Option<String>,
        /// Buchi automaton over the VIOLATING traces, bypassing translation.
        #[arg(long)]
        buchi: Option<PathBuf>,
        #[arg(long)]
        violating: Option<PathBuf>,
        #[arg(long)]
        satisfying: Option<PathBuf>,
        #[arg(long)]
        dump_dir: Option<PathBuf>,
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        bounds: OracleBounds,
    },
    /// Render any input file as GraphViz DOT.
    Dot {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Parse and validate a file, reporting the first problem found.
    Validate { input: PathBuf },
}

/// Stage logging, enabled by setting `OMPA_MC_LOG` to any value.
fn log(msg: impl AsRef<str>) {
    if std::env::var_os("OMPA_MC_LOG").is_some() {
        eprintln!("ompa-mc: {}", msg.as_ref());
    }
}

/// Runs an invocation; the returned value is the process exit code.
pub fn run(inv: &Invocation) -> Result<i32> {
    match &inv.command {
        Command::Empty { input, check, bounds } => cmd_empty(input, *check, bounds),
        Command::Prestar { machine, target, output, dump_dir, check, bounds } => cmd_pre(
            machine,
            target,
            output.as_deref(),
            dump_dir.as_deref(),
            *check,
            bounds,
            false,
        ),
        Command::Preplus { machine, target, output, dump_dir, check, bounds } => cmd_pre(
            machine,
            target,
            output.as_deref(),
            dump_dir.as_deref(),
            *check,
            bounds,
            true,
        ),
        Command::Member { automaton, configuration } => cmd_member(automaton, configuration),
        Command::Repeated { machine, state, output, dump_dir, check, bounds } => {
            cmd_repeated(machine, state, output.as_deref(), dump_dir.as_deref(), *check, bounds)
        }
        Command::Ltl {
            machine,
            formula,
            buchi,
            violating,
            satisfying,
            dump_dir,
            check,
            bounds,
        } => cmd_ltl(
            machine,
            formula.as_deref(),
            buchi.as_deref(),
            violating.as_deref(),
            satisfying.as_deref(),
            dump_dir.as_deref(),
            *check,
            bounds,
        ),
        Command::Dot { input, output } => cmd_dot(input, output.as_deref()),
        Command::Validate { input } => cmd_validate(input),
    }
}

pub fn load_ompa(path: &Path) -> Result<Ompa> {
    let src = std::fs::read_to_string(path)?;
    let m = text::parse_ompa(&src)?;
    m.validate()?;
    log(format!(
        "loaded machine {} ({} stacks, {} states, {} transitions)",
        path.display(),
        m.n,
        m.state_count(),
        m.t1.len() + m.t2.len()
    ));
    Ok(m)
}

fn load_mauto_for(path: &Path, m: &Ompa) -> Result<ConfigAutomaton> {
    let src = std::fs::read_to_string(path)?;
    let a = text::parse_config_automaton(&src)?;
    text::align_mauto(&a, m)
}

struct Dumper {
    dir: Option<PathBuf>,
    stage: usize,
}

impl Dumper {
    fn new(dir: Option<&Path>) -> Result<Dumper> {
        if let Some(d) = dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Dumper { dir: dir.map(|d| d.to_path_buf()), stage: 0 })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        if let Some(dir) = &self.dir {
            let path = dir.join(format!("{:02}-{}", self.stage, name));
            std::fs::write(path, content)?;
            self.stage += 1;
        }
        Ok(())
    }
}

fn cmd_empty(input: &Path, check: bool, bounds: &OracleBounds) -> Result<i32> {
    let src = std::fs::read_to_string(input)?;
    let nonempty = match text::sniff_header(&src)? {
        text::Header::Ompa => {
            let m = text::parse_ompa(&src)?;
            m.validate()?;
            let verdict = ompa_emptiness(&m)?;
            if check {
                check_emptiness(&m, verdict, bounds)?;
            }
            verdict
        }
        text::Header::Gpa => {
            let base = input.parent().unwrap_or_else(|| Path::new("."));
            let g = text::parse_gpa(&src, base)?;
            gpa_emptiness(&g)?
        }
        _ => return Err(Error::input("emptiness takes an %ompa or %gpa file")),
    };
    if nonempty {
        println!("NONEMPTY");
        Ok(0)
    } else {
        println!("EMPTY");
        Ok(1)
    }
}

fn check_emptiness(m: &Ompa, verdict: bool, bounds: &OracleBounds) -> Result<()> {
    let ex = m.bounded_explore(&m.initial_config(), bounds.max_steps, bounds.max_height)?;
    let found = ex.configs.iter().any(|c| m.is_final_config(c));
    if found && !verdict {
        return Err(Error::internal(
            "bounded exploration found an accepting run but the verdict was EMPTY",
        ));
    }
    if ex.complete() && !found && verdict {
        return Err(Error::internal(
            "exhaustive exploration found no accepting run but the verdict was NONEMPTY",
        ));
    }
    if ex.complete() || found {
        eprintln!("check: emptiness verdict confirmed by the bounded oracle");
    } else {
        eprintln!("check: bounded oracle inconclusive (exploration truncated)");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_pre(
    machine: &Path,
    target: &Path,
    output: Option<&Path>,
    dump_dir: Option<&Path>,
    check: bool,
    bounds: &OracleBounds,
    plus: bool,
) -> Result<i32> {
    let m = load_ompa(machine)?;
    let a = load_mauto_for(target, &m)?;
    let mut dump = Dumper::new(dump_dir)?;
    dump.write("machine.ompa", &text::ompa_to_string(&m))?;
    dump.write("target.mauto", &text::config_automaton_to_string(&a))?;
    if dump.dir.is_some() && !plus {
        let (reduced, _) = reduce_target(&m, &a)?;
        dump.write("reduced.ompa", &text::ompa_to_string(&reduced))?;
    }
    let started = std::time::Instant::now();
    let result = if plus { preplus(&m, &a)? } else { prestar(&m, &a)? };
    log(format!(
        "{} finished in {:?} ({} states)",
        if plus { "preplus" } else { "prestar" },
        started.elapsed(),
        result.fsa().state_count()
    ));
    dump.write("result.mauto", &text::config_automaton_to_string(&result))?;
    let rendered = text::config_automaton_to_string(&result);
    match output {
        Some(path) => std::fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }
    if check {
        check_pre(&m, &a, &result, bounds, plus)?;
    }
    Ok(0)
}

fn check_pre(
    m: &Ompa,
    target: &ConfigAutomaton,
    result: &ConfigAutomaton,
    bounds: &OracleBounds,
    plus: bool,
) -> Result<()> {
    let height = oracle::sensible_height(m, bounds.max_height, 100_000);
    let oracle = oracle::backward_reach(m, height, &mut |c| target.member(c))?;
    for c in &oracle.universe {
        let expect = if plus {
            let mut hit = false;
            for (_, succ) in m.step(c)? {
                if succ.max_height() <= bounds.max_height && oracle.members.contains(&succ) {
                    hit = true;
                    break;
                }
            }
            hit
        } else {
            oracle.members.contains(c)
        };
        let got = result.member(c)?;
        if expect && !got {
            return Err(Error::internal(format!(
                "bounded oracle member missing from the result: {}",
                text::configuration_to_string(c, m)
            )));
        }
        if oracle.exhaustive && !expect && got {
            return Err(Error::internal(format!(
                "result accepts a configuration the exhaustive oracle rejects: {}",
                text::configuration_to_string(c, m)
            )));
        }
    }
    if oracle.exhaustive {
        eprintln!("check: result matches the exhaustive bounded oracle");
    } else {
        eprintln!("check: oracle not exhaustive at these bounds; soundness direction verified");
    }
    Ok(())
}

fn cmd_member(automaton: &Path, configuration: &str) -> Result<i32> {
    let src = std::fs::read_to_string(automaton)?;
    let a = text::parse_config_automaton(&src)?;
    let c = parse_config_for_auto(configuration, &a)?;
    let inside = a.member(&c)?;
    if inside {
        println!("IN");
        Ok(0)
    } else {
        println!("OUT");
        Ok(1)
    }
}

fn parse_config_for_auto(src: &str, a: &ConfigAutomaton) -> Result<Configuration> {
    let stacks = a
        .stacks()
        .ok_or_else(|| Error::input("membership of tuple configurations needs an M-automaton"))?;
    let parts: Vec<&str> = src.split('|').map(|p| p.trim()).collect();
    if parts.len() != stacks + 1 {
        return Err(Error::input(format!(
            "a configuration of this automaton has a state and {stacks} stacks"
        )));
    }
    let state = a
        .owner_by_name(parts[0])
        .ok_or_else(|| Error::input(format!("unknown state `{}`", parts[0])))?;
    let mut words = Vec::with_capacity(stacks);
    for part in &parts[1..] {
        let mut word = Vec::new();
        for tok in part.split_whitespace() {
            word.push(a.fsa().alphabet.lookup(tok)?);
        }
        if word.last() != Some(&crate::symbol::BOTTOM)
            || word[..word.len().saturating_sub(1)].contains(&crate::symbol::BOTTOM)
        {
            return Err(Error::input("each stack ends with exactly one `_`"));
        }
        words.push(word);
    }
    Ok(Configuration { state, stacks: words })
}

fn cmd_repeated(
    machine: &Path,
    state: &str,
    output: Option<&Path>,
    dump_dir: Option<&Path>,
    check: bool,
    bounds: &OracleBounds,
) -> Result<i32> {
    let m = load_ompa(machine)?;
    let qf = m
        .find_state(state)
        .ok_or_else(|| Error::input(format!("unknown state `{state}`")))?;
    let mut dump = Dumper::new(dump_dir)?;
    dump.write("machine.ompa", &text::ompa_to_string(&m))?;
    let started = std::time::Instant::now();
    let result = repeated_reach(&m, qf)?;
    log(format!("repeated reachability finished in {:?}", started.elapsed()));
    dump.write("result.mauto", &text::config_automaton_to_string(&result))?;
    let rendered = text::config_automaton_to_string(&result);
    match output {
        Some(path) => std::fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }
    if check {
        check_repeated(&m, &BTreeSet::from([qf]), &result, bounds)?;
    }
    Ok(0)
}

fn check_repeated(
    m: &Ompa,
    targets: &BTreeSet<crate::fsa::StateId>,
    result: &ConfigAutomaton,
    bounds: &OracleBounds,
) -> Result<()> {
    let height = oracle::sensible_height(m, bounds.max_height.min(3), 5_000);
    let (members, exhaustive) =
        oracle::lasso_members(m, height, targets, bounds.max_steps, bounds.max_height, 200_000)?;
    for c in oracle::enumerate_configs(m, height) {
        let got = result.member(&c)?;
        let expect = members.contains(&c);
        if expect && !got {
            return Err(Error::internal(format!(
                "lasso oracle member missing from the result: {}",
                text::configuration_to_string(&c, m)
            )));
        }
        if exhaustive && !expect && got {
            return Err(Error::internal(format!(
                "result accepts a configuration without a bounded lasso: {}",
                text::configuration_to_string(&c, m)
            )));
        }
    }
    if exhaustive {
        eprintln!("check: result matches the exhaustive lasso oracle");
    } else {
        eprintln!("check: lasso oracle not exhaustive; soundness direction verified");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_ltl(
    machine: &Path,
    formula: Option<&str>,
    buchi: Option<&Path>,
    violating_out: Option<&Path>,
    satisfying_out: Option<&Path>,
    dump_dir: Option<&Path>,
    check: bool,
    bounds: &OracleBounds,
) -> Result<i32> {
    let m = load_ompa(machine)?;
    let mut dump = Dumper::new(dump_dir)?;
    dump.write("machine.ompa", &text::ompa_to_string(&m))?;
    let chk: GlobalCheck = match (formula, buchi) {
        (Some(f), None) => {
            let parsed = parse_ltl(f)?;
            global_check(&m, &parsed)?
        }
        (None, Some(path)) => {
            let src = std::fs::read_to_string(path)?;
            let b = text::parse_buchi(&src)?;
            dump.write("violations.buchi", &text::buchi_to_string(&b))?;
            global_check_buchi(&m, &b)?
        }
        _ => return Err(Error::input("provide exactly one of --formula or --buchi")),
    };
    dump.write("violating.mauto", &text::config_automaton_to_string(&chk.violating))?;
    dump.write("satisfying.mauto", &text::config_automaton_to_string(&chk.satisfying))?;
    if let Some(path) = violating_out {
        std::fs::write(path, text::config_automaton_to_string(&chk.violating))?;
    }
    if let Some(path) = satisfying_out {
        std::fs::write(path, text::config_automaton_to_string(&chk.satisfying))?;
    }
    if violating_out.is_none() && satisfying_out.is_none() {
        print!("{}", text::config_automaton_to_string(&chk.violating));
    }
    if check {
        check_ltl(&m, formula, buchi, &chk, bounds)?;
    }
    Ok(0)
}

fn check_ltl(
    m: &Ompa,
    formula: Option<&str>,
    buchi: Option<&Path>,
    chk: &GlobalCheck,
    bounds: &OracleBounds,
) -> Result<()> {
    let b = match (formula, buchi) {
        (Some(f), None) => {
            let parsed = parse_ltl(f)?;
            let mut props: BTreeSet<String> = parsed.props();
            for set in m.labels.values() {
                props.extend(set.iter().cloned());
            }
            let props: Vec<String> = props.into_iter().collect();
            crate::ltl::ltl_to_buchi(&parsed.negated(), &props)?
        }
        (None, Some(path)) => {
            let src = std::fs::read_to_string(path)?;
            text::parse_buchi(&src)?
        }
        _ => unreachable!("validated by the caller"),
    };
    let labeled = crate::ltl::self_label(m);
    let (product, repeating) = crate::ltl::buchi_product(&labeled, &b)?;
    let bcount = b.state_count().max(1) as u32;
    let height = oracle::sensible_height(m, bounds.max_height.min(3), 2_000);
    let mut all_exhaustive = true;
    for c in oracle::enumerate_configs(m, height) {
        // violating iff some initial pairing has a lasso through the
        // repeating set
        let mut expect = false;
        let mut definitive = true;
        for &b0 in &b.initials {
            let pc = Configuration {
                state: crate::fsa::StateId(c.state.0 * bcount + b0.0),
                stacks: c.stacks.clone(),
            };
            let (found, exhaustive) = oracle::exists_lasso(
                &product,
                &pc,
                &repeating,
                bounds.max_steps,
                bounds.max_height,
                200_000,
            )?;
            if found {
                expect = true;
                break;
            }
            definitive &= exhaustive;
        }
        let in_viol = chk.violating.member(&c)?;
        let in_sat = chk.satisfying.member(&c)?;
        if in_viol == in_sat {
            return Err(Error::internal(format!(
                "violating/satisfying do not partition at {}",
                text::configuration_to_string(&c, m)
            )));
        }
        if expect && !in_viol {
            return Err(Error::internal(format!(
                "bounded product lasso missing from the violating set: {}",
                text::configuration_to_string(&c, m)
            )));
        }
        if definitive && !expect && in_viol {
            return Err(Error::internal(format!(
                "violating set accepts a configuration without a bounded product lasso: {}",
                text::configuration_to_string(&c, m)
            )));
        }
        all_exhaustive &= definitive;
    }
    if all_exhaustive {
        eprintln!("check: violating set matches the exhaustive product lasso oracle");
    } else {
        eprintln!("check: product lasso oracle not exhaustive; soundness direction verified");
    }
    Ok(())
}

fn cmd_dot(input: &Path, output: Option<&Path>) -> Result<i32> {
    let src = std::fs::read_to_string(input)?;
    let name = input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("automaton")
        .to_string();
    let dot = match text::sniff_header(&src)? {
        text::Header::Fsa => text::fsa_to_dot(&text::parse_fsa(&src)?, &name),
        text::Header::MAuto(_) | text::Header::PAuto => {
            let a = text::parse_config_automaton(&src)?;
            text::fsa_to_dot(a.fsa(), &name)
        }
        text::Header::Ompa => text::ompa_to_dot(&text::parse_ompa(&src)?, &name),
        text::Header::Gpa => {
            let base = input.parent().unwrap_or_else(|| Path::new("."));
            text::gpa_to_dot(&text::parse_gpa(&src, base)?, &name)
        }
        text::Header::Buchi => text::buchi_to_dot(&text::parse_buchi(&src)?, &name),
    };
    match output {
        Some(path) => std::fs::write(path, dot)?,
        None => print!("{dot}"),
    }
    Ok(0)
}

fn cmd_validate(input: &Path) -> Result<i32> {
    let src = std::fs::read_to_string(input)?;
    match text::sniff_header(&src)? {
        text::Header::Fsa => {
            text::parse_fsa(&src)?;
        }
        text::Header::MAuto(_) | text::Header::PAuto => {
            text::parse_config_automaton(&src)?;
        }
        text::Header::Ompa => {
            let m = text::parse_ompa(&src)?;
            m.validate()?;
        }
        text::Header::Gpa => {
            let base = input.parent().unwrap_or_else(|| Path::new("."));
            text::parse_gpa(&src, base)?;
        }
        text::Header::Buchi => {
            text::parse_buchi(&src)?;
        }
    }
    println!("OK");
    Ok(0)
}

/// What the shipped corpus promises.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Expectation {
    Nonempty,
    Empty,
}

pub struct Fixture {
    /// Path relative to the crate root.
    pub path: &'static str,
    pub expect: Expectation,
}

/// The shipped fixtures with machine-checkable emptiness expectations.
pub fn corpus_manifest() -> Vec<Fixture> {
    vec![
        Fixture { path: "fixtures/anbncn.ompa", expect: Expectation::Nonempty },
        Fixture { path: "fixtures/counters.ompa", expect: Expectation::Nonempty },
        Fixture { path: "fixtures/table1.gpa", expect: Expectation::Nonempty },
        Fixture { path: "fixtures/finals-unreachable.ompa", expect: Expectation::Empty },
        Fixture { path: "fixtures/no-transitions.ompa", expect: Expectation::Empty },
        Fixture { path: "fixtures/lasso-selfloop.ompa", expect: Expectation::Empty },
        Fixture { path: "fixtures/lasso-two-stack.ompa", expect: Expectation::Empty },
        Fixture { path: "fixtures/lasso-bottom.ompa", expect: Expectation::Empty },
        Fixture { path: "fixtures/lasso-growing.ompa", expect: Expectation::Empty },
        Fixture { path: "fixtures/lasso-drain.ompa", expect: Expectation::Nonempty },
        Fixture { path: "fixtures/ltl-loop-escape.ompa", expect: Expectation::Empty },
        Fixture { path: "fixtures/ltl-toggle.ompa", expect: Expectation::Empty },
        Fixture { path: "fixtures/ltl-handoff.ompa", expect: Expectation::Nonempty },
        Fixture { path: "fixtures/ltl-fair.ompa", expect: Expectation::Empty },
        Fixture { path: "fixtures/ltl-deadend.ompa", expect: Expectation::Nonempty },
    ]
}

/// Root of the shipped corpus (the crate directory).
pub fn corpus_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}
