//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured evidence. Random instances are generated from fixed seeds and
//! filtered so the desk-scale oracles are provably exhaustive before any
//! verdict is compared.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ompa_mc::analysis::{
    make_push_visible, ompa_emptiness, ompa_to_gpa, prestar, preplus, restrict,
    single_config_target,
};
use ompa_mc::cli::{corpus_manifest, corpus_root, load_ompa, Expectation};
use ompa_mc::config_auto::{BooleanOp, ConfigAutomaton, ConfigKind};
use ompa_mc::fsa::StateId;
use ompa_mc::gpa::{gpa_emptiness, saturate, EffectiveLanguage};
use ompa_mc::liveness::repeated_reach;
use ompa_mc::ltl::{eval_lasso, global_check, ltl_to_buchi, parse_ltl, Ltl};
use ompa_mc::ompa::{Configuration, Ompa, T1, T2};
use ompa_mc::oracle;
use ompa_mc::symbol::{Symbol, SymbolTable, BOTTOM};
use ompa_mc::text;

fn fixture_machines() -> Vec<(String, Ompa)> {
    let root = corpus_root();
    corpus_manifest()
        .into_iter()
        .filter(|f| f.path.ends_with(".ompa"))
        .map(|f| (f.path.to_string(), load_ompa(&root.join(f.path)).expect("fixture loads")))
        .collect()
}

// ---------------------------------------------------------------------------
// random machine generation

struct MachineSpec {
    stacks: usize,
    max_states: usize,
    max_symbols: usize,
    t1_rules: usize,
    t2_rules: usize,
    /// weight of two-symbol pushes on stack 1, in percent
    wide_push: u32,
}

fn random_ompa(rng: &mut StdRng, spec: &MachineSpec) -> Ompa {
    let input = SymbolTable::new();
    let mut stack = SymbolTable::with_bottom();
    let nsyms = rng.gen_range(1..=spec.max_symbols);
    for i in 0..nsyms {
        stack.intern(&format!("S{i}"));
    }
    let mut m = Ompa::new(spec.stacks, input, stack);
    let nstates = rng.gen_range(1..=spec.max_states);
    for i in 0..nstates {
        m.add_state(format!("q{i}"));
    }
    let syms: Vec<Symbol> = m.stack.symbols_no_bottom().collect();
    let pick_sym = |rng: &mut StdRng| syms[rng.gen_range(0..syms.len())];
    let pick_state = |rng: &mut StdRng| StateId(rng.gen_range(0..nstates) as u32);
    m.q0 = pick_state(rng);
    m.gamma0 = pick_sym(rng);
    for q in m.states() {
        if rng.gen_bool(0.4) {
            m.finals.insert(q);
        }
    }
    for _ in 0..spec.t1_rules {
        let from = pick_state(rng);
        let to = pick_state(rng);
        let pop = if rng.gen_bool(0.25) { BOTTOM } else { pick_sym(rng) };
        let push1 = if pop == BOTTOM {
            if rng.gen_bool(0.5) {
                vec![BOTTOM]
            } else {
                vec![pick_sym(rng), BOTTOM]
            }
        } else {
            let roll = rng.gen_range(0..100u32);
            if roll < 55 {
                Vec::new()
            } else if roll < 100 - spec.wide_push {
                vec![pick_sym(rng)]
            } else {
                vec![pick_sym(rng), pick_sym(rng)]
            }
        };
        let upper = (0..spec.stacks - 1)
            .map(|_| if rng.gen_bool(0.25) { Some(pick_sym(rng)) } else { None })
            .collect();
        m.t1.insert(T1 { from, pop, label: None, to, push1, upper });
    }
    for _ in 0..spec.t2_rules {
        if spec.stacks < 2 {
            break;
        }
        m.t2.insert(T2 {
            from: pick_state(rng),
            stack: rng.gen_range(2..=spec.stacks),
            pop: pick_sym(rng),
            label: None,
            to: pick_state(rng),
            push1: pick_sym(rng),
        });
    }
    m.validate().expect("generated machine is well-formed");
    m
}

fn random_target(rng: &mut StdRng, m: &Ompa) -> ConfigAutomaton {
    let mut a = ConfigAutomaton::empty(
        ConfigKind::M { stacks: m.n },
        m.state_names().to_vec(),
        m.stack.clone(),
    );
    let extras = rng.gen_range(1..=3usize);
    let mut pool: Vec<StateId> = (0..m.state_count() as u32).map(StateId).collect();
    for i in 0..extras {
        pool.push(a.fsa_mut().add_state(format!("x{i}")));
    }
    let symbols: Vec<Symbol> = a.fsa().alphabet.symbols().collect();
    let edges = rng.gen_range(2..=8usize);
    for _ in 0..edges {
        let from = pool[rng.gen_range(0..pool.len())];
        let to = pool[rng.gen_range(0..pool.len())];
        let s = symbols[rng.gen_range(0..symbols.len())];
        a.fsa_mut().add_transition(from, Some(s), to);
    }
    for &q in &pool {
        if rng.gen_bool(0.3) {
            a.fsa_mut().finals.insert(q);
        }
    }
    a
}

// ---------------------------------------------------------------------------

#[test]
fn criterion_table1_reproduction() {
    let started = Instant::now();
    let root = corpus_root();
    let path = root.join("fixtures/table1.gpa");
    let src = std::fs::read_to_string(&path).expect("fixture exists");
    let g = text::parse_gpa(&src, path.parent().unwrap()).expect("fixture parses");

    assert!(gpa_emptiness(&g).expect("emptiness decides"), "the language contains eps");
    let sat = saturate(&g, &g.final_target(), g.default_budget()).expect("saturation");
    let p0 = g.find_state("p0").unwrap();
    assert!(
        sat.auto.member_word(p0, &[BOTTOM]).unwrap(),
        "(p0, bottom) must be in Pre*(F x eps)"
    );
    assert!(sat.oracle_calls > 0, "the machine-defined pushed language must be queried");
    // the machine route really contributes: a configuration whose membership
    // needs the pushed triple-counter words
    let p2 = g.find_state("p2").unwrap();
    let s = |n: &str| g.stack.get(n).unwrap();
    assert!(sat.auto.member_word(p2, &[s("g2"), s("g1"), s("g0"), BOTTOM]).unwrap());
    assert!(!sat.auto.member_word(p2, &[s("g2"), s("g0"), BOTTOM]).unwrap());
    // size bound on the machine-defined languages: O(|m|^2) with c = 6
    let counters = load_ompa(&root.join("fixtures/counters.ompa")).unwrap();
    for lang in &g.langs {
        if let EffectiveLanguage::OmpaReversed { machine, .. } = lang {
            assert!(machine.size() <= 6 * counters.size() * counters.size());
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "criterion demands < 5 s, took {elapsed:?}");
    println!(
        "[PASS] table1 reproduction: NONEMPTY, (p0,_) in Pre*, {} oracle queries, {elapsed:?}",
        sat.oracle_calls
    );
}

#[test]
fn criterion_pda_regression() {
    let mut rng = StdRng::seed_from_u64(0x0ddba11);
    let spec = MachineSpec {
        stacks: 1,
        max_states: 4,
        max_symbols: 3,
        t1_rules: 6,
        t2_rules: 0,
        wide_push: 12,
    };
    let mut done = 0;
    let mut attempts = 0;
    let query_height = 4;
    while done < 50 {
        attempts += 1;
        assert!(attempts < 3000, "instance generation must converge");
        let m = random_ompa(&mut rng, &spec);
        let target = random_target(&mut rng, &m);
        let oracle_height = query_height + 1;
        let oracle = oracle::backward_reach(&m, oracle_height, &mut |c| target.member(c))
            .expect("oracle runs");
        if !oracle.exhaustive {
            continue; // exhaustiveness asserted per instance: resample
        }
        let pre = prestar(&m, &target).expect("prestar");
        for c in &oracle.universe {
            if c.max_height() > query_height {
                continue;
            }
            assert_eq!(
                pre.member(c).unwrap(),
                oracle.members.contains(c),
                "mismatch on {c:?} (instance {done})"
            );
        }
        done += 1;
    }
    println!(
        "[PASS] pda regression: 50 exhaustive instances ({attempts} sampled), zero mismatches"
    );
}

#[test]
fn criterion_ompa_emptiness() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut done2 = 0;
    let mut done3 = 0;
    let mut attempts = 0;
    let mut slowest = std::time::Duration::ZERO;
    while done2 < 30 || done3 < 10 {
        attempts += 1;
        assert!(attempts < 6000, "instance generation must converge");
        let stacks = if done2 < 30 { 2 } else { 3 };
        let spec = MachineSpec {
            stacks,
            max_states: 3,
            max_symbols: 3,
            t1_rules: 5,
            t2_rules: 3,
            wide_push: 12,
        };
        let m = random_ompa(&mut rng, &spec);
        let ex = m.bounded_explore(&m.initial_config(), 12, 6).expect("explore");
        if !ex.complete() {
            continue; // exploration must be provably exhaustive
        }
        let expect = ex.configs.iter().any(|c| m.is_final_config(c));
        let started = Instant::now();
        let got = ompa_emptiness(&m).expect("emptiness");
        let elapsed = started.elapsed();
        slowest = slowest.max(elapsed);
        assert!(elapsed.as_secs() < 60, "one instance exceeded 60 s");
        assert_eq!(got, expect, "emptiness mismatch on a {stacks}-stack instance");
        if stacks == 2 {
            done2 += 1;
        } else {
            done3 += 1;
        }
    }
    // handcrafted families
    let root = corpus_root();
    let anbncn = load_ompa(&root.join("fixtures/anbncn.ompa")).unwrap();
    assert!(ompa_emptiness(&anbncn).unwrap());
    let unreachable = load_ompa(&root.join("fixtures/finals-unreachable.ompa")).unwrap();
    assert!(!ompa_emptiness(&unreachable).unwrap());
    println!(
        "[PASS] ompa emptiness: 30 two-stack + 10 three-stack exhaustive instances \
         ({attempts} sampled) plus handcrafted families, zero mismatches, slowest {slowest:?}"
    );
}

#[test]
fn criterion_prestar_algebra() {
    let height = 3;
    let mut checked = 0;
    for (name, m) in fixture_machines() {
        // a target with some structure: the all-empty configuration at every
        // final state, or at the first state when there are no finals
        let mut targets = Vec::new();
        if m.finals.is_empty() {
            targets.push(single_config_target(&m, StateId(0)).unwrap());
        } else {
            for &f in &m.finals {
                targets.push(single_config_target(&m, f).unwrap());
            }
        }
        for target in targets {
            let pre = prestar(&m, &target).expect("prestar");
            let plus = preplus(&m, &target).expect("preplus");
            let pre_set = oracle::accepted_configs(&pre, height).unwrap();
            let plus_set = oracle::accepted_configs(&plus, height).unwrap();
            // idempotence
            let pre2 = prestar(&m, &pre).expect("prestar of prestar");
            let pre2_set = oracle::accepted_configs(&pre2, height).unwrap();
            assert_eq!(pre_set, pre2_set, "prestar idempotence fails on {name}");
            // pre+ below pre*
            assert!(plus_set.is_subset(&pre_set), "preplus not within prestar on {name}");
            // pre* = target ∪ pre+
            let union = target.boolean(&plus, BooleanOp::Union).unwrap();
            let union_set = oracle::accepted_configs(&union, height).unwrap();
            assert_eq!(pre_set, union_set, "prestar != target ∪ preplus on {name}");
            checked += 1;
        }
    }
    println!(
        "[PASS] pre*/pre+ algebra: idempotence, inclusion and decomposition exact on \
         {checked} fixture targets at heights <= {height}"
    );
}

/// Pairs `(end state, first stacks, pushed word)` reachable by the
/// stack-restricted machine in at most `steps` moves.
fn restricted_summaries(
    m: &Ompa,
    start: &Configuration,
    steps: usize,
    height: usize,
) -> BTreeSet<(StateId, Vec<Vec<Symbol>>, Vec<Symbol>)> {
    let restricted = restrict(m, m.n - 1).unwrap();
    let ex = restricted.bounded_explore(start, steps, height).unwrap();
    assert_eq!(ex.height_truncations, 0, "height bound must not clip the enumeration");
    let base = &start.stacks[m.n - 1];
    ex.configs
        .iter()
        .map(|c| {
            let full = &c.stacks[m.n - 1];
            assert!(full.ends_with(base), "stack n only grows in the restriction");
            let pushed: Vec<Symbol> =
                full[..full.len() - base.len()].iter().rev().copied().collect();
            (c.state, c.stacks[..m.n - 1].to_vec(), pushed)
        })
        .collect()
}

/// Pairs `(end state, stacks, word read)` reachable by the push-visible
/// projection in at most `steps` moves.
fn projection_summaries(
    p: &Ompa,
    start: &Configuration,
    steps: usize,
    height: usize,
) -> BTreeSet<(StateId, Vec<Vec<Symbol>>, Vec<Symbol>)> {
    let mut seen: BTreeSet<(Configuration, Vec<Symbol>)> = BTreeSet::new();
    let mut frontier = vec![(start.clone(), Vec::new())];
    seen.insert(frontier[0].clone());
    for _ in 0..steps {
        let mut next = Vec::new();
        for (c, word) in frontier {
            for (t, succ) in p.step(&c).unwrap() {
                assert!(succ.max_height() <= height, "height bound must not clip");
                let mut nw = word.clone();
                if let Some(x) = t.label() {
                    nw.push(x);
                }
                let node = (succ, nw);
                if seen.insert(node.clone()) {
                    next.push(node);
                }
            }
        }
        frontier = next;
    }
    seen.into_iter().map(|(c, w)| (c.state, c.stacks, w)).collect()
}

#[test]
fn criterion_push_visible_correspondence() {
    let mut runs = 0;
    for (name, m) in fixture_machines() {
        let p = make_push_visible(&m).unwrap();
        // starting points: the initial configuration and the all-empty
        // configuration of every state
        let mut starts = vec![m.initial_config()];
        for q in m.states() {
            starts.push(Configuration { state: q, stacks: vec![vec![BOTTOM]; m.n] });
        }
        for start in starts {
            let lhs = restricted_summaries(&m, &start, 10, 14);
            let pstart = Configuration {
                state: start.state,
                stacks: start.stacks[..m.n - 1].to_vec(),
            };
            let rhs = projection_summaries(&p, &pstart, 10, 14);
            assert_eq!(lhs, rhs, "correspondence fails on {name} from {start:?}");
            runs += lhs.len();
        }
    }
    println!(
        "[PASS] push-visible correspondence: {runs} run summaries match in both directions \
         across all fixtures (runs of length <= 10)"
    );
}

#[test]
fn criterion_repeated_reachability() {
    // handcrafted lasso fixtures
    let root = corpus_root();
    let handcrafted = [
        ("fixtures/lasso-selfloop.ompa", "qf"),
        ("fixtures/lasso-two-stack.ompa", "q1"),
        ("fixtures/lasso-bottom.ompa", "qf"),
        ("fixtures/lasso-growing.ompa", "q"),
        ("fixtures/lasso-drain.ompa", "q"),
    ];
    let mut compared = 0;
    for (path, state) in handcrafted {
        let m = load_ompa(&root.join(path)).unwrap();
        let qf = m.find_state(state).unwrap();
        let auto = repeated_reach(&m, qf).expect("repeated reach");
        let (members, exhaustive) =
            oracle::lasso_members(&m, 2, &BTreeSet::from([qf]), 14, 7, 100_000).unwrap();
        assert!(exhaustive, "handcrafted instance {path} must be oracle-exhaustive");
        let got = oracle::accepted_configs(&auto, 2).unwrap();
        assert_eq!(got, members, "mismatch on {path}");
        compared += members.len();
    }
    // random small machines
    let mut rng = StdRng::seed_from_u64(0x1a550);
    let spec = MachineSpec {
        stacks: 2,
        max_states: 3,
        max_symbols: 2,
        t1_rules: 4,
        t2_rules: 2,
        wide_push: 10,
    };
    let mut done = 0;
    let mut attempts = 0;
    while done < 20 {
        attempts += 1;
        assert!(attempts < 4000, "instance generation must converge");
        let m = random_ompa(&mut rng, &spec);
        let qf = StateId(rng.gen_range(0..m.state_count()) as u32);
        let (members, exhaustive) =
            oracle::lasso_members(&m, 2, &BTreeSet::from([qf]), 12, 6, 60_000).unwrap();
        if !exhaustive {
            continue;
        }
        let auto = repeated_reach(&m, qf).expect("repeated reach");
        let got = oracle::accepted_configs(&auto, 2).unwrap();
        assert_eq!(got, members, "mismatch on random instance {done} (qf={qf})");
        done += 1;
    }
    // merging every state into the target accepts exactly the configurations
    // with any infinite run
    let m = load_ompa(&root.join("fixtures/ltl-handoff.ompa")).unwrap();
    let mut union: Option<ConfigAutomaton> = None;
    for q in m.states() {
        let a = repeated_reach(&m, q).unwrap();
        union = Some(match union {
            None => a,
            Some(u) => u.boolean(&a, BooleanOp::Union).unwrap(),
        });
    }
    let all_states: BTreeSet<StateId> = m.states().collect();
    let (any_run, exhaustive) =
        oracle::lasso_members(&m, 2, &all_states, 14, 7, 100_000).unwrap();
    assert!(exhaustive);
    let got = oracle::accepted_configs(&union.unwrap(), 2).unwrap();
    assert_eq!(got, any_run, "merged targets must equal the any-infinite-run set");
    println!(
        "[PASS] repeated reachability: 5 handcrafted + 20 random exhaustive instances \
         ({attempts} sampled), {compared} member configurations, zero mismatches"
    );
}

fn random_formula(rng: &mut StdRng, size: usize, props: &[&str]) -> Ltl {
    if size <= 1 {
        return match rng.gen_range(0..4u32) {
            0 => Ltl::True,
            1 => Ltl::False,
            _ => Ltl::Prop(props[rng.gen_range(0..props.len())].to_string()),
        };
    }
    let op = rng.gen_range(0..8u32);
    if op < 4 || size < 3 {
        let inner = Box::new(random_formula(rng, size - 1, props));
        return match op % 4 {
            0 => Ltl::Not(inner),
            1 => Ltl::Next(inner),
            2 => Ltl::Finally(inner),
            _ => Ltl::Globally(inner),
        };
    }
    let left = rng.gen_range(1..=size - 2);
    let a = Box::new(random_formula(rng, left, props));
    let b = Box::new(random_formula(rng, size - 1 - left, props));
    match op {
        4 => Ltl::And(a, b),
        5 => Ltl::Or(a, b),
        6 => Ltl::Until(a, b),
        _ => Ltl::Release(a, b),
    }
}

#[test]
fn criterion_ltl_translation_vs_evaluator() {
    let props = ["p", "q"];
    let prop_names: Vec<String> = props.iter().map(|s| s.to_string()).collect();
    let mut rng = StdRng::seed_from_u64(0x17e5);
    let mut checked = 0;
    while checked < 200 {
        let size = rng.gen_range(1..=6usize);
        let f = random_formula(&mut rng, size, &props);
        assert!(f.size() <= 6);
        let b = ltl_to_buchi(&f, &prop_names).expect("translation");
        let ulen = rng.gen_range(0..=4usize);
        let vlen = rng.gen_range(1..=4usize);
        let u: Vec<u64> = (0..ulen).map(|_| rng.gen_range(0..4u64)).collect();
        let v: Vec<u64> = (0..vlen).map(|_| rng.gen_range(0..4u64)).collect();
        let expect = eval_lasso(&f, &prop_names, &u, &v).expect("evaluation");
        let got = b.accepts_lasso(&u, &v);
        assert_eq!(got, expect, "formula {f} on u={u:?} v={v:?}");
        checked += 1;
    }
    println!(
        "[PASS] ltl translation: 200 random (formula, lasso word) pairs agree with the \
         periodic-word evaluator"
    );
}

#[test]
fn criterion_ltl_global_check() {
    let root = corpus_root();
    let labeled: Vec<&str> = vec![
        "fixtures/lasso-selfloop.ompa",
        "fixtures/lasso-two-stack.ompa",
        "fixtures/lasso-bottom.ompa",
        "fixtures/lasso-growing.ompa",
        "fixtures/lasso-drain.ompa",
        "fixtures/ltl-loop-escape.ompa",
        "fixtures/ltl-toggle.ompa",
        "fixtures/ltl-handoff.ompa",
        "fixtures/ltl-fair.ompa",
        "fixtures/ltl-deadend.ompa",
    ];
    assert_eq!(labeled.len(), 10);
    let mut rng = StdRng::seed_from_u64(0x61c4);
    let canonical = ["true", "false", "G p", "F q", "p U q", "X p"];
    let props = ["p", "q"];
    let mut checks = 0;
    let mut configs_checked = 0;
    for path in labeled {
        let m = load_ompa(&root.join(path)).unwrap();
        let mut formulas: Vec<Ltl> = canonical.iter().map(|s| parse_ltl(s).unwrap()).collect();
        for _ in 0..4 {
            let size = rng.gen_range(2..=6);
            formulas.push(random_formula(&mut rng, size, &props));
        }
        for f in formulas {
            let chk = global_check(&m, &f).expect("global check");
            let height = oracle::sensible_height(&m, 2, 2_000);
            let viol = oracle::accepted_configs(&chk.violating, height).unwrap();
            let sat = oracle::accepted_configs(&chk.satisfying, height).unwrap();
            // the two sets partition the bounded universe
            let universe: BTreeSet<Configuration> =
                oracle::enumerate_configs(&m, height).into_iter().collect();
            assert!(viol.is_disjoint(&sat), "overlap on {path} for {f}");
            let union: BTreeSet<Configuration> = viol.union(&sat).cloned().collect();
            assert_eq!(union, universe, "not a partition on {path} for {f}");
            // oracle comparison on the product
            let b = {
                let mut all: BTreeSet<String> = f.props();
                for set in m.labels.values() {
                    all.extend(set.iter().cloned());
                }
                let names: Vec<String> = all.into_iter().collect();
                ltl_to_buchi(&f.negated(), &names).unwrap()
            };
            let labeled_m = ompa_mc::ltl::self_label(&m);
            let (product, repeating) = ompa_mc::ltl::buchi_product(&labeled_m, &b).unwrap();
            let bcount = b.state_count().max(1) as u32;
            for c in &universe {
                let mut expect = false;
                let mut definitive = true;
                for &b0 in &b.initials {
                    let pc = Configuration {
                        state: StateId(c.state.0 * bcount + b0.0),
                        stacks: c.stacks.clone(),
                    };
                    let (found, def) =
                        oracle::exists_lasso(&product, &pc, &repeating, 14, 7, 60_000).unwrap();
                    if found {
                        expect = true;
                        break;
                    }
                    definitive &= def;
                }
                let got = viol.contains(c);
                if expect {
                    assert!(got, "missing violation on {path} for {f} at {c:?}");
                } else if definitive {
                    assert!(!got, "spurious violation on {path} for {f} at {c:?}");
                }
                configs_checked += 1;
            }
            checks += 1;
        }
    }
    println!(
        "[PASS] ltl global check: {checks} formula/fixture pairs partition the bounded \
         universe and match the product lasso oracle on {configs_checked} configurations"
    );
}

#[test]
fn criterion_determinism() {
    let artifacts = || -> String {
        let root = corpus_root();
        let mut out = String::new();
        for fixture in corpus_manifest() {
            let path = root.join(fixture.path);
            let src = std::fs::read_to_string(&path).unwrap();
            match text::sniff_header(&src).unwrap() {
                text::Header::Ompa => {
                    let m = text::parse_ompa(&src).unwrap();
                    out.push_str(&text::ompa_to_string(&m));
                    let nonempty = ompa_emptiness(&m).unwrap();
                    out.push_str(if nonempty { "NONEMPTY\n" } else { "EMPTY\n" });
                    if let Some(&f) = m.finals.iter().next() {
                        let target = single_config_target(&m, f).unwrap();
                        let pre = prestar(&m, &target).unwrap();
                        out.push_str(&text::config_automaton_to_string(&pre));
                    }
                }
                text::Header::Gpa => {
                    let g = text::parse_gpa(&src, path.parent().unwrap()).unwrap();
                    let sat = saturate(&g, &g.final_target(), g.default_budget()).unwrap();
                    out.push_str(&text::config_automaton_to_string(&sat.auto));
                    out.push_str(&format!("added={:?}\n", sat.added));
                }
                _ => {}
            }
        }
        // a liveness artifact and an ltl artifact
        let m = load_ompa(&root.join("fixtures/lasso-two-stack.ompa")).unwrap();
        let q1 = m.find_state("q1").unwrap();
        out.push_str(&text::config_automaton_to_string(&repeated_reach(&m, q1).unwrap()));
        let m = load_ompa(&root.join("fixtures/ltl-loop-escape.ompa")).unwrap();
        let chk = global_check(&m, &parse_ltl("G p").unwrap()).unwrap();
        out.push_str(&text::config_automaton_to_string(&chk.violating));
        out.push_str(&text::config_automaton_to_string(&chk.satisfying));
        out
    };
    let first = artifacts();
    let second = artifacts();
    assert_eq!(first, second, "two runs must produce byte-identical artifacts");
    println!(
        "[PASS] determinism: two full pipeline runs produced byte-identical artifacts \
         ({} bytes)",
        first.len()
    );
}

#[test]
fn criterion_size_bounds() {
    // oracle machines of the reduction stay within c * |m|^2 with c = 6
    for (name, m) in fixture_machines() {
        let g = ompa_to_gpa(&m).expect("reduction");
        for lang in &g.langs {
            if let EffectiveLanguage::OmpaReversed { machine, .. } = lang {
                assert!(
                    machine.size() <= 6 * m.size() * m.size(),
                    "oracle machine too large for {name}"
                );
            }
        }
        // reduction of a target automaton stays within c * |m| * |a| with c = 10
        if let Some(&f) = m.finals.iter().next() {
            let a = single_config_target(&m, f).unwrap();
            let (reduced, _) = ompa_mc::analysis::reduce_target(&m, &a).unwrap();
            assert!(
                reduced.size() <= 10 * m.size() * a.size(),
                "reduced machine too large for {name}"
            );
        }
    }
    println!("[PASS] size bounds: oracle machines <= 6|m|^2 and reductions <= 10|m||a| on all fixtures");
}

#[test]
fn emptiness_agrees_with_prestar_on_initial_configurations() {
    for (name, m) in fixture_machines() {
        let nonempty = ompa_emptiness(&m).unwrap();
        let mut via_prestar = false;
        for &f in &m.finals {
            let a = ompa_mc::analysis::prestar_single(&m, f).unwrap();
            if a.member(&m.initial_config()).unwrap() {
                via_prestar = true;
                break;
            }
        }
        assert_eq!(nonempty, via_prestar, "emptiness consistency fails on {name}");
    }
    println!("[PASS] emptiness consistency: verdicts agree with prestar membership of the initial configuration on all fixtures");
}

#[test]
fn corpus_expectations_hold() {
    let root = corpus_root();
    for fixture in corpus_manifest() {
        let path = root.join(fixture.path);
        let src = std::fs::read_to_string(&path).unwrap();
        let nonempty = match text::sniff_header(&src).unwrap() {
            text::Header::Ompa => {
                let m = text::parse_ompa(&src).unwrap();
                m.validate().unwrap();
                ompa_emptiness(&m).unwrap()
            }
            text::Header::Gpa => {
                let g = text::parse_gpa(&src, path.parent().unwrap()).unwrap();
                gpa_emptiness(&g).unwrap()
            }
            other => panic!("unexpected fixture kind {other:?}"),
        };
        let expect = fixture.expect == Expectation::Nonempty;
        assert_eq!(nonempty, expect, "manifest drift on {}", fixture.path);
    }
    println!("[PASS] corpus manifest: every fixture matches its recorded verdict");
}
