//! Reachability analysis for ordered multi-pushdown machines: the stack
//! restriction, the push-visible projection, the reduction to generalized
//! pushdown automata, recursive emptiness, and recognizable `Pre*` / `Pre+`.
//!
//! The recursion scheme: questions about an n-stack machine become questions
//! about a generalized pushdown automaton over the n-th stack whose pushed
//! languages are defined by (n-1)-stack machines; those recurse until plain
//! pushdown saturation closes the induction.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::rc::Rc;

use crate::config_auto::{ConfigAutomaton, ConfigKind};
use crate::error::{Error, Result};
use crate::fsa::{Fsa, StateId};
use crate::gpa::{saturate, EffectiveLanguage, Gpa, Saturated};
use crate::ompa::{Configuration, Ompa, T1, T2};
use crate::symbol::{Symbol, BOTTOM};

/// Keeps exactly the transitions that do not pop stacks `i+1..n`.
/// `restrict(m, n)` is the machine itself.
pub fn restrict(m: &Ompa, i: usize) -> Result<Ompa> {
    if i < 1 || i > m.n {
        return Err(Error::input(format!("restriction index {i} outside 1..={}", m.n)));
    }
    let mut out = m.clone();
    out.t2.retain(|t| t.stack <= i);
    Ok(out)
}

/// The (n-1)-stack machine over input `Gamma` that performs the same moves as
/// the source on its first `n-1` stacks while making the symbols pushed on
/// stack `n` visible as input labels. Pop transitions on stack `n` are
/// discarded first.
pub fn make_push_visible(m: &Ompa) -> Result<Ompa> {
    if m.n < 2 {
        return Err(Error::input("push projection needs at least two stacks"));
    }
    let mut out = Ompa::new(m.n - 1, m.stack.clone(), m.stack.clone());
    for q in m.states() {
        out.add_state(m.state_name(q).to_string());
    }
    out.q0 = m.q0;
    out.gamma0 = m.gamma0;
    out.finals = m.finals.clone();
    for t in &m.t1 {
        let mut upper = t.upper.clone();
        let visible = upper.pop().expect("n >= 2");
        out.t1.insert(T1 {
            from: t.from,
            pop: t.pop,
            label: visible,
            to: t.to,
            push1: t.push1.clone(),
            upper,
        });
    }
    for t in &m.t2 {
        if t.stack < m.n {
            out.t2.insert(T2 {
                from: t.from,
                stack: t.stack,
                pop: t.pop,
                label: None,
                to: t.to,
                push1: t.push1,
            });
        }
    }
    Ok(out)
}

/// Copy of `m` with the given initial state, initial stack symbol and single
/// final state, trimmed to states that can still reach the final.
fn with_role(m: &Ompa, q0: StateId, gamma0: Symbol, fin: StateId) -> Option<Ompa> {
    let mut c = m.clone();
    c.q0 = q0;
    c.gamma0 = gamma0;
    c.finals = BTreeSet::from([fin]);
    let live = c.flow_coreach(&c.finals);
    if !live.contains(&q0) {
        return None;
    }
    let (t, _) = c.trim_coreach(&c.finals);
    if t.finals.is_empty() {
        return None;
    }
    Some(t)
}

/// Pushdown machines (one stack, normal form) as finite-language GPAs.
fn pda_gpa(m: &Ompa) -> Result<Gpa> {
    if m.n != 1 {
        return Err(Error::internal("pushdown encoding applies to one-stack machines"));
    }
    let mut g = Gpa::new(m.input.clone(), m.stack.clone());
    for q in m.states() {
        g.add_state(m.state_name(q).to_string());
    }
    g.p0 = m.q0;
    g.gamma0 = m.gamma0;
    g.finals = m.finals.clone();
    let mut sets: BTreeMap<(StateId, Symbol, Option<Symbol>, StateId), BTreeSet<Vec<Symbol>>> =
        BTreeMap::new();
    for t in &m.t1 {
        sets.entry((t.from, t.pop, t.label, t.to)).or_default().insert(t.push1.clone());
    }
    for (key, words) in sets {
        g.add_delta(key, EffectiveLanguage::Finite(words));
    }
    Ok(g)
}

/// The generalized pushdown automaton of the simulation theorem: its state
/// and stack mirror the machine state and n-th stack whenever the first n-1
/// stacks are empty. States are the machine states followed by fresh `p0` and
/// `pf`; the input alphabet is empty (labels are not tracked).
pub fn ompa_to_gpa(m: &Ompa) -> Result<Gpa> {
    if m.n < 2 {
        return Err(Error::input("the GPA reduction needs at least two stacks"));
    }
    let mpv = make_push_visible(m)?;
    let mut g = Gpa::new(crate::symbol::SymbolTable::new(), m.stack.clone());
    for q in m.states() {
        g.add_state(m.state_name(q).to_string());
    }
    let p0 = g.add_state("$p0");
    let pf = g.add_state("$pf");
    g.p0 = p0;
    g.gamma0 = BOTTOM;
    g.finals = BTreeSet::from([pf]);

    // initial case: everything pushed before the first stack-n pop
    for p2 in m.states() {
        if let Some(machine) = with_role(&mpv, m.q0, m.gamma0, p2) {
            g.add_delta(
                (p0, BOTTOM, None, p2),
                EffectiveLanguage::OmpaReversed { machine: Rc::new(machine), append_bottom: true },
            );
        }
    }
    // final case: accept once the mirrored stack is down to bottom
    for &f in &m.finals {
        g.add_delta(
            (f, BOTTOM, None, pf),
            EffectiveLanguage::Finite(BTreeSet::from([Vec::new()])),
        );
    }
    // pop case: a stack-n pop followed by the summarized pushes
    let mut xi: BTreeMap<(StateId, Symbol), BTreeSet<(StateId, Symbol)>> = BTreeMap::new();
    for t in &m.t2 {
        if t.stack == m.n {
            xi.entry((t.from, t.pop)).or_default().insert((t.to, t.push1));
        }
    }
    for ((p, gamma), starts) in &xi {
        for p2 in m.states() {
            let mut parts: Vec<Ompa> = Vec::new();
            for &(q, gprime) in starts {
                if let Some(machine) = with_role(&mpv, q, gprime, p2) {
                    parts.push(machine);
                }
            }
            let Some(mut machine) = parts.pop() else { continue };
            for part in parts {
                machine = machine.union(&part)?;
            }
            g.add_delta(
                (*p, *gamma, None, p2),
                EffectiveLanguage::OmpaReversed { machine: Rc::new(machine), append_bottom: false },
            );
        }
    }
    Ok(g)
}

/// Language emptiness; `true` means NONEMPTY.
pub fn ompa_emptiness(m: &Ompa) -> Result<bool> {
    ompa_emptiness_budgeted(m, m.n)
}

pub(crate) fn ompa_emptiness_budgeted(m: &Ompa, budget: usize) -> Result<bool> {
    if budget == 0 {
        return Err(Error::internal("machine emptiness exceeded its recursion budget"));
    }
    if m.finals.is_empty() {
        return Ok(false);
    }
    if !m.flow_coreach(&m.finals).contains(&m.q0) {
        return Ok(false);
    }
    if m.n == 1 {
        return Ok(pda_nonempty(m));
    }
    let (trimmed, _) = m.trim_coreach(&m.finals);
    let g = ompa_to_gpa(&trimmed)?;
    crate::gpa::gpa_emptiness_budgeted(&g, budget)
}

/// Allocation-light emptiness for one-stack machines, the inner loop of all
/// pushed-language oracles. Computes the relation "from state q with `g` on
/// top, the machine can consume `g` and end in state r" by a worklist
/// fixpoint, then walks the empty-stack level graph from the initial
/// configuration.
pub(crate) fn pda_nonempty(m: &Ompa) -> bool {
    debug_assert_eq!(m.n, 1);
    let nq = m.state_count();
    let ng = m.stack.len();
    let idx = |q: StateId, g: Symbol, r: StateId| -> usize {
        (q.0 as usize * ng + g.index()) * nq + r.0 as usize
    };
    let mut pops = vec![false; nq * ng * nq];
    let mut queue: VecDeque<(StateId, Symbol, StateId)> = VecDeque::new();
    // waiting[(q', d)] are rule heads that fire once pops(q', d, _) appears;
    // for two-symbol pushes the continuation is chained through `second`
    #[derive(Clone)]
    struct Pending {
        head_q: StateId,
        head_g: Symbol,
        second: Option<Symbol>,
    }
    let mut waiting: BTreeMap<(StateId, Symbol), Vec<Pending>> = BTreeMap::new();
    let add = |pops: &mut Vec<bool>,
                   queue: &mut VecDeque<(StateId, Symbol, StateId)>,
                   q: StateId,
                   g: Symbol,
                   r: StateId| {
        let i = idx(q, g, r);
        if !pops[i] {
            pops[i] = true;
            queue.push_back((q, g, r));
        }
    };
    for t in &m.t1 {
        match t.push1.len() {
            0 => add(&mut pops, &mut queue, t.from, t.pop, t.to),
            1 => waiting.entry((t.to, t.push1[0])).or_default().push(Pending {
                head_q: t.from,
                head_g: t.pop,
                second: None,
            }),
            2 => waiting.entry((t.to, t.push1[0])).or_default().push(Pending {
                head_q: t.from,
                head_g: t.pop,
                second: Some(t.push1[1]),
            }),
            _ => unreachable!("normal form pushes at most two symbols"),
        }
    }
    while let Some((q, g, r)) = queue.pop_front() {
        if let Some(rules) = waiting.get(&(q, g)).cloned() {
            for rule in rules {
                match rule.second {
                    None => add(&mut pops, &mut queue, rule.head_q, rule.head_g, r),
                    Some(d) => {
                        // chain: after the first symbol lands in r, the
                        // second must be consumed from r
                        for r2 in m.states() {
                            if pops[idx(r, d, r2)] {
                                add(&mut pops, &mut queue, rule.head_q, rule.head_g, r2);
                            }
                        }
                        waiting.entry((r, d)).or_default().push(Pending {
                            head_q: rule.head_q,
                            head_g: rule.head_g,
                            second: None,
                        });
                    }
                }
            }
        }
    }
    // empty-stack level: states reachable at configuration (s, bottom)
    let mut level = vec![false; nq];
    let mut lq: VecDeque<StateId> = VecDeque::new();
    for r in m.states() {
        if pops[idx(m.q0, m.gamma0, r)] {
            if !level[r.index()] {
                level[r.index()] = true;
                lq.push_back(r);
            }
        }
    }
    while let Some(s) = lq.pop_front() {
        if m.finals.contains(&s) {
            return true;
        }
        for t in &m.t1 {
            if t.from != s || t.pop != BOTTOM {
                continue;
            }
            debug_assert_eq!(t.push1.last(), Some(&BOTTOM));
            match t.push1.len() {
                1 => {
                    if !level[t.to.index()] {
                        level[t.to.index()] = true;
                        lq.push_back(t.to);
                    }
                }
                2 => {
                    let d = t.push1[0];
                    for r in m.states() {
                        if pops[idx(t.to, d, r)] && !level[r.index()] {
                            level[r.index()] = true;
                            lq.push_back(r);
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    false
}

/// Saturated prefix analysis shared by the `Pre*` constructions: for a set of
/// target states `T`, the P-automaton `astar` recognizes (at the GPA level)
/// the stack-n contents from which the machine reaches `(t, bottom, ...,
/// bottom)`, and `s_sets[q]` lists the `astar` states reachable from some
/// `rep(q2)` along the reverse of a word the machine can push onto stack `n`
/// while churning from `(q, empty stacks)` to `(q2, empty stacks)`.
///
/// The churn closure repairs runs that move between empty-prefix
/// configurations without ever popping stack `n`; the plain saturation covers
/// only pop-led steps.
struct EmptyPrefix {
    astar: Saturated,
    fin_of: BTreeMap<StateId, StateId>,
    s_sets: Vec<BTreeSet<StateId>>,
}

fn empty_prefix_core(m: &Ompa, targets: &BTreeSet<StateId>, budget: usize) -> Result<EmptyPrefix> {
    debug_assert!(m.n >= 2);
    let g = ompa_to_gpa(m)?;
    let mut a0 = ConfigAutomaton::empty(ConfigKind::P, g.state_names().to_vec(), g.stack.clone());
    let mut fin_of = BTreeMap::new();
    for &t in targets {
        let rep = a0.rep(t)?;
        let fin = a0.fsa.add_state(format!("acc.{}", m.state_name(t)));
        a0.fsa.add_transition(rep, Some(BOTTOM), fin);
        a0.fsa.finals.insert(fin);
        fin_of.insert(t, fin);
    }
    let astar = saturate(&g, &a0, budget)?;
    // remap fins through the trim performed by saturation
    let fin_of = fin_of
        .iter()
        .filter_map(|(&t, &old)| {
            let name = a0.fsa().state_name(old);
            astar.auto.fsa().find_state(name).map(|ns| (t, ns))
        })
        .collect();

    // churn closure: product of the push-visible machine with the reversed
    // saturated automaton, then empty-to-empty pair reachability one level
    // down in the stack-count recursion
    let mpv = make_push_visible(m)?;
    let rev = astar.auto.fsa().reverse();
    let (product, pair) = pair_product(&mpv, &rev)?;
    let astar_states = astar.auto.fsa().state_count();
    let mut vtargets = BTreeSet::new();
    for q2 in m.states() {
        let rep = astar.auto.rep(q2)?;
        vtargets.insert(pair(q2, rep));
    }
    let vpairs = all_empty_pair_reach(&product, &vtargets, budget)?;
    let mut s_sets = vec![BTreeSet::new(); m.state_count()];
    for (src, _) in vpairs {
        let q = StateId(src.0 / astar_states as u32);
        let x = StateId(src.0 % astar_states as u32);
        s_sets[q.index()].insert(x);
    }
    Ok(EmptyPrefix { astar, fin_of, s_sets })
}

/// Product of an (n-1)-stack machine over input `Gamma` with a (label-bare)
/// automaton over `Gamma`; state `(q, s)` has dense id `q * |S| + s`. Unlike
/// the language-level intersection this keeps every pair as a usable
/// initial/final state.
fn pair_product(m: &Ompa, a: &Fsa) -> Result<(Ompa, impl Fn(StateId, StateId) -> StateId)> {
    let scount = a.state_count() as u32;
    let mut out = Ompa::new(m.n, m.input.clone(), m.stack.clone());
    for q in m.states() {
        for s in a.states() {
            out.add_state(format!("{}&{}", m.state_name(q), a.state_name(s)));
        }
    }
    let pair = move |q: StateId, s: StateId| StateId(q.0 * scount + s.0);
    out.q0 = StateId(0);
    out.gamma0 = m.gamma0;
    for t in &m.t1 {
        match t.label {
            None => {
                for s in a.states() {
                    let mut nt = t.clone();
                    nt.from = pair(t.from, s);
                    nt.to = pair(t.to, s);
                    out.t1.insert(nt);
                }
            }
            Some(x) => {
                for &(f, l, to) in &a.transitions {
                    if l == Some(x) {
                        let mut nt = t.clone();
                        nt.from = pair(t.from, f);
                        nt.to = pair(t.to, to);
                        out.t1.insert(nt);
                    }
                }
            }
        }
    }
    for t in &m.t2 {
        debug_assert!(t.label.is_none());
        for s in a.states() {
            let mut nt = t.clone();
            nt.from = pair(t.from, s);
            nt.to = pair(t.to, s);
            out.t2.insert(nt);
        }
    }
    Ok((out, pair))
}

/// Pairs `(s, t)` with `t` in `targets` such that the machine can move from
/// `(s, all stacks empty)` to `(t, all stacks empty)`.
fn all_empty_pair_reach(
    m: &Ompa,
    targets: &BTreeSet<StateId>,
    budget: usize,
) -> Result<BTreeSet<(StateId, StateId)>> {
    let mut pairs = BTreeSet::new();
    for &t in targets {
        pairs.insert((t, t));
    }
    let live = m.flow_coreach(targets);
    if m.n == 1 {
        let g = pda_gpa(m)?;
        let mut a0 = ConfigAutomaton::empty(ConfigKind::P, m.state_names().to_vec(), m.stack.clone());
        let mut fin_of = BTreeMap::new();
        for &t in targets {
            let rep = a0.rep(t)?;
            let fin = a0.fsa.add_state(format!("acc{}", t.0));
            a0.fsa.add_transition(rep, Some(BOTTOM), fin);
            a0.fsa.finals.insert(fin);
            fin_of.insert(t, fin);
        }
        let sat = saturate(&g, &a0, budget)?;
        for s in m.states() {
            if !live.contains(&s) {
                continue;
            }
            let rep = sat.auto.rep(s)?;
            for (&t, &fin0) in &fin_of {
                let Some(fin) = sat.auto.fsa().find_state(a0.fsa().state_name(fin0)) else {
                    continue;
                };
                let mut from = BTreeSet::new();
                from.insert(rep);
                let mut to = BTreeSet::new();
                to.insert(fin);
                if sat.auto.fsa().accepts(&from, &to, &[BOTTOM])? {
                    pairs.insert((s, t));
                }
            }
        }
        return Ok(pairs);
    }
    let core = empty_prefix_core(m, targets, budget)?;
    for s in m.states() {
        if !live.contains(&s) {
            continue;
        }
        for (&t, &fin) in &core.fin_of {
            let hit = core.s_sets[s.index()]
                .iter()
                .any(|&x| core.astar.auto.fsa().transitions.contains(&(x, Some(BOTTOM), fin)));
            if hit {
                pairs.insert((s, t));
            }
        }
    }
    Ok(pairs)
}

/// `Pre*` automata for several all-empty targets at once, sharing one
/// saturation per recursion level. `fins[t]` accepts exactly
/// `Pre*({(t, all-empty)})`; the automaton's own final set is their union.
/// Per-target finals never gain outgoing edges, so transitions toward one
/// target cannot influence another and a single saturation is exact for all
/// of them.
struct MultiPre {
    auto: ConfigAutomaton,
    fins: BTreeMap<StateId, BTreeSet<StateId>>,
}

/// Shared empty-prefix automaton: chains, hubs and one copy of the saturated
/// automaton, with one final state per target.
struct PrefixAutomaton {
    auto: ConfigAutomaton,
    /// machine state -> automaton state reached after reading `bottom^(n-1)`
    hubs: Vec<StateId>,
    fins: BTreeMap<StateId, StateId>,
}

fn build_prefix_automaton(
    m: &Ompa,
    targets: &BTreeSet<StateId>,
    budget: usize,
) -> Result<PrefixAutomaton> {
    debug_assert!(m.n >= 2);
    let core = empty_prefix_core(m, targets, budget)?;
    let astar_fsa = core.astar.auto.fsa();
    let mut auto = ConfigAutomaton::empty(
        ConfigKind::M { stacks: m.n },
        m.state_names().to_vec(),
        m.stack.clone(),
    );
    // shared copy of the saturated automaton
    let offset = auto.fsa.state_count() as u32;
    for s in astar_fsa.states() {
        auto.fsa.add_state(format!("a.{}", astar_fsa.state_name(s)));
    }
    let sh = |s: StateId| StateId(s.0 + offset);
    for &(f, l, t) in &astar_fsa.transitions {
        auto.fsa.transitions.insert((sh(f), l, sh(t)));
    }
    let mut fins = BTreeMap::new();
    for (&t, &fin) in &core.fin_of {
        auto.fsa.finals.insert(sh(fin));
        fins.insert(t, sh(fin));
    }
    // chains and hubs: rep(q') reads bottom^(n-1) and lands on a state whose
    // moves are those of every churn-reachable saturated state
    let mut hubs = Vec::with_capacity(m.state_count());
    for qp in m.states() {
        let mut cur = auto.rep(qp)?;
        for step in 0..m.n - 1 {
            let next = auto.fsa.add_state(format!("b{}.{}", step + 1, m.state_name(qp)));
            auto.fsa.add_transition(cur, Some(BOTTOM), next);
            cur = next;
        }
        hubs.push(cur);
        let mut edges = Vec::new();
        for &x in &core.s_sets[qp.index()] {
            for &(f, l, t) in &astar_fsa.transitions {
                if f == x {
                    edges.push((cur, l, sh(t)));
                }
            }
        }
        for e in edges {
            auto.fsa.transitions.insert(e);
        }
    }
    // shrink while pinning the states other constructions read back
    let mut keep: BTreeSet<StateId> = auto.owner_reps.iter().copied().collect();
    keep.extend(hubs.iter().copied());
    keep.extend(fins.values().copied());
    let (tfsa, tmap) = auto.fsa.trim_keeping(&keep);
    let remap1 = |s: StateId| tmap[s.index()].expect("kept by trim");
    let keep2: BTreeSet<StateId> = keep.iter().map(|&s| remap1(s)).collect();
    let (qfsa, qmap) = tfsa.quotient_keeping(&keep2);
    let remap = |s: StateId| qmap[remap1(s).index()];
    let auto = ConfigAutomaton {
        fsa: qfsa,
        kind: auto.kind,
        owner_names: auto.owner_names.clone(),
        owner_reps: auto.owner_reps.iter().map(|&r| remap(r)).collect(),
    };
    let hubs = hubs.iter().map(|&h| remap(h)).collect();
    let fins = fins.iter().map(|(&t, &f)| (t, remap(f))).collect();
    Ok(PrefixAutomaton { auto, hubs, fins })
}

/// M-automaton recognizing the `Pre*` members of `{(q, bottom, ...)}` whose
/// first `n-1` stacks are empty.
pub fn prestar_empty_prefix(m: &Ompa, q: StateId) -> Result<ConfigAutomaton> {
    if q.index() >= m.state_count() {
        return Err(Error::input(format!("unknown state {q}")));
    }
    if m.n == 1 {
        // with one stack the shape constraint is vacuous
        return prestar_single(m, q);
    }
    let (m2, map) = m.trim_coreach(&BTreeSet::from([q]));
    let Some(q2) = map[q.index()] else {
        return Ok(ConfigAutomaton::empty(
            ConfigKind::M { stacks: m.n },
            m.state_names().to_vec(),
            m.stack.clone(),
        ));
    };
    let prefix = build_prefix_automaton(&m2, &BTreeSet::from([q2]), m.n)?;
    let mut auto = prefix.auto;
    auto.fsa.finals = prefix.fins.get(&q2).map(|&f| BTreeSet::from([f])).unwrap_or_default();
    let (wrapped, _) = rewrap_owner(&auto, m, &map)?;
    Ok(wrapped.reduce())
}

/// Re-owners an automaton built for a trimmed machine back to the original
/// machine's state space; dropped states receive dead representatives.
/// Inner state `s` becomes `s + offset` in the result, where `offset` is the
/// returned value (so per-target final sets can be remapped by the caller).
fn rewrap_owner(
    auto: &ConfigAutomaton,
    original: &Ompa,
    map: &[Option<StateId>],
) -> Result<(ConfigAutomaton, u32)> {
    let mut out = ConfigAutomaton::empty(
        ConfigKind::M { stacks: original.n },
        original.state_names().to_vec(),
        original.stack.clone(),
    );
    let offset = out.fsa.state_count() as u32;
    let inner = auto.fsa();
    for s in inner.states() {
        out.fsa.add_state(format!("w.{}", inner.state_name(s)));
    }
    let sh = |s: StateId| StateId(s.0 + offset);
    for &(f, l, t) in &inner.transitions {
        out.fsa.transitions.insert((sh(f), l, sh(t)));
    }
    for &f in &inner.finals {
        out.fsa.finals.insert(sh(f));
    }
    for (orig_idx, mapped) in map.iter().enumerate() {
        if let Some(t) = mapped {
            let rep_inner = auto.rep(*t)?;
            let rep_outer = out.owner_reps[orig_idx];
            let mut edges = Vec::new();
            for &(f, l, to) in &inner.transitions {
                if f == rep_inner {
                    edges.push((rep_outer, l, sh(to)));
                }
            }
            for e in edges {
                out.fsa.transitions.insert(e);
            }
            if inner.finals.contains(&rep_inner) {
                out.fsa.finals.insert(rep_outer);
            }
        }
    }
    Ok((out, offset))
}

/// Full `Pre*` of the all-empty configuration at `q`.
pub fn prestar_single(m: &Ompa, q: StateId) -> Result<ConfigAutomaton> {
    if q.index() >= m.state_count() {
        return Err(Error::input(format!("unknown state {q}")));
    }
    let multi = prestar_single_multi(m, &BTreeSet::from([q]), m.n.max(1))?;
    let mut auto = multi.auto;
    auto.fsa.finals = multi.fins.get(&q).cloned().unwrap_or_default();
    Ok(auto.reduce())
}

fn prestar_single_multi(
    m: &Ompa,
    targets: &BTreeSet<StateId>,
    budget: usize,
) -> Result<MultiPre> {
    if m.n == 1 {
        let g = pda_gpa(m)?;
        let mut a0 =
            ConfigAutomaton::empty(ConfigKind::P, m.state_names().to_vec(), m.stack.clone());
        let mut fin_names = BTreeMap::new();
        for &t in targets {
            let rep = a0.rep(t)?;
            let name = format!("acc{}", t.0);
            let fin = a0.fsa.add_state(name.clone());
            a0.fsa.add_transition(rep, Some(BOTTOM), fin);
            a0.fsa.finals.insert(fin);
            fin_names.insert(t, name);
        }
        let sat = saturate(&g, &a0, budget)?;
        let mut auto = sat.auto;
        auto.kind = ConfigKind::M { stacks: 1 };
        let fins = fin_names
            .iter()
            .map(|(&t, name)| {
                let set = auto
                    .fsa()
                    .find_state(name)
                    .map(|f| BTreeSet::from([f]))
                    .unwrap_or_default();
                (t, set)
            })
            .collect();
        return Ok(MultiPre { auto, fins });
    }

    let empty_result = |m: &Ompa| MultiPre {
        auto: ConfigAutomaton::empty(
            ConfigKind::M { stacks: m.n },
            m.state_names().to_vec(),
            m.stack.clone(),
        ),
        fins: targets.iter().map(|&t| (t, BTreeSet::new())).collect(),
    };

    let (m2, map) = m.trim_coreach(targets);
    let mut back: BTreeMap<StateId, StateId> = BTreeMap::new(); // m2 target -> original
    let mut mapped: BTreeSet<StateId> = BTreeSet::new();
    for &t in targets {
        if let Some(t2) = map[t.index()] {
            mapped.insert(t2);
            back.insert(t2, t);
        }
    }
    if mapped.is_empty() {
        return Ok(empty_result(m));
    }
    let prefix = build_prefix_automaton(&m2, &mapped, budget)?;
    let aprime = &prefix.auto;
    let afsa = aprime.fsa();

    // synchronized product: track, inside the machine state, the automaton
    // state from which the still-unread stack-n suffix will be accepted;
    // pushes walk the automaton backwards
    let restricted = restrict(&m2, m2.n - 1)?;
    let scount = afsa.state_count() as u32;
    let pair = move |qq: StateId, s: StateId| StateId(qq.0 * scount + s.0);
    let msync = {
        let mut out = Ompa::new(m2.n - 1, m2.input.clone(), m2.stack.clone());
        for qq in m2.states() {
            for s in afsa.states() {
                out.add_state(format!("{}&{}", m2.state_name(qq), afsa.state_name(s)));
            }
        }
        out.q0 = StateId(0);
        out.gamma0 = m2.gamma0;
        for t in &restricted.t1 {
            let mut upper = t.upper.clone();
            let pushed_n = upper.pop().expect("n >= 2");
            match pushed_n {
                None => {
                    for s in afsa.states() {
                        out.t1.insert(T1 {
                            from: pair(t.from, s),
                            pop: t.pop,
                            label: t.label,
                            to: pair(t.to, s),
                            push1: t.push1.clone(),
                            upper: upper.clone(),
                        });
                    }
                }
                Some(x) => {
                    for &(p2, l, p1) in &afsa.transitions {
                        if l == Some(x) {
                            out.t1.insert(T1 {
                                from: pair(t.from, p1),
                                pop: t.pop,
                                label: t.label,
                                to: pair(t.to, p2),
                                push1: t.push1.clone(),
                                upper: upper.clone(),
                            });
                        }
                    }
                }
            }
        }
        for t in &restricted.t2 {
            debug_assert!(t.stack < m2.n);
            for s in afsa.states() {
                out.t2.insert(T2 {
                    from: pair(t.from, s),
                    stack: t.stack,
                    pop: t.pop,
                    label: t.label,
                    to: pair(t.to, s),
                    push1: t.push1,
                });
            }
        }
        out
    };

    // one recursive call answers the lower-level question for every split
    // state at once
    let mut sync_targets = BTreeSet::new();
    for qsplit in m2.states() {
        sync_targets.insert(pair(qsplit, prefix.hubs[qsplit.index()]));
    }
    let (msync2, sync_map) = msync.trim_coreach(&sync_targets);
    let mapped_sync: BTreeSet<StateId> =
        sync_targets.iter().filter_map(|t| sync_map[t.index()]).collect();
    if mapped_sync.is_empty() {
        return Ok(empty_result(m));
    }
    let b = prestar_single_multi(&msync2, &mapped_sync, budget)?;
    let bfsa = b.auto.fsa();
    let bfins: BTreeSet<StateId> =
        b.fins.values().flat_map(|s| s.iter().copied()).collect();

    // assemble: guess the suffix entry state, run the recursive automaton
    // over the first n-1 stacks, then finish the n-th stack inside the
    // prefix automaton
    let mut result = ConfigAutomaton::empty(
        ConfigKind::M { stacks: m2.n },
        m2.state_names().to_vec(),
        m2.stack.clone(),
    );
    // shared copy of the prefix automaton (suffix reader)
    let suffix_offset = result.fsa.state_count() as u32;
    for s in afsa.states() {
        result.fsa.add_state(format!("s.{}", afsa.state_name(s)));
    }
    let sh_suffix = |s: StateId| StateId(s.0 + suffix_offset);
    for &(f, l, t) in &afsa.transitions {
        result.fsa.transitions.insert((sh_suffix(f), l, sh_suffix(t)));
    }
    let mut result_fins: BTreeMap<StateId, BTreeSet<StateId>> = BTreeMap::new();
    for (&t2, &fin) in &prefix.fins {
        let orig = back[&t2];
        result_fins.entry(orig).or_default().insert(sh_suffix(fin));
        result.fsa.finals.insert(sh_suffix(fin));
    }
    let suffix_live = afsa.coreachable_to(&afsa.finals);

    // product region tagged with the guessed suffix-entry state
    let mut region: BTreeMap<(StateId, StateId), StateId> = BTreeMap::new();
    let mut queue: VecDeque<(StateId, StateId)> = VecDeque::new();
    let node = |result: &mut ConfigAutomaton,
                region: &mut BTreeMap<(StateId, StateId), StateId>,
                queue: &mut VecDeque<(StateId, StateId)>,
                bstate: StateId,
                entry: StateId| {
        *region.entry((bstate, entry)).or_insert_with(|| {
            let id = result.fsa.add_state(format!("g{}.{}", bstate.0, entry.0));
            queue.push_back((bstate, entry));
            id
        })
    };
    // glue: for every machine state q' and suffix entry p', enter the
    // recursive automaton at the pair rep
    for qp in m2.states() {
        for entry in afsa.states() {
            if !suffix_live.contains(&entry) {
                continue;
            }
            let Some(pair_t) = sync_map[pair(qp, entry).index()] else { continue };
            let rep_b = b.auto.rep(pair_t)?;
            let rep_res = result.owner_reps[qp.index()];
            let id = node(&mut result, &mut region, &mut queue, rep_b, entry);
            result.fsa.transitions.insert((rep_res, None, id));
        }
    }
    while let Some((bstate, entry)) = queue.pop_front() {
        let id = region[&(bstate, entry)];
        if bfins.contains(&bstate) {
            // first n-1 stacks consumed; continue with stack n
            result.fsa.transitions.insert((id, None, sh_suffix(entry)));
        }
        let mut edges = Vec::new();
        for &(f, l, t) in &bfsa.transitions {
            if f == bstate {
                edges.push((l, t));
            }
        }
        for (l, t) in edges {
            let nid = node(&mut result, &mut region, &mut queue, t, entry);
            result.fsa.transitions.insert((id, l, nid));
        }
    }

    // eliminate the glue edges, keeping the per-target final partition
    let mut eps_only = Fsa::new(result.fsa.alphabet.clone());
    for s in result.fsa.states() {
        eps_only.add_state(result.fsa.state_name(s).to_string());
    }
    for &(f, l, t) in &result.fsa.transitions {
        if l.is_none() {
            eps_only.transitions.insert((f, l, t));
        }
    }
    for fins in result_fins.values_mut() {
        let mut extra = BTreeSet::new();
        for q2 in result.fsa.states() {
            let mut start = BTreeSet::new();
            start.insert(q2);
            if eps_only.reachable_from(&start).iter().any(|s| fins.contains(s)) {
                extra.insert(q2);
            }
        }
        fins.extend(extra);
    }
    let flat = ConfigAutomaton {
        fsa: result.fsa.eliminate_epsilon(),
        kind: result.kind,
        owner_names: result.owner_names.clone(),
        owner_reps: result.owner_reps.clone(),
    };
    let (wrapped, offset) = rewrap_owner(&flat, m, &map)?;
    let mut fins: BTreeMap<StateId, BTreeSet<StateId>> = targets
        .iter()
        .map(|&t| {
            let set = result_fins
                .get(&t)
                .map(|s| s.iter().map(|f| StateId(f.0 + offset)).collect())
                .unwrap_or_default();
            (t, set)
        })
        .collect();
    // a rep that became final through the glue belongs to the targets whose
    // inner-final set contains the rep's inner image
    for (orig_idx, mapped_state) in map.iter().enumerate() {
        if let Some(t2) = mapped_state {
            let rep_inner = flat.rep(*t2)?;
            for (&t, inner_fins) in &result_fins {
                if inner_fins.contains(&rep_inner) {
                    fins.entry(t).or_default().insert(wrapped.owner_reps[orig_idx]);
                }
            }
        }
    }
    Ok(MultiPre { auto: wrapped, fins })
}

/// The target-reduction machine: phase one behaves like `m`, phase two
/// nondeterministically checks that the current configuration is accepted by
/// `a` by simulating the automaton while popping, using a fresh `#` symbol to
/// respect the normal form. For every configuration `c` of `m`:
/// `c in Pre*(L(a))` iff `c in Pre*({(qf, bottom, ..., bottom)})` in the
/// returned machine.
pub fn reduce_target(m: &Ompa, a: &ConfigAutomaton) -> Result<(Ompa, StateId)> {
    match a.kind {
        ConfigKind::M { stacks } if stacks == m.n => {}
        _ => return Err(Error::input("target automaton has the wrong stack count")),
    }
    if a.owner_names() != m.state_names() {
        return Err(Error::input("target automaton belongs to a different machine"));
    }
    let a = a.normalize();
    let afsa = a.fsa();
    if !afsa.alphabet.is_extension_of(&m.stack) && afsa.alphabet != m.stack {
        return Err(Error::input("target automaton alphabet does not extend the machine's"));
    }

    let mut stack = afsa.alphabet.clone();
    let sharp = stack.fresh("sharp");
    let mut out = Ompa::new(m.n, m.input.clone(), stack);
    for q in m.states() {
        out.add_state(m.state_name(q).to_string());
    }
    // simulation states (automaton state, checked stack index 1..=n+1)
    let mut sim = BTreeMap::new();
    for s in afsa.states() {
        for i in 1..=m.n + 1 {
            let id = out.add_state(format!("$s.{}.{}", afsa.state_name(s), i));
            sim.insert((s, i), id);
        }
    }
    let qf = out.add_state("$qf");
    out.q0 = m.q0;
    out.gamma0 = m.gamma0;
    out.finals = m.finals.clone();
    out.labels = m.labels.clone();

    // phase one
    out.t1.extend(m.t1.iter().cloned());
    out.t2.extend(m.t2.iter().cloned());

    // bottom runs of the automaton, by exact length
    let mut bot_reach: Vec<BTreeMap<StateId, BTreeSet<StateId>>> = vec![BTreeMap::new()];
    for s in afsa.states() {
        bot_reach[0].entry(s).or_default().insert(s);
    }
    for _ in 1..=m.n {
        let prev = bot_reach.last().unwrap();
        let mut next: BTreeMap<StateId, BTreeSet<StateId>> = BTreeMap::new();
        for (src, mids) in prev {
            for mid in mids {
                for &(f, l, t) in &afsa.transitions {
                    if f == *mid && l == Some(BOTTOM) {
                        next.entry(*src).or_default().insert(t);
                    }
                }
            }
        }
        bot_reach.push(next);
    }

    let no_upper = vec![None; m.n - 1];
    // start the check on a non-empty first stack
    for q in m.states() {
        let rep = a.rep(q)?;
        for &(f, l, t) in &afsa.transitions {
            if f == rep {
                let sym = l.expect("normalized automaton");
                if sym != BOTTOM {
                    out.t1.insert(T1 {
                        from: q,
                        pop: sym,
                        label: None,
                        to: sim[&(t, 1)],
                        push1: Vec::new(),
                        upper: no_upper.clone(),
                    });
                }
            }
        }
        // or skip i leading empty stacks
        for i in 1..=m.n {
            if let Some(dests) = bot_reach[i].get(&rep) {
                for &p in dests {
                    out.t1.insert(T1 {
                        from: q,
                        pop: BOTTOM,
                        label: None,
                        to: sim[&(p, i + 1)],
                        push1: vec![BOTTOM],
                        upper: no_upper.clone(),
                    });
                }
            }
        }
    }
    for s in afsa.states() {
        for i in 1..=m.n {
            // skip further empty stacks mid-check
            for j in 1..=m.n - i + 1 {
                if let Some(dests) = bot_reach[j].get(&s) {
                    for &p in dests {
                        out.t1.insert(T1 {
                            from: sim[&(s, i)],
                            pop: BOTTOM,
                            label: None,
                            to: sim[&(p, i + j)],
                            push1: vec![BOTTOM],
                            upper: no_upper.clone(),
                        });
                    }
                }
            }
            // read a proper symbol from stack i
            for &(f, l, t) in &afsa.transitions {
                if f != s {
                    continue;
                }
                let sym = l.expect("normalized automaton");
                if sym == BOTTOM {
                    continue;
                }
                if i == 1 {
                    out.t1.insert(T1 {
                        from: sim[&(s, 1)],
                        pop: sym,
                        label: None,
                        to: sim[&(t, 1)],
                        push1: Vec::new(),
                        upper: no_upper.clone(),
                    });
                } else {
                    out.t2.insert(T2 {
                        from: sim[&(s, i)],
                        stack: i,
                        pop: sym,
                        label: None,
                        to: sim[&(t, i)],
                        push1: sharp,
                    });
                }
            }
        }
        // drop the normal-form helper symbol
        for i in 1..=m.n + 1 {
            out.t1.insert(T1 {
                from: sim[&(s, i)],
                pop: sharp,
                label: None,
                to: sim[&(s, i)],
                push1: Vec::new(),
                upper: no_upper.clone(),
            });
        }
    }
    for &f in &afsa.finals {
        out.t1.insert(T1 {
            from: sim[&(f, m.n + 1)],
            pop: BOTTOM,
            label: None,
            to: qf,
            push1: vec![BOTTOM],
            upper: no_upper.clone(),
        });
    }
    Ok((out, qf))
}

/// `Pre*` of the configuration set recognized by `a`.
pub fn prestar(m: &Ompa, a: &ConfigAutomaton) -> Result<ConfigAutomaton> {
    let (reduced, qf) = reduce_target(m, a)?;
    let b = prestar_single(&reduced, qf)?;
    restrict_to_machine(&b, m)
}

/// Keeps only configurations of the original machine: representatives beyond
/// its states are dropped and edges over foreign symbols removed.
fn restrict_to_machine(b: &ConfigAutomaton, m: &Ompa) -> Result<ConfigAutomaton> {
    let inner = b.fsa();
    let mut out = ConfigAutomaton::empty(
        ConfigKind::M { stacks: m.n },
        m.state_names().to_vec(),
        m.stack.clone(),
    );
    let offset = out.fsa.state_count() as u32;
    for s in inner.states() {
        out.fsa.add_state(format!("r.{}", inner.state_name(s)));
    }
    let sh = |s: StateId| StateId(s.0 + offset);
    for &(f, l, t) in &inner.transitions {
        if let Some(sym) = l {
            if !m.stack.contains(sym) {
                continue;
            }
        }
        out.fsa.transitions.insert((sh(f), l, sh(t)));
    }
    for &f in &inner.finals {
        out.fsa.finals.insert(sh(f));
    }
    for q in m.states() {
        let rep_inner = b.rep(q)?;
        let rep_outer = out.owner_reps[q.index()];
        let mut edges = Vec::new();
        for &(f, l, t) in &inner.transitions {
            if f == rep_inner {
                if let Some(sym) = l {
                    if !m.stack.contains(sym) {
                        continue;
                    }
                }
                edges.push((rep_outer, l, sh(t)));
            }
        }
        for e in edges {
            out.fsa.transitions.insert(e);
        }
        if inner.finals.contains(&rep_inner) {
            out.fsa.finals.insert(rep_outer);
        }
    }
    Ok(out.reduce())
}

/// `Pre+` (at least one step) of the configuration set recognized by `a`,
/// via the state-copy machine: original transitions are duplicated with
/// copy-targeted versions, and the target automaton is relabeled onto the
/// copies, so membership forces at least one real step.
pub fn preplus(m: &Ompa, a: &ConfigAutomaton) -> Result<ConfigAutomaton> {
    match a.kind {
        ConfigKind::M { stacks } if stacks == m.n => {}
        _ => return Err(Error::input("target automaton has the wrong stack count")),
    }
    if a.owner_names() != m.state_names() {
        return Err(Error::input("target automaton belongs to a different machine"));
    }
    let a = a.normalize();
    let q_count = m.state_count() as u32;
    let mut mplus = Ompa::new(m.n, m.input.clone(), m.stack.clone());
    for q in m.states() {
        mplus.add_state(m.state_name(q).to_string());
    }
    for q in m.states() {
        mplus.add_state(format!("$copy.{}", m.state_name(q)));
    }
    mplus.q0 = m.q0;
    mplus.gamma0 = m.gamma0;
    mplus.finals = m.finals.clone();
    mplus.labels = m.labels.clone();
    let copy = |q: StateId| StateId(q.0 + q_count);
    for t in &m.t1 {
        mplus.t1.insert(t.clone());
        let mut ct = t.clone();
        ct.to = copy(t.to);
        mplus.t1.insert(ct);
    }
    for t in &m.t2 {
        mplus.t2.insert(t.clone());
        let mut ct = t.clone();
        ct.to = copy(t.to);
        mplus.t2.insert(ct);
    }
    // relabel the target automaton onto the copies
    let mut owner_names = m.state_names().to_vec();
    owner_names.extend(m.state_names().iter().map(|n| format!("$copy.{n}")));
    let mut fsa = a.fsa().clone();
    let mut owner_reps = Vec::with_capacity(owner_names.len());
    for q in m.states() {
        let dead = fsa.add_state(format!("{}-dead", m.state_name(q)));
        fsa.initials.insert(dead);
        owner_reps.push(dead);
    }
    for q in m.states() {
        owner_reps.push(a.rep(q)?);
    }
    let aplus = ConfigAutomaton {
        fsa,
        kind: ConfigKind::M { stacks: m.n },
        owner_names,
        owner_reps,
    };
    let b = prestar(&mplus, &aplus)?;
    // drop the copy owners
    let mut out = ConfigAutomaton::empty(
        ConfigKind::M { stacks: m.n },
        m.state_names().to_vec(),
        m.stack.clone(),
    );
    let inner = b.fsa();
    let offset = out.fsa.state_count() as u32;
    for s in inner.states() {
        out.fsa.add_state(format!("p.{}", inner.state_name(s)));
    }
    let sh = |s: StateId| StateId(s.0 + offset);
    for &(f, l, t) in &inner.transitions {
        out.fsa.transitions.insert((sh(f), l, sh(t)));
    }
    for &f in &inner.finals {
        out.fsa.finals.insert(sh(f));
    }
    for q in m.states() {
        let rep_inner = b.rep(q)?;
        let rep_outer = out.owner_reps[q.index()];
        let mut edges = Vec::new();
        for &(f, l, t) in &inner.transitions {
            if f == rep_inner {
                edges.push((rep_outer, l, sh(t)));
            }
        }
        for e in edges {
            out.fsa.transitions.insert(e);
        }
        if inner.finals.contains(&rep_inner) {
            out.fsa.finals.insert(rep_outer);
        }
    }
    Ok(out.reduce())
}

/// Target automaton for a single all-empty configuration.
pub fn single_config_target(m: &Ompa, q: StateId) -> Result<ConfigAutomaton> {
    let c = Configuration { state: q, stacks: vec![vec![BOTTOM]; m.n] };
    ConfigAutomaton::for_configs(m.state_names().to_vec(), m.stack.clone(), m.n, &[c])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::symbol::SymbolTable;

    fn anbncn() -> Ompa {
        crate::ompa::tests::anbncn()
    }

    #[test]
    fn restrict_full_is_identity() {
        let m = anbncn();
        let r = restrict(&m, 2).unwrap();
        assert_eq!(r.t1, m.t1);
        assert_eq!(r.t2, m.t2);
    }

    #[test]
    fn restrict_is_idempotent_and_antitone() {
        let m = anbncn();
        for i in 1..=m.n {
            let once = restrict(&m, i).unwrap();
            let twice = restrict(&once, i).unwrap();
            assert_eq!(once.t1, twice.t1);
            assert_eq!(once.t2, twice.t2);
        }
        for i in 1..m.n {
            let small = restrict(&m, i).unwrap();
            let big = restrict(&m, i + 1).unwrap();
            assert!(small.t2.is_subset(&big.t2));
            assert_eq!(small.t1, big.t1);
        }
        assert!(restrict(&m, 0).is_err());
        assert!(restrict(&m, m.n + 1).is_err());
    }

    #[test]
    fn restrict_one_drops_stack2_pops() {
        let m = anbncn();
        let r = restrict(&m, 1).unwrap();
        assert!(r.t2.is_empty());
        assert_eq!(r.t1, m.t1);
        // no explored run pops stack 2 anymore
        let ex = r.bounded_explore(&r.initial_config(), 12, 6).unwrap();
        for (_, (_, t)) in &ex.parents {
            assert_eq!(t.popped_stack(), 1);
        }
    }

    #[test]
    fn push_visible_on_silent_machine() {
        // a machine that never pushes on stack 2 projects to epsilon labels only
        let mut input = SymbolTable::new();
        input.intern("a");
        let mut stack = SymbolTable::with_bottom();
        stack.intern("S");
        let mut m = Ompa::new(2, input, stack);
        let q = m.add_state("q");
        m.q0 = q;
        let s = m.stack.get("S").unwrap();
        m.gamma0 = s;
        m.finals.insert(q);
        m.t1.insert(T1 {
            from: q,
            pop: s,
            label: Some(m.input.get("a").unwrap()),
            to: q,
            push1: vec![],
            upper: vec![None],
        });
        let p = make_push_visible(&m).unwrap();
        assert_eq!(p.n, 1);
        for t in &p.t1 {
            assert!(t.label.is_none());
        }
    }

    #[test]
    fn push_visible_single_push_has_one_label() {
        let m = anbncn();
        let p = make_push_visible(&m).unwrap();
        let sb = m.stack.get("B").unwrap();
        let labelled: Vec<&T1> = p.t1.iter().filter(|t| t.label == Some(sb)).collect();
        assert_eq!(labelled.len(), 2, "the two b-reading transitions push B on stack 2");
    }

    #[test]
    fn push_visible_correspondence_on_anbncn() {
        // every bounded run of the restricted machine matches a projection
        // run reading the reversed push sequence, and conversely
        let m = anbncn();
        let mr = restrict(&m, m.n - 1).unwrap();
        let p = make_push_visible(&m).unwrap();
        let ex = mr.bounded_explore(&mr.initial_config(), 10, 6).unwrap();
        for c in &ex.configs {
            // recover the run's pushed word on stack n: stack-n content minus
            // the initial bottom, reversed
            let pushed: Vec<Symbol> = c.stacks[m.n - 1][..c.stacks[m.n - 1].len() - 1]
                .iter()
                .rev()
                .copied()
                .collect();
            // the projection machine must reach (state, first stacks) reading `pushed`
            let mut pc = Configuration {
                state: p.q0,
                stacks: vec![vec![p.gamma0, BOTTOM], vec![BOTTOM]][..1].to_vec(),
            };
            pc.stacks = c.stacks[..m.n - 1].to_vec();
            // forward search over (config, consumed) pairs in the projection
            let target_state = c.state;
            let found = projection_reaches(&p, &pushed, target_state, &pc.stacks, 14, 7).unwrap();
            assert!(found, "projection misses run to {c:?}");
        }
    }

    /// Does the projection machine reach (target, stacks) from its initial
    /// configuration reading exactly `word`?
    fn projection_reaches(
        p: &Ompa,
        word: &[Symbol],
        target: StateId,
        stacks: &[Vec<Symbol>],
        max_steps: usize,
        max_height: usize,
    ) -> Result<bool> {
        let start = (p.initial_config(), 0usize);
        let mut seen = BTreeSet::from([start.clone()]);
        let mut frontier = vec![start];
        for _ in 0..max_steps {
            let mut next = Vec::new();
            for (c, pos) in frontier {
                if pos == word.len() && c.state == target && c.stacks == stacks {
                    return Ok(true);
                }
                for (t, succ) in p.step(&c)? {
                    let npos = match t.label() {
                        None => pos,
                        Some(x) if pos < word.len() && word[pos] == x => pos + 1,
                        Some(_) => continue,
                    };
                    if succ.max_height() > max_height {
                        continue;
                    }
                    let node = (succ, npos);
                    if seen.insert(node.clone()) {
                        next.push(node);
                    }
                }
            }
            frontier = next;
        }
        Ok(frontier.iter().any(|(c, pos)| {
            *pos == word.len() && c.state == target && c.stacks == stacks
        }))
    }

    #[test]
    fn emptiness_no_finals_is_empty() {
        let mut m = anbncn();
        m.finals.clear();
        assert!(!ompa_emptiness(&m).unwrap());
    }

    #[test]
    fn emptiness_anbncn_is_nonempty() {
        let m = anbncn();
        assert!(ompa_emptiness(&m).unwrap());
    }

    #[test]
    fn emptiness_epsilon_only_machine() {
        // accepts exactly the empty word: pop gamma0 and stop in a final state
        let input = SymbolTable::new();
        let mut stack = SymbolTable::with_bottom();
        stack.intern("S");
        let mut m = Ompa::new(2, input, stack);
        let q0 = m.add_state("q0");
        let f = m.add_state("f");
        m.q0 = q0;
        let s = m.stack.get("S").unwrap();
        m.gamma0 = s;
        m.finals.insert(f);
        m.t1.insert(T1 { from: q0, pop: s, label: None, to: f, push1: vec![], upper: vec![None] });
        assert!(ompa_emptiness(&m).unwrap());
        assert!(ompa_to_gpa(&m).is_ok());
    }

    #[test]
    fn emptiness_gpa_reduction_empty_when_unreachable() {
        // no t2 transitions and finals unreachable
        let input = SymbolTable::new();
        let mut stack = SymbolTable::with_bottom();
        stack.intern("S");
        let mut m = Ompa::new(2, input, stack);
        let q0 = m.add_state("q0");
        let f = m.add_state("f");
        m.q0 = q0;
        let s = m.stack.get("S").unwrap();
        m.gamma0 = s;
        m.finals.insert(f);
        m.t1.insert(T1 { from: q0, pop: s, label: None, to: q0, push1: vec![s], upper: vec![None] });
        assert!(!ompa_emptiness(&m).unwrap());
    }

    #[test]
    fn prestar_single_contains_the_target() {
        let m = anbncn();
        for q in m.states() {
            let a = prestar_single(&m, q).unwrap();
            let target = Configuration { state: q, stacks: vec![vec![BOTTOM]; m.n] };
            assert!(a.member(&target).unwrap(), "reflexivity at {q}");
        }
    }

    #[test]
    fn prestar_single_no_transitions() {
        let input = SymbolTable::new();
        let mut stack = SymbolTable::with_bottom();
        stack.intern("S");
        let mut m = Ompa::new(2, input, stack);
        let q0 = m.add_state("q0");
        let q1 = m.add_state("q1");
        m.q0 = q0;
        m.gamma0 = m.stack.get("S").unwrap();
        let a = prestar_single(&m, q1).unwrap();
        let s = m.stack.get("S").unwrap();
        // only the target itself is in Pre*
        let target = Configuration { state: q1, stacks: vec![vec![BOTTOM]; 2] };
        assert!(a.member(&target).unwrap());
        let other = Configuration { state: q1, stacks: vec![vec![s, BOTTOM], vec![BOTTOM]] };
        assert!(!a.member(&other).unwrap());
        let q0c = Configuration { state: q0, stacks: vec![vec![BOTTOM]; 2] };
        assert!(!a.member(&q0c).unwrap());
    }

    /// Exact membership of `Pre*({(qc, _, _)})` for the a^n b^n c^n machine,
    /// derived by hand: qc drains B's from stack 2 through qm; qa/qb drain
    /// `A* S` from stack 1 into B's, then drop S to reach qc. Any other shape
    /// wedges (qc and qm cannot touch a non-empty first stack except via D,
    /// and a stack-1 word not of the form A* S blocks the drain).
    fn anbncn_prestar_qc(m: &Ompa, c: &Configuration) -> bool {
        let qa = m.find_state("qa").unwrap();
        let qb = m.find_state("qb").unwrap();
        let qc = m.find_state("qc").unwrap();
        let qm = m.find_state("qm").unwrap();
        let s = m.stack.get("S").unwrap();
        let a = m.stack.get("A").unwrap();
        let b = m.stack.get("B").unwrap();
        let d = m.stack.get("D").unwrap();
        let all_b = c.stacks[1][..c.stacks[1].len() - 1].iter().all(|&x| x == b);
        if !all_b {
            return false;
        }
        let w1 = &c.stacks[0][..c.stacks[0].len() - 1];
        if c.state == qc {
            return w1.is_empty();
        }
        if c.state == qm {
            return w1 == [d];
        }
        if c.state == qa || c.state == qb {
            // A* S on stack 1
            return w1.last() == Some(&s) && w1[..w1.len() - 1].iter().all(|&x| x == a);
        }
        false
    }

    #[test]
    fn prestar_single_matches_derived_set_on_anbncn() {
        let m = anbncn();
        let q = m.find_state("qc").unwrap();
        let auto = prestar_single(&m, q).unwrap();
        let goal = Configuration { state: q, stacks: vec![vec![BOTTOM]; m.n] };
        for c in oracle::enumerate_configs(&m, 3) {
            let expect = anbncn_prestar_qc(&m, &c);
            assert_eq!(auto.member(&c).unwrap(), expect, "mismatch at {c:?}");
            if expect {
                // every derived member has a short forward witness
                let ex = m.bounded_explore(&c, 16, 8).unwrap();
                assert!(ex.configs.contains(&goal), "witness missing for {c:?}");
            }
        }
    }

    #[test]
    fn prestar_empty_prefix_shape_and_reflexivity() {
        let m = anbncn();
        let q = m.find_state("qc").unwrap();
        let auto = prestar_empty_prefix(&m, q).unwrap();
        let target = Configuration { state: q, stacks: vec![vec![BOTTOM]; m.n] };
        assert!(auto.member(&target).unwrap());
        // anything with a non-empty first stack is rejected by shape
        let sa = m.stack.get("A").unwrap();
        let shaped = Configuration {
            state: q,
            stacks: vec![vec![sa, BOTTOM], vec![BOTTOM]],
        };
        assert!(!auto.member(&shaped).unwrap());
    }

    #[test]
    fn prestar_universal_and_empty_targets() {
        let m = anbncn();
        let all = ConfigAutomaton::universe(m.state_names().to_vec(), m.stack.clone(), m.n);
        let pre_all = prestar(&m, &all).unwrap();
        let none = ConfigAutomaton::empty(
            ConfigKind::M { stacks: m.n },
            m.state_names().to_vec(),
            m.stack.clone(),
        );
        let pre_none = prestar(&m, &none).unwrap();
        for c in oracle::enumerate_configs(&m, 2) {
            assert!(pre_all.member(&c).unwrap(), "Pre* of everything contains {c:?}");
            assert!(!pre_none.member(&c).unwrap());
        }
    }

    #[test]
    fn reduce_target_biconditional_on_small_machine() {
        let m = anbncn();
        let q = m.find_state("qc").unwrap();
        let target = single_config_target(&m, q).unwrap();
        let (reduced, qf) = reduce_target(&m, &target).unwrap();
        reduced.validate().unwrap();
        assert!(reduced.size() <= 10 * m.size() * target.size());
        // biconditional against the hand-derived Pre* set: c in Pre*_m(target)
        // iff c in Pre*_reduced({(qf, all empty)})
        let b = prestar_single(&reduced, qf).unwrap();
        for c in oracle::enumerate_configs(&m, 2) {
            let expect = anbncn_prestar_qc(&m, &c);
            // configurations of m embed into the reduced machine unchanged
            assert_eq!(b.member(&c).unwrap(), expect, "at {c:?}");
        }
    }

    #[test]
    fn reduce_target_empty_automaton_reaches_nothing() {
        let m = anbncn();
        let none = ConfigAutomaton::empty(
            ConfigKind::M { stacks: m.n },
            m.state_names().to_vec(),
            m.stack.clone(),
        );
        let (reduced, qf) = reduce_target(&m, &none).unwrap();
        let b = prestar_single(&reduced, qf).unwrap();
        for c in oracle::enumerate_configs(&m, 2) {
            assert!(!b.member(&c).unwrap());
        }
    }

    #[test]
    fn preplus_needs_a_step() {
        let m = anbncn();
        // target: the accepting empty configuration at qc; qm reaches it in
        // one step but qc itself does not loop back
        let q = m.find_state("qc").unwrap();
        let target = single_config_target(&m, q).unwrap();
        let plus = preplus(&m, &target).unwrap();
        let goal = Configuration { state: q, stacks: vec![vec![BOTTOM]; m.n] };
        assert!(!plus.member(&goal).unwrap(), "zero steps do not count");
        let sd = m.stack.get("D").unwrap();
        let qm = m.find_state("qm").unwrap();
        let onestep = Configuration { state: qm, stacks: vec![vec![sd, BOTTOM], vec![BOTTOM]] };
        assert!(plus.member(&onestep).unwrap());
    }

    #[test]
    fn emptiness_matches_prestar_single_on_initial() {
        let m = anbncn();
        let nonempty = ompa_emptiness(&m).unwrap();
        let mut via_prestar = false;
        for &f in &m.finals {
            let a = prestar_single(&m, f).unwrap();
            if a.member(&m.initial_config()).unwrap() {
                via_prestar = true;
            }
        }
        assert_eq!(nonempty, via_prestar);
    }
}
