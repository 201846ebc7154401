//! Bounded oracles: exhaustive desk-scale checks used by the test suites and
//! by the CLI `--check` mode.
//!
//! Every oracle reports whether it was exhaustive for the instance at hand, so
//! callers only assert equality with the symbolic algorithms when the bounded
//! search provably covered all relevant behavior.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::Result;
use crate::ompa::{Configuration, Ompa, RawMpa, RawTransition};
use crate::symbol::{Symbol, SymbolTable, BOTTOM};

/// All words over `table` with length at most `max_len`, in length-lex order.
pub fn words_up_to(table: &SymbolTable, max_len: usize) -> Vec<Vec<Symbol>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<Symbol>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for s in table.symbols() {
                let mut nw = w.clone();
                nw.push(s);
                next.push(nw);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// All stack words (bottom-terminated, top first) with at most `height`
/// non-bottom symbols.
pub fn stack_words_up_to(table: &SymbolTable, height: usize) -> Vec<Vec<Symbol>> {
    let syms: Vec<Symbol> = table.symbols_no_bottom().collect();
    let mut out = vec![vec![BOTTOM]];
    let mut layer = vec![vec![BOTTOM]];
    for _ in 0..height {
        let mut next = Vec::new();
        for w in &layer {
            for &s in &syms {
                let mut nw = vec![s];
                nw.extend_from_slice(w);
                next.push(nw);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Largest height at most `max_height` whose configuration universe stays
/// under `budget` entries; enumeration-based oracles use it to bound their
/// working set.
pub fn sensible_height(m: &Ompa, max_height: usize, budget: usize) -> usize {
    let letters = m.stack.len().saturating_sub(1).max(1) as u128;
    let mut best = 0;
    for h in 0..=max_height {
        let mut words: u128 = 0;
        let mut pow: u128 = 1;
        for _ in 0..=h {
            words = words.saturating_add(pow);
            pow = pow.saturating_mul(letters);
        }
        let mut universe: u128 = m.state_count() as u128;
        for _ in 0..m.n {
            universe = universe.saturating_mul(words);
        }
        if universe <= budget as u128 {
            best = h;
        }
    }
    best
}

/// Every well-formed configuration of `m` with per-stack height at most
/// `height`.
pub fn enumerate_configs(m: &Ompa, height: usize) -> Vec<Configuration> {
    let words = stack_words_up_to(&m.stack, height);
    let mut combos: Vec<Vec<Vec<Symbol>>> = vec![Vec::new()];
    for _ in 0..m.n {
        let mut next = Vec::new();
        for c in &combos {
            for w in &words {
                let mut nc = c.clone();
                nc.push(w.clone());
                next.push(nc);
            }
        }
        combos = next;
    }
    let mut out = Vec::new();
    for q in m.states() {
        for c in &combos {
            out.push(Configuration { state: q, stacks: c.clone() });
        }
    }
    out
}

/// All configurations with per-stack height at most `height` accepted by an
/// M-automaton, computed by walking the stack-word trie once with incremental
/// automaton state sets (much faster than per-configuration membership).
pub fn accepted_configs(
    a: &crate::config_auto::ConfigAutomaton,
    height: usize,
) -> Result<BTreeSet<Configuration>> {
    let stacks = a
        .stacks()
        .ok_or_else(|| crate::error::Error::input("accepted_configs needs an M-automaton"))?;
    let a = a.normalize();
    let fsa = a.fsa();
    let symbols: Vec<Symbol> = fsa.alphabet.symbols_no_bottom().collect();
    let mut adj: BTreeMap<(crate::fsa::StateId, Symbol), Vec<crate::fsa::StateId>> =
        BTreeMap::new();
    for &(f, l, t) in &fsa.transitions {
        if let Some(s) = l {
            adj.entry((f, s)).or_default().push(t);
        }
    }
    let step = |states: &BTreeSet<crate::fsa::StateId>, s: Symbol| {
        let mut next = BTreeSet::new();
        for &q in states {
            if let Some(ts) = adj.get(&(q, s)) {
                next.extend(ts.iter().copied());
            }
        }
        next
    };
    let mut out = BTreeSet::new();
    // depth-first over (stack index, partially built stacks, word position)
    struct Frame<'a> {
        symbols: &'a [Symbol],
        height: usize,
        stacks: usize,
        out: BTreeSet<Configuration>,
    }
    fn rec(
        f: &mut Frame,
        owner: crate::fsa::StateId,
        done: &mut Vec<Vec<Symbol>>,
        current: &mut Vec<Symbol>,
        states: &BTreeSet<crate::fsa::StateId>,
        finals: &BTreeSet<crate::fsa::StateId>,
        step: &dyn Fn(&BTreeSet<crate::fsa::StateId>, Symbol) -> BTreeSet<crate::fsa::StateId>,
    ) {
        if states.is_empty() {
            return;
        }
        // close the current stack with its bottom
        let after_bottom = step(states, BOTTOM);
        if !after_bottom.is_empty() {
            let mut word = current.clone();
            word.push(BOTTOM);
            done.push(word);
            if done.len() == f.stacks {
                if after_bottom.iter().any(|q| finals.contains(q)) {
                    f.out.insert(Configuration { state: owner, stacks: done.clone() });
                }
            } else {
                let mut fresh = Vec::new();
                std::mem::swap(current, &mut fresh);
                rec(f, owner, done, current, &after_bottom, finals, step);
                std::mem::swap(current, &mut fresh);
            }
            done.pop();
        }
        if current.len() < f.height {
            for &s in f.symbols {
                let next = step(states, s);
                if next.is_empty() {
                    continue;
                }
                current.push(s);
                rec(f, owner, done, current, &next, finals, step);
                current.pop();
            }
        }
    }
    let mut frame = Frame { symbols: &symbols, height, stacks, out: BTreeSet::new() };
    for (idx, _) in a.owner_names().iter().enumerate() {
        let owner = crate::fsa::StateId(idx as u32);
        let rep = a.rep(owner)?;
        let mut start = BTreeSet::new();
        start.insert(rep);
        let mut done = Vec::new();
        let mut current = Vec::new();
        rec(&mut frame, owner, &mut done, &mut current, &start, &fsa.finals, &step);
    }
    out.extend(frame.out);
    Ok(out)
}

/// Bounded word membership: `(accepted, definitive)`. The search walks pairs
/// of a configuration and an input position; `definitive` is false when the
/// verdict may have been lost to a bound.
pub fn accepts_word(
    m: &Ompa,
    w: &[Symbol],
    max_steps: usize,
    max_height: usize,
) -> Result<(bool, bool)> {
    let start = (m.initial_config(), 0usize);
    let mut seen = BTreeSet::new();
    seen.insert(start.clone());
    let mut frontier = vec![start];
    let mut truncated = false;
    for _ in 0..max_steps {
        if frontier.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for (c, pos) in frontier {
            if pos == w.len() && m.is_final_config(&c) {
                return Ok((true, true));
            }
            for (t, succ) in m.step(&c)? {
                let npos = match t.label() {
                    None => pos,
                    Some(x) if pos < w.len() && w[pos] == x => pos + 1,
                    Some(_) => continue,
                };
                if succ.max_height() > max_height {
                    truncated = true;
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
    for (c, pos) in &frontier {
        if *pos == w.len() && m.is_final_config(c) {
            return Ok((true, true));
        }
    }
    if !frontier.is_empty() {
        truncated = true;
    }
    Ok((false, !truncated))
}

fn raw_step(raw: &RawMpa, t: &RawTransition, c: &Configuration) -> Option<Configuration> {
    if t.from != c.state {
        return None;
    }
    for j in 0..raw.n {
        if let Some(g) = t.pops[j] {
            if c.stacks[j][0] != g {
                return None;
            }
        }
    }
    let mut stacks = Vec::with_capacity(raw.n);
    for j in 0..raw.n {
        let rest: &[Symbol] = if t.pops[j].is_some() { &c.stacks[j][1..] } else { &c.stacks[j][..] };
        let mut s = t.pushes[j].clone();
        s.extend_from_slice(rest);
        stacks.push(s);
    }
    Some(Configuration { state: t.to, stacks })
}

/// Independent interpreter for raw tuple transitions; used to cross-check the
/// normal-form compilation. Returns `(accepted, definitive)`.
pub fn raw_accepts_word(
    raw: &RawMpa,
    w: &[Symbol],
    max_steps: usize,
    max_height: usize,
) -> Result<(bool, bool)> {
    let mut stacks = vec![vec![BOTTOM]; raw.n];
    stacks[0] = vec![raw.gamma0, BOTTOM];
    let start = (Configuration { state: raw.q0, stacks }, 0usize);
    let mut seen = BTreeSet::new();
    seen.insert(start.clone());
    let mut frontier = vec![start];
    let mut truncated = false;
    let accepting = |c: &Configuration, pos: usize| {
        pos == w.len() && raw.finals.contains(&c.state) && c.all_empty()
    };
    for _ in 0..max_steps {
        if frontier.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for (c, pos) in frontier {
            if accepting(&c, pos) {
                return Ok((true, true));
            }
            for t in &raw.transitions {
                let Some(succ) = raw_step(raw, t, &c) else { continue };
                let npos = match t.label {
                    None => pos,
                    Some(x) if pos < w.len() && w[pos] == x => pos + 1,
                    Some(_) => continue,
                };
                if succ.max_height() > max_height {
                    truncated = true;
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
    if frontier.iter().any(|(c, pos)| accepting(c, *pos)) {
        return Ok((true, true));
    }
    if !frontier.is_empty() {
        truncated = true;
    }
    Ok((false, !truncated))
}

/// Bounded backward-reachability oracle.
pub struct BackwardOracle {
    /// All configurations with height at most the requested bound.
    pub universe: Vec<Configuration>,
    /// Members of `Pre*(target)` within the universe.
    pub members: BTreeSet<Configuration>,
    /// True when the bounded graph is forward-closed, in which case `members`
    /// is exactly `Pre*(target)` restricted to the universe.
    pub exhaustive: bool,
}

/// Exhaustive backward closure of `target` over the configuration graph with
/// per-stack heights at most `height`.
pub fn backward_reach(
    m: &Ompa,
    height: usize,
    target: &mut dyn FnMut(&Configuration) -> Result<bool>,
) -> Result<BackwardOracle> {
    let universe = enumerate_configs(m, height);
    let mut closed = true;
    let mut preds: BTreeMap<Configuration, Vec<usize>> = BTreeMap::new();
    for (i, c) in universe.iter().enumerate() {
        for (_, succ) in m.step(c)? {
            if succ.max_height() > height {
                closed = false;
            } else {
                preds.entry(succ).or_default().push(i);
            }
        }
    }
    let mut members: BTreeSet<Configuration> = BTreeSet::new();
    let mut queue: VecDeque<Configuration> = VecDeque::new();
    for c in &universe {
        if target(c)? {
            members.insert(c.clone());
            queue.push_back(c.clone());
        }
    }
    while let Some(c) = queue.pop_front() {
        if let Some(ps) = preds.get(&c) {
            for &i in ps {
                let p = &universe[i];
                if members.insert(p.clone()) {
                    queue.push_back(p.clone());
                }
            }
        }
    }
    Ok(BackwardOracle { universe, members, exhaustive: closed })
}

/// One bounded lasso query: `(lasso_found, exhaustive)`.
///
/// A lasso certificate is a path `c1 ->+ c2` through a target state such that
/// replaying its transition sequence from `c2` is possible forever. The
/// search tracks, per stack, how deep pops have cut into `c1`'s original
/// content and the maximal popped stack index; a pair certifies a pump when
/// the stacks below the maximal popped index are exactly restored, the stack
/// at that index is restored or never had its original content popped, and
/// everything above was only pushed to.
pub fn exists_lasso(
    m: &Ompa,
    c: &Configuration,
    targets: &BTreeSet<crate::fsa::StateId>,
    max_steps: usize,
    max_height: usize,
    node_cap: usize,
) -> Result<(bool, bool)> {
    let reach = m.bounded_explore(c, max_steps, max_height)?;
    let mut exhaustive = reach.complete();
    for c1 in &reach.configs {
        let (found, complete) = pump_search(m, c1, targets, max_height, node_cap)?;
        if found {
            return Ok((true, true));
        }
        exhaustive &= complete;
    }
    Ok((false, exhaustive))
}

type PumpNode = (Configuration, Vec<usize>, usize, bool);

fn pump_search(
    m: &Ompa,
    c1: &Configuration,
    targets: &BTreeSet<crate::fsa::StateId>,
    max_height: usize,
    node_cap: usize,
) -> Result<(bool, bool)> {
    let intact0: Vec<usize> = c1.stacks.iter().map(|s| s.len()).collect();
    let start: PumpNode = (c1.clone(), intact0, 0, targets.contains(&c1.state));
    let mut seen: BTreeSet<PumpNode> = BTreeSet::new();
    seen.insert(start.clone());
    let mut queue: VecDeque<PumpNode> = VecDeque::new();
    queue.push_back(start);
    let mut complete = true;
    while let Some((cfg, intact, maxpop, hit)) = queue.pop_front() {
        if seen.len() > node_cap {
            return Ok((false, false));
        }
        for (t, succ) in m.step(&cfg)? {
            if succ.max_height() > max_height {
                complete = false;
                continue;
            }
            let popped = t.popped_stack(); // 1-based
            let mut nintact = intact.clone();
            let j = popped - 1;
            if cfg.stacks[j].len() == nintact[j] && nintact[j] > 0 {
                nintact[j] -= 1; // an original symbol was consumed
            }
            let nmaxpop = maxpop.max(popped);
            let nhit = hit || targets.contains(&succ.state);
            if certifies(c1, &succ, &nintact, nmaxpop, nhit) {
                return Ok((true, true));
            }
            let node: PumpNode = (succ, nintact, nmaxpop, nhit);
            if seen.insert(node.clone()) {
                queue.push_back(node);
            }
        }
    }
    Ok((false, complete))
}

fn certifies(
    c1: &Configuration,
    c2: &Configuration,
    intact: &[usize],
    maxpop: usize,
    hit_target: bool,
) -> bool {
    if !hit_target || c2.state != c1.state {
        return false;
    }
    debug_assert!(maxpop >= 1, "every transition pops some stack");
    let i = maxpop - 1; // 0-based index of the deepest popped stack
    for j in 0..i {
        if c2.stacks[j] != c1.stacks[j] {
            return false;
        }
    }
    // the deepest popped stack: exactly restored, or its original content was
    // never touched (pops only consumed pushed symbols)
    c2.stacks[i] == c1.stacks[i] || intact[i] == c1.stacks[i].len()
}

/// Configurations (within `height`) admitting an infinite run that visits a
/// target state infinitely often, with a global exhaustiveness flag.
pub fn lasso_members(
    m: &Ompa,
    height: usize,
    targets: &BTreeSet<crate::fsa::StateId>,
    max_steps: usize,
    search_height: usize,
    node_cap: usize,
) -> Result<(BTreeSet<Configuration>, bool)> {
    let mut members = BTreeSet::new();
    let mut exhaustive = true;
    for c in enumerate_configs(m, height) {
        let (found, complete) = exists_lasso(m, &c, targets, max_steps, search_height, node_cap)?;
        if found {
            members.insert(c);
        } else {
            exhaustive &= complete;
        }
    }
    Ok((members, exhaustive))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsa::StateId;
    use crate::ompa::{Ompa, T1, T2};

    fn simple_tables(stacks: &[&str]) -> (SymbolTable, SymbolTable) {
        let input = SymbolTable::new();
        let mut g = SymbolTable::with_bottom();
        for s in stacks {
            g.intern(s);
        }
        (input, g)
    }

    #[test]
    fn exact_cycle_is_a_lasso() {
        // pop bottom / push bottom self loop: every all-empty configuration
        // admits an infinite run
        let (input, stack) = simple_tables(&["S"]);
        let mut m = Ompa::new(1, input, stack);
        let q = m.add_state("q");
        m.q0 = q;
        m.gamma0 = m.stack.get("S").unwrap();
        m.t1.insert(T1 { from: q, pop: BOTTOM, label: None, to: q, push1: vec![BOTTOM], upper: vec![] });
        let c = Configuration { state: q, stacks: vec![vec![BOTTOM]] };
        let targets = BTreeSet::from([q]);
        let (found, _) = exists_lasso(&m, &c, &targets, 10, 4, 10_000).unwrap();
        assert!(found);
        // a configuration with a symbol on the stack is stuck
        let s = m.stack.get("S").unwrap();
        let stuck = Configuration { state: q, stacks: vec![vec![s, BOTTOM]] };
        let (found, exhaustive) = exists_lasso(&m, &stuck, &targets, 10, 4, 10_000).unwrap();
        assert!(!found);
        assert!(exhaustive);
    }

    #[test]
    fn growing_stack_lasso_is_found() {
        // pop A / push A on stack 1 and B on stack 2: stack 2 grows forever
        let (input, stack) = simple_tables(&["A", "B"]);
        let mut m = Ompa::new(2, input, stack);
        let q = m.add_state("q");
        m.q0 = q;
        let a = m.stack.get("A").unwrap();
        let b = m.stack.get("B").unwrap();
        m.gamma0 = a;
        m.t1.insert(T1 { from: q, pop: a, label: None, to: q, push1: vec![a], upper: vec![Some(b)] });
        let c = Configuration { state: q, stacks: vec![vec![a, BOTTOM], vec![BOTTOM]] };
        let (found, _) = exists_lasso(&m, &c, &BTreeSet::from([q]), 12, 6, 10_000).unwrap();
        assert!(found);
    }

    #[test]
    fn deep_pop_rebuild_is_not_a_lasso() {
        // pop A, test bottom while re-pushing A: the bottom test below the
        // original A blocks a replay, so no infinite run exists from (q, A_)
        let (input, stack) = simple_tables(&["A"]);
        let mut m = Ompa::new(1, input, stack);
        let q = m.add_state("q");
        let r = m.add_state("r");
        m.q0 = q;
        let a = m.stack.get("A").unwrap();
        m.gamma0 = a;
        // q: pop A -> r (stack now _), r: pop _ push A_ -> q... this cycles!
        // (q,A_) -> (r,_) -> (q,A_) repeats exactly, so it IS a lasso.
        m.t1.insert(T1 { from: q, pop: a, label: None, to: r, push1: vec![], upper: vec![] });
        m.t1.insert(T1 { from: r, pop: BOTTOM, label: None, to: q, push1: vec![a, BOTTOM], upper: vec![] });
        let c = Configuration { state: q, stacks: vec![vec![a, BOTTOM]] };
        let (found, _) = exists_lasso(&m, &c, &BTreeSet::from([q]), 12, 6, 10_000).unwrap();
        assert!(found, "exact repetition through the bottom test is a valid lasso");

        // now force the rebuild to overshoot: r pushes TWO As, so the stack
        // grows and the bottom test never fires again: runs die out
        let mut m2 = Ompa::new(1, m.input.clone(), m.stack.clone());
        let q2 = m2.add_state("q");
        let r2 = m2.add_state("r");
        m2.q0 = q2;
        m2.gamma0 = a;
        m2.t1.insert(T1 { from: q2, pop: a, label: None, to: r2, push1: vec![], upper: vec![] });
        m2.t1.insert(T1 { from: r2, pop: BOTTOM, label: None, to: q2, push1: vec![a, BOTTOM], upper: vec![] });
        // q also may pop A and halt in r without re-push: no infinite branch besides the cycle
        let c2 = Configuration { state: q2, stacks: vec![vec![a, a, BOTTOM]] };
        // from (q, AA_): pop A -> (r, A_): bottom test blocked; stuck
        let (found, exhaustive) =
            exists_lasso(&m2, &c2, &BTreeSet::from([q2]), 12, 6, 10_000).unwrap();
        assert!(!found);
        assert!(exhaustive);
    }

    #[test]
    fn backward_oracle_on_two_state_machine() {
        // q -pop A-> f; target {(f, _)}: Pre* = {(f,_)} ∪ {(q, A_)}
        let (input, stack) = simple_tables(&["A"]);
        let mut m = Ompa::new(1, input, stack);
        let q = m.add_state("q");
        let f = m.add_state("f");
        m.q0 = q;
        let a = m.stack.get("A").unwrap();
        m.gamma0 = a;
        m.finals.insert(f);
        m.t1.insert(T1 { from: q, pop: a, label: None, to: f, push1: vec![], upper: vec![] });
        let goal = Configuration { state: f, stacks: vec![vec![BOTTOM]] };
        let oracle = backward_reach(&m, 3, &mut |c| Ok(*c == goal)).unwrap();
        assert!(oracle.exhaustive);
        let qa = Configuration { state: q, stacks: vec![vec![a, BOTTOM]] };
        assert!(oracle.members.contains(&goal));
        assert!(oracle.members.contains(&qa));
        assert_eq!(oracle.members.len(), 2);
    }

    #[test]
    fn t2_lasso_via_two_stacks() {
        // alternate: pop A from stack 1 pushing B on stack 2, then pop B from
        // stack 2 pushing A on stack 1
        let (input, stack) = simple_tables(&["A", "B"]);
        let mut m = Ompa::new(2, input, stack);
        let q1 = m.add_state("q1");
        let q2 = m.add_state("q2");
        m.q0 = q1;
        let a = m.stack.get("A").unwrap();
        let b = m.stack.get("B").unwrap();
        m.gamma0 = a;
        m.t1.insert(T1 { from: q1, pop: a, label: None, to: q2, push1: vec![], upper: vec![Some(b)] });
        m.t2.insert(T2 { from: q2, stack: 2, pop: b, label: None, to: q1, push1: a });
        let c = Configuration { state: q1, stacks: vec![vec![a, BOTTOM], vec![BOTTOM]] };
        let (found, _) = exists_lasso(&m, &c, &BTreeSet::from([q1]), 12, 6, 10_000).unwrap();
        assert!(found);
        // and it is found from a configuration with extra garbage below
        let c2 = Configuration { state: q1, stacks: vec![vec![a, BOTTOM], vec![b, BOTTOM]] };
        let (found2, _) = exists_lasso(&m, &c2, &BTreeSet::from([q1]), 14, 6, 10_000).unwrap();
        assert!(found2);
    }

    #[test]
    fn lasso_requires_target_visit() {
        let (input, stack) = simple_tables(&["S"]);
        let mut m = Ompa::new(1, input, stack);
        let q = m.add_state("q");
        let r = m.add_state("r");
        m.q0 = q;
        m.gamma0 = m.stack.get("S").unwrap();
        m.t1.insert(T1 { from: q, pop: BOTTOM, label: None, to: q, push1: vec![BOTTOM], upper: vec![] });
        let c = Configuration { state: q, stacks: vec![vec![BOTTOM]] };
        let (found, exhaustive) =
            exists_lasso(&m, &c, &BTreeSet::from([StateId(r.0)]), 10, 4, 10_000).unwrap();
        assert!(!found, "the loop never visits r");
        assert!(exhaustive);
    }
}
