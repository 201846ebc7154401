//! Repeated-state reachability: the configurations from which an infinite run
//! visits a target state infinitely often.
//!
//! The characterization is stem/lasso shaped. A configuration qualifies iff
//! for some stack index `i`, state `q` and head symbol `g` it can reach the
//! head set `C_i^(q,g)` (all stacks before `i` empty, `g` on top of stack
//! `i`), and the pointed configuration `c_i^(q,g)` can, using only pops of
//! stacks `1..=i`, take at least one step through a target state and come
//! back to the head set. Such a loop only grows the untouched stacks, so it
//! replays forever.
//!
//! Two refinements keep this exact for machines that test stack emptiness:
//! the head symbol may be the bottom symbol for `i = 1` (covering runs whose
//! only infinitely repeated pops re-push the bottom of stack 1), and for a
//! non-bottom head on stack 1 the lasso machine drops bottom-test
//! transitions, whose replay from a taller stack would be blocked.

use std::collections::BTreeSet;

use crate::analysis::{prestar, restrict};
use crate::config_auto::{BooleanOp, ConfigAutomaton, ConfigKind};
use crate::error::{Error, Result};
use crate::fsa::StateId;
use crate::ompa::{Configuration, Ompa};
use crate::symbol::{Symbol, BOTTOM};

/// The head set `C_i^(q,g)` and its pointed configuration.
pub struct HeadSet {
    pub i: usize,
    pub q: StateId,
    pub gamma: Symbol,
    pub automaton: ConfigAutomaton,
}

impl HeadSet {
    /// The configuration with `g` alone on stack `i` and everything else
    /// empty.
    pub fn pointed(&self, n: usize) -> Configuration {
        let mut stacks = vec![vec![BOTTOM]; n];
        if self.gamma != BOTTOM {
            stacks[self.i - 1] = vec![self.gamma, BOTTOM];
        }
        Configuration { state: self.q, stacks }
    }
}

/// M-automaton for the configurations `(q, w1, ..., wn)` with
/// `w1 = ... = w_{i-1} = bottom` and `g` on top of stack `i`.
pub fn head_set(m: &Ompa, i: usize, q: StateId, gamma: Symbol) -> Result<HeadSet> {
    if gamma == BOTTOM {
        return Err(Error::input("head symbols are non-bottom stack symbols"));
    }
    head_set_internal(m, i, q, gamma)
}

fn head_set_internal(m: &Ompa, i: usize, q: StateId, gamma: Symbol) -> Result<HeadSet> {
    if i < 1 || i > m.n {
        return Err(Error::input(format!("stack index {i} outside 1..={}", m.n)));
    }
    if q.index() >= m.state_count() {
        return Err(Error::input(format!("unknown state {q}")));
    }
    if !m.stack.contains(gamma) {
        return Err(Error::input("head symbol outside the stack alphabet"));
    }
    let mut a = ConfigAutomaton::empty(
        ConfigKind::M { stacks: m.n },
        m.state_names().to_vec(),
        m.stack.clone(),
    );
    let symbols: Vec<Symbol> = a.fsa.alphabet.symbols_no_bottom().collect();
    // bottom^(i-1), then the head symbol (or an immediate bottom), then the
    // remainder of stack i, then n-i unconstrained stacks
    let mut cur = a.rep(q)?;
    for step in 1..i {
        let next = a.fsa.add_state(format!("e{step}"));
        a.fsa.add_transition(cur, Some(BOTTOM), next);
        cur = next;
    }
    // free layers for the suffix stacks i+1..n plus the final state
    let mut layers = Vec::new();
    for j in i + 1..=m.n {
        layers.push(a.fsa.add_state(format!("lvl{j}")));
    }
    let fin = a.fsa.add_state("acc");
    a.fsa.finals.insert(fin);
    for (idx, &l) in layers.iter().enumerate() {
        let next = if idx + 1 == layers.len() { fin } else { layers[idx + 1] };
        for &s in &symbols {
            a.fsa.add_transition(l, Some(s), l);
        }
        a.fsa.add_transition(l, Some(BOTTOM), next);
    }
    let after_i = layers.first().copied().unwrap_or(fin);
    if gamma == BOTTOM {
        // stack i is exactly empty
        a.fsa.add_transition(cur, Some(BOTTOM), after_i);
    } else {
        let head = a.fsa.add_state("head");
        a.fsa.add_transition(cur, Some(gamma), head);
        for &s in &symbols {
            a.fsa.add_transition(head, Some(s), head);
        }
        a.fsa.add_transition(head, Some(BOTTOM), after_i);
    }
    Ok(HeadSet { i, q, gamma, automaton: a })
}

/// Triple-wise machine for the lasso condition: pops restricted to stacks
/// `1..=i`, and for a non-bottom head on stack 1 the bottom tests of stack 1
/// removed.
fn lasso_machine(m: &Ompa, i: usize, gamma: Symbol) -> Result<Ompa> {
    let mut b = restrict(m, i)?;
    if i == 1 && gamma != BOTTOM {
        b.t1.retain(|t| t.pop != BOTTOM);
    }
    Ok(b)
}

/// True when `q` can flow through some target state and back in `b`'s state
/// graph; a necessary condition for the lasso, used to skip triples early.
fn cycle_through_targets(b: &Ompa, q: StateId, targets: &BTreeSet<StateId>) -> bool {
    let back = b.flow_coreach(&BTreeSet::from([q]));
    let hits: BTreeSet<StateId> = targets.intersection(&back).copied().collect();
    if hits.is_empty() {
        return false;
    }
    b.flow_coreach(&hits).contains(&q)
}

enum Quick {
    Include,
    Skip,
    Unknown,
}

/// Bounded decision of the lasso condition: does the pointed configuration
/// take at least one step, visit a target state on the way, and come back to
/// the head set? A found witness is exact; a completed search without one is
/// an exact refusal; anything else falls back to the symbolic route.
fn bounded_condition(
    b: &Ompa,
    head: &HeadSet,
    targets: &BTreeSet<StateId>,
    max_steps: usize,
    max_height: usize,
    node_cap: usize,
) -> Result<Quick> {
    let pointed = head.pointed(b.n);
    let in_head = |c: &Configuration| -> bool {
        if c.state != head.q {
            return false;
        }
        if !(0..head.i - 1).all(|j| c.stacks[j].len() == 1) {
            return false;
        }
        if head.gamma == BOTTOM {
            c.stacks[head.i - 1].len() == 1
        } else {
            c.stacks[head.i - 1][0] == head.gamma
        }
    };
    let mut seen: BTreeSet<(Configuration, bool)> = BTreeSet::new();
    let mut frontier = vec![(pointed, false)];
    seen.insert(frontier[0].clone());
    let mut truncated = false;
    for _ in 0..max_steps {
        if frontier.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for (c, hit) in frontier {
            for (_, succ) in b.step(&c)? {
                if succ.max_height() > max_height {
                    truncated = true;
                    continue;
                }
                let nhit = hit || targets.contains(&succ.state);
                if nhit && in_head(&succ) {
                    return Ok(Quick::Include);
                }
                let node = (succ, nhit);
                if seen.insert(node.clone()) {
                    next.push(node);
                }
                if seen.len() > node_cap {
                    return Ok(Quick::Unknown);
                }
            }
        }
        frontier = next;
    }
    if !frontier.is_empty() {
        truncated = true;
    }
    Ok(if truncated { Quick::Unknown } else { Quick::Skip })
}

/// Configurations admitting an infinite run that visits `qf` infinitely
/// often.
pub fn repeated_reach(m: &Ompa, qf: StateId) -> Result<ConfigAutomaton> {
    repeated_reach_set(m, &BTreeSet::from([qf]))
}

/// Union form over a set of target states; visiting any state of the set
/// infinitely often qualifies (the per-state results distribute over the
/// union, so this is equivalent to, and much cheaper than, one pass per
/// target).
pub fn repeated_reach_set(m: &Ompa, targets: &BTreeSet<StateId>) -> Result<ConfigAutomaton> {
    for &t in targets {
        if t.index() >= m.state_count() {
            return Err(Error::input(format!("unknown state {t}")));
        }
    }
    let mut result = ConfigAutomaton::empty(
        ConfigKind::M { stacks: m.n },
        m.state_names().to_vec(),
        m.stack.clone(),
    );
    let mut heads: Vec<Symbol> = vec![BOTTOM];
    heads.extend(m.stack.symbols_no_bottom());
    for i in 1..=m.n {
        for q in m.states() {
            for &gamma in &heads {
                if gamma == BOTTOM && i != 1 {
                    continue;
                }
                let b = lasso_machine(m, i, gamma)?;
                if !cycle_through_targets(&b, q, targets) {
                    continue;
                }
                let head = head_set_internal(m, i, q, gamma)?;
                let looping = match bounded_condition(&b, &head, targets, 16, 8, 20_000)? {
                    Quick::Include => true,
                    Quick::Skip => false,
                    Quick::Unknown => {
                        let a1 = prestar(&b, &head.automaton)?;
                        let a2 = a1.restrict_owners(targets).reduce();
                        if a2.is_empty_language() {
                            false
                        } else {
                            // membership of the pointed configuration in
                            // Pre+(A2) = Pre(Pre*(A2)), evaluated pointwise
                            // over its one-step successors
                            let a4 = prestar(&b, &a2)?;
                            let pointed = head.pointed(m.n);
                            let mut hit = false;
                            for (_, succ) in b.step(&pointed)? {
                                if a4.member(&succ)? {
                                    hit = true;
                                    break;
                                }
                            }
                            hit
                        }
                    }
                };
                if looping {
                    let stem = prestar(m, &head.automaton)?;
                    result = result.boolean(&stem, BooleanOp::Union)?;
                }
            }
        }
    }
    Ok(result.reduce())
}
