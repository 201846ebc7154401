//! Finite state automata over interned symbols.
//!
//! Transitions may carry an epsilon label in freshly parsed automata, but all
//! saturation and reduction algorithms assume epsilon-free inputs; automata
//! are normalized on load.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::symbol::{Symbol, SymbolTable};

/// Dense id of an automaton or machine state.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// Transition label: `None` is epsilon.
pub type Label = Option<Symbol>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fsa {
    pub alphabet: SymbolTable,
    names: Vec<String>,
    pub transitions: BTreeSet<(StateId, Label, StateId)>,
    pub initials: BTreeSet<StateId>,
    pub finals: BTreeSet<StateId>,
}

impl Fsa {
    pub fn new(alphabet: SymbolTable) -> Self {
        Fsa {
            alphabet,
            names: Vec::new(),
            transitions: BTreeSet::new(),
            initials: BTreeSet::new(),
            finals: BTreeSet::new(),
        }
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> StateId {
        let id = StateId(self.names.len() as u32);
        self.names.push(name.into());
        id
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.names.len() as u32).map(StateId)
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.names[q.index()]
    }

    pub fn state_names(&self) -> &[String] {
        &self.names
    }

    pub fn rename_state(&mut self, q: StateId, name: impl Into<String>) {
        self.names[q.index()] = name.into();
    }

    pub fn find_state(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|n| n == name).map(|i| StateId(i as u32))
    }

    pub fn add_transition(&mut self, from: StateId, label: Label, to: StateId) {
        debug_assert!(from.index() < self.names.len() && to.index() < self.names.len());
        if let Some(s) = label {
            debug_assert!(self.alphabet.contains(s));
        }
        self.transitions.insert((from, label, to));
    }

    /// `|A| = |Q| + |Sigma| + |Delta|`.
    pub fn size(&self) -> usize {
        self.names.len() + self.alphabet.len() + self.transitions.len()
    }

    pub fn has_epsilon(&self) -> bool {
        self.transitions.iter().any(|&(_, l, _)| l.is_none())
    }

    fn adjacency(&self) -> Vec<Vec<(Label, StateId)>> {
        let mut adj = vec![Vec::new(); self.names.len()];
        for &(f, l, t) in &self.transitions {
            adj[f.index()].push((l, t));
        }
        adj
    }

    fn eps_closure_from(&self, start: &BTreeSet<StateId>, adj: &[Vec<(Label, StateId)>]) -> BTreeSet<StateId> {
        let mut seen = start.clone();
        let mut queue: VecDeque<StateId> = start.iter().copied().collect();
        while let Some(q) = queue.pop_front() {
            for &(l, t) in &adj[q.index()] {
                if l.is_none() && seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// True iff some run over `w` from a state in `from` ends in a state in `to`.
    pub fn accepts(&self, from: &BTreeSet<StateId>, to: &BTreeSet<StateId>, w: &[Symbol]) -> Result<bool> {
        for &s in w {
            if !self.alphabet.contains(s) {
                return Err(Error::input(format!(
                    "word symbol {s} outside automaton alphabet"
                )));
            }
        }
        let adj = self.adjacency();
        let mut current = self.eps_closure_from(from, &adj);
        for &s in w {
            let mut next = BTreeSet::new();
            for &q in &current {
                for &(l, t) in &adj[q.index()] {
                    if l == Some(s) {
                        next.insert(t);
                    }
                }
            }
            current = self.eps_closure_from(&next, &adj);
            if current.is_empty() {
                return Ok(false);
            }
        }
        Ok(current.iter().any(|q| to.contains(q)))
    }

    /// Like [`Fsa::accepts`] but counts elementary steps, so tests can pin a
    /// polynomial budget on membership.
    pub fn accepts_counted(
        &self,
        from: &BTreeSet<StateId>,
        to: &BTreeSet<StateId>,
        w: &[Symbol],
    ) -> Result<(bool, usize)> {
        let adj = self.adjacency();
        let mut steps = 0usize;
        let mut current = self.eps_closure_from(from, &adj);
        steps += current.len();
        for &s in w {
            if !self.alphabet.contains(s) {
                return Err(Error::input("word symbol outside automaton alphabet"));
            }
            let mut next = BTreeSet::new();
            for &q in &current {
                for &(l, t) in &adj[q.index()] {
                    steps += 1;
                    if l == Some(s) {
                        next.insert(t);
                    }
                }
            }
            current = self.eps_closure_from(&next, &adj);
            steps += current.len();
        }
        Ok((current.iter().any(|q| to.contains(q)), steps))
    }

    pub fn accepts_word(&self, w: &[Symbol]) -> Result<bool> {
        self.accepts(&self.initials, &self.finals, w)
    }

    /// Removes all epsilon transitions without changing the recognized
    /// language between any pair of state sets.
    pub fn eliminate_epsilon(&self) -> Fsa {
        let adj = self.adjacency();
        let mut out = self.clone();
        out.transitions.clear();
        let mut finals = self.finals.clone();
        for q in self.states() {
            let mut single = BTreeSet::new();
            single.insert(q);
            let closure = self.eps_closure_from(&single, &adj);
            for &c in &closure {
                if self.finals.contains(&c) {
                    finals.insert(q);
                }
                for &(l, t) in &adj[c.index()] {
                    if let Some(s) = l {
                        out.transitions.insert((q, Some(s), t));
                    }
                }
            }
        }
        out.finals = finals;
        out
    }

    /// Clones any initial state that has incoming transitions: the clone
    /// receives all incoming edges plus copies of the outgoing edges and the
    /// final flag, the original keeps its outgoing edges and initial flag.
    /// Saturation and the reduction constructions assume this shape.
    pub fn isolate_initials(&self) -> Fsa {
        let mut out = self.clone();
        let offenders: Vec<StateId> = self
            .initials
            .iter()
            .copied()
            .filter(|&i| self.transitions.iter().any(|&(_, _, t)| t == i))
            .collect();
        if offenders.is_empty() {
            return out;
        }
        let mut clone_of: BTreeMap<StateId, StateId> = BTreeMap::new();
        for &i in &offenders {
            let c = out.add_state(format!("{}'", self.state_name(i)));
            clone_of.insert(i, c);
            if out.finals.contains(&i) {
                out.finals.insert(c);
            }
        }
        let old = std::mem::take(&mut out.transitions);
        for (f, l, t) in old {
            let nt = clone_of.get(&t).copied().unwrap_or(t);
            out.transitions.insert((f, l, nt));
            if let Some(&cf) = clone_of.get(&f) {
                out.transitions.insert((cf, l, nt));
            }
        }
        out
    }

    /// States reachable from `from` ignoring labels.
    pub fn reachable_from(&self, from: &BTreeSet<StateId>) -> BTreeSet<StateId> {
        let adj = self.adjacency();
        let mut seen = from.clone();
        let mut queue: VecDeque<StateId> = from.iter().copied().collect();
        while let Some(q) = queue.pop_front() {
            for &(_, t) in &adj[q.index()] {
                if seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    pub fn coreachable_to(&self, to: &BTreeSet<StateId>) -> BTreeSet<StateId> {
        let mut radj = vec![Vec::new(); self.names.len()];
        for &(f, _, t) in &self.transitions {
            radj[t.index()].push(f);
        }
        let mut seen = to.clone();
        let mut queue: VecDeque<StateId> = to.iter().copied().collect();
        while let Some(q) = queue.pop_front() {
            for &f in &radj[q.index()] {
                if seen.insert(f) {
                    queue.push_back(f);
                }
            }
        }
        seen
    }

    /// Drops states that are not on a path from an initial to a final state,
    /// except states listed in `keep` (owner representatives of configuration
    /// automata must survive trimming). Returns the renumbering map.
    pub fn trim_keeping(&self, keep: &BTreeSet<StateId>) -> (Fsa, Vec<Option<StateId>>) {
        let reach = self.reachable_from(&self.initials);
        let coreach = self.coreachable_to(&self.finals);
        let mut live: BTreeSet<StateId> = reach.intersection(&coreach).copied().collect();
        live.extend(keep.iter().copied());
        let mut map = vec![None; self.names.len()];
        let mut out = Fsa::new(self.alphabet.clone());
        for q in self.states() {
            if live.contains(&q) {
                let nq = out.add_state(self.state_name(q).to_string());
                map[q.index()] = Some(nq);
            }
        }
        for &(f, l, t) in &self.transitions {
            if let (Some(nf), Some(nt)) = (map[f.index()], map[t.index()]) {
                // keep only edges whose endpoints still matter
                if live.contains(&f) && live.contains(&t) {
                    out.transitions.insert((nf, l, nt));
                }
            }
        }
        for &i in &self.initials {
            if let Some(ni) = map[i.index()] {
                out.initials.insert(ni);
            }
        }
        for &f in &self.finals {
            if let Some(nf) = map[f.index()] {
                out.finals.insert(nf);
            }
        }
        (out, map)
    }

    pub fn trim(&self) -> Fsa {
        self.trim_keeping(&BTreeSet::new()).0
    }

    /// Forward-bisimulation quotient. States listed in `keep` stay in
    /// singleton classes (they carry identity that callers read back);
    /// everybody else merges when acceptance flags and letter-to-class
    /// successor maps agree. Returns the quotient and the class map.
    pub fn quotient_keeping(&self, keep: &BTreeSet<StateId>) -> (Fsa, Vec<StateId>) {
        let n = self.names.len();
        let mut class: Vec<usize> = (0..n)
            .map(|i| {
                let q = StateId(i as u32);
                if keep.contains(&q) {
                    // singleton classes first, stable by id
                    keep.iter().position(|&k| k == q).unwrap()
                } else {
                    keep.len() + usize::from(self.finals.contains(&q))
                }
            })
            .collect();
        loop {
            let mut sigs: BTreeMap<(bool, bool, Option<usize>, BTreeSet<(Label, usize)>), usize> =
                BTreeMap::new();
            let mut next = vec![0usize; n];
            let mut fresh = keep.len();
            for i in 0..n {
                let q = StateId(i as u32);
                if let Some(pos) = keep.iter().position(|&k| k == q) {
                    next[i] = pos;
                    continue;
                }
                let mut succ = BTreeSet::new();
                for &(f, l, t) in &self.transitions {
                    if f == q {
                        succ.insert((l, class[t.index()]));
                    }
                }
                let key = (
                    self.finals.contains(&q),
                    self.initials.contains(&q),
                    Some(class[i]),
                    succ,
                );
                next[i] = *sigs.entry(key).or_insert_with(|| {
                    let c = fresh;
                    fresh += 1;
                    c
                });
            }
            if next == class {
                break;
            }
            class = next;
        }
        // renumber classes densely in order of first appearance
        let mut dense: BTreeMap<usize, StateId> = BTreeMap::new();
        let mut out = Fsa::new(self.alphabet.clone());
        let mut map = Vec::with_capacity(n);
        for i in 0..n {
            let id = *dense.entry(class[i]).or_insert_with(|| {
                out.add_state(self.names[i].clone())
            });
            map.push(id);
        }
        for &(f, l, t) in &self.transitions {
            out.transitions.insert((map[f.index()], l, map[t.index()]));
        }
        for &i in &self.initials {
            out.initials.insert(map[i.index()]);
        }
        for &f in &self.finals {
            out.finals.insert(map[f.index()]);
        }
        (out, map)
    }

    /// Accepts `{ w^R | w in L(self) }`.
    pub fn reverse(&self) -> Fsa {
        let mut out = Fsa::new(self.alphabet.clone());
        out.names = self.names.clone();
        for &(f, l, t) in &self.transitions {
            out.transitions.insert((t, l, f));
        }
        out.initials = self.finals.clone();
        out.finals = self.initials.clone();
        out
    }

    /// Product automaton accepting `L(self) ∩ L(other)`.
    pub fn product(&self, other: &Fsa) -> Result<Fsa> {
        if self.alphabet != other.alphabet {
            return Err(Error::input("fsa product requires identical alphabets"));
        }
        let a = self.eliminate_epsilon();
        let b = other.eliminate_epsilon();
        let mut out = Fsa::new(self.alphabet.clone());
        let mut map: BTreeMap<(StateId, StateId), StateId> = BTreeMap::new();
        let mut queue: VecDeque<(StateId, StateId)> = VecDeque::new();
        for &ia in &a.initials {
            for &ib in &b.initials {
                let id = out.add_state(format!("{}*{}", a.state_name(ia), b.state_name(ib)));
                map.insert((ia, ib), id);
                out.initials.insert(id);
                queue.push_back((ia, ib));
            }
        }
        let adj_a = a.adjacency();
        let adj_b = b.adjacency();
        while let Some((qa, qb)) = queue.pop_front() {
            let id = map[&(qa, qb)];
            if a.finals.contains(&qa) && b.finals.contains(&qb) {
                out.finals.insert(id);
            }
            let mut succs: BTreeSet<(Symbol, StateId, StateId)> = BTreeSet::new();
            for &(la, ta) in &adj_a[qa.index()] {
                let sa = la.expect("epsilon-free");
                for &(lb, tb) in &adj_b[qb.index()] {
                    if lb == Some(sa) {
                        succs.insert((sa, ta, tb));
                    }
                }
            }
            for (s, ta, tb) in succs {
                let nid = *map.entry((ta, tb)).or_insert_with(|| {
                    let nid = out.add_state(format!("{}*{}", a.state_name(ta), b.state_name(tb)));
                    queue.push_back((ta, tb));
                    nid
                });
                out.transitions.insert((id, Some(s), nid));
            }
        }
        Ok(out)
    }

    /// Single-initial variant with identical language (for constructions that
    /// need one distinguished entry state). Requires an epsilon-free input.
    pub fn single_initial(&self) -> (Fsa, StateId) {
        if self.initials.len() == 1 {
            return (self.clone(), *self.initials.iter().next().unwrap());
        }
        let mut out = self.clone();
        let s0 = out.add_state("$init".to_string());
        let mut new_edges = Vec::new();
        for &(f, l, t) in &out.transitions {
            if out.initials.contains(&f) {
                new_edges.push((s0, l, t));
            }
        }
        for e in new_edges {
            out.transitions.insert(e);
        }
        if out.initials.iter().any(|i| out.finals.contains(i)) {
            out.finals.insert(s0);
        }
        out.initials.clear();
        out.initials.insert(s0);
        (out, s0)
    }

    /// Enumerates all words of length `<= max_len` accepted by the automaton.
    /// Test-oracle helper; exponential in `max_len`.
    pub fn bounded_language(&self, max_len: usize) -> BTreeSet<Vec<Symbol>> {
        let mut out = BTreeSet::new();
        let symbols: Vec<Symbol> = self.alphabet.symbols().collect();
        let mut stack: Vec<Vec<Symbol>> = vec![Vec::new()];
        while let Some(w) = stack.pop() {
            if self.accepts_word(&w).unwrap_or(false) {
                out.insert(w.clone());
            }
            if w.len() < max_len {
                for &s in &symbols {
                    let mut next = w.clone();
                    next.push(s);
                    stack.push(next);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(names: &[&str]) -> SymbolTable {
        let mut t = SymbolTable::new();
        for n in names {
            t.intern(n);
        }
        t
    }

    /// Automaton accepting exactly {ab}.
    fn ab_automaton() -> Fsa {
        let t = table(&["a", "b"]);
        let mut f = Fsa::new(t);
        let q0 = f.add_state("q0");
        let q1 = f.add_state("q1");
        let q2 = f.add_state("q2");
        let a = f.alphabet.get("a").unwrap();
        let b = f.alphabet.get("b").unwrap();
        f.add_transition(q0, Some(a), q1);
        f.add_transition(q1, Some(b), q2);
        f.initials.insert(q0);
        f.finals.insert(q2);
        f
    }

    #[test]
    fn empty_word_at_initial_final() {
        let mut f = Fsa::new(table(&["a"]));
        let q = f.add_state("q");
        f.initials.insert(q);
        f.finals.insert(q);
        assert!(f.accepts_word(&[]).unwrap());
    }

    #[test]
    fn ab_membership() {
        let f = ab_automaton();
        let a = f.alphabet.get("a").unwrap();
        let b = f.alphabet.get("b").unwrap();
        assert!(f.accepts_word(&[a, b]).unwrap());
        assert!(!f.accepts_word(&[a]).unwrap());
    }

    #[test]
    fn unknown_symbol_is_error() {
        let f = ab_automaton();
        assert!(f.accepts_word(&[Symbol(99)]).is_err());
    }

    #[test]
    fn reverse_of_ab_accepts_ba() {
        let f = ab_automaton().reverse();
        let a = f.alphabet.get("a").unwrap();
        let b = f.alphabet.get("b").unwrap();
        assert!(f.accepts_word(&[b, a]).unwrap());
        assert!(!f.accepts_word(&[a, b]).unwrap());
    }

    #[test]
    fn epsilon_elimination_preserves_language() {
        // q0 -eps-> q1 -a-> q2, plus q0 -b-> q2
        let t = table(&["a", "b"]);
        let mut f = Fsa::new(t);
        let q0 = f.add_state("q0");
        let q1 = f.add_state("q1");
        let q2 = f.add_state("q2");
        let a = f.alphabet.get("a").unwrap();
        let b = f.alphabet.get("b").unwrap();
        f.add_transition(q0, None, q1);
        f.add_transition(q1, Some(a), q2);
        f.add_transition(q0, Some(b), q2);
        f.initials.insert(q0);
        f.finals.insert(q2);
        let g = f.eliminate_epsilon();
        assert!(!g.has_epsilon());
        for w in f.bounded_language(4) {
            assert!(g.accepts_word(&w).unwrap());
        }
        for w in g.bounded_language(4) {
            assert!(f.accepts_word(&w).unwrap());
        }
    }

    #[test]
    fn isolate_initials_moves_incoming_edges() {
        let t = table(&["a"]);
        let mut f = Fsa::new(t);
        let q0 = f.add_state("q0");
        let q1 = f.add_state("q1");
        let a = f.alphabet.get("a").unwrap();
        f.add_transition(q0, Some(a), q0);
        f.add_transition(q0, Some(a), q1);
        f.initials.insert(q0);
        f.finals.insert(q1);
        let g = f.isolate_initials();
        for &i in &g.initials {
            assert!(g.transitions.iter().all(|&(_, _, t)| t != i));
        }
        for len in 0..=4 {
            for w in f.bounded_language(len) {
                assert_eq!(f.accepts_word(&w).unwrap(), g.accepts_word(&w).unwrap());
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        #[derive(Clone, Debug)]
        struct RawNfa {
            states: usize,
            edges: Vec<(u8, Option<u8>, u8)>,
            initials: Vec<u8>,
            finals: Vec<u8>,
        }

        fn build(raw: &RawNfa) -> Fsa {
            let mut f = Fsa::new(table(&["a", "b"]));
            for i in 0..raw.states {
                f.add_state(format!("s{i}"));
            }
            let clamp = |x: u8| StateId(x as u32 % raw.states as u32);
            for &(from, label, to) in &raw.edges {
                f.add_transition(clamp(from), label.map(|l| Symbol(l as u32 % 2)), clamp(to));
            }
            for &i in &raw.initials {
                f.initials.insert(clamp(i));
            }
            for &i in &raw.finals {
                f.finals.insert(clamp(i));
            }
            f
        }

        fn raw_nfa() -> impl Strategy<Value = RawNfa> {
            (
                1usize..=5,
                proptest::collection::vec(
                    (0u8..8, proptest::option::of(0u8..2), 0u8..8),
                    0..10,
                ),
                proptest::collection::vec(0u8..8, 1..3),
                proptest::collection::vec(0u8..8, 0..3),
            )
                .prop_map(|(states, edges, initials, finals)| RawNfa {
                    states,
                    edges,
                    initials,
                    finals,
                })
        }

        /// Independent subset-construction evaluator.
        fn powerset_accepts(f: &Fsa, w: &[Symbol]) -> bool {
            let eps = |set: &BTreeSet<StateId>| {
                let mut out = set.clone();
                loop {
                    let mut grew = false;
                    for &(from, l, to) in &f.transitions {
                        if l.is_none() && out.contains(&from) && out.insert(to) {
                            grew = true;
                        }
                    }
                    if !grew {
                        return out;
                    }
                }
            };
            let mut cur = eps(&f.initials);
            for &s in w {
                let mut next = BTreeSet::new();
                for &(from, l, to) in &f.transitions {
                    if l == Some(s) && cur.contains(&from) {
                        next.insert(to);
                    }
                }
                cur = eps(&next);
            }
            cur.iter().any(|q| f.finals.contains(q))
        }

        proptest! {
            #[test]
            fn accepts_matches_powerset_evaluation(raw in raw_nfa()) {
                let f = build(&raw);
                for w in f.alphabet.symbols().flat_map(|a| {
                    f.alphabet.symbols().map(move |b| vec![a, b])
                }) {
                    prop_assert_eq!(f.accepts_word(&w).unwrap(), powerset_accepts(&f, &w));
                }
                for len in 0..=6usize {
                    let w: Vec<Symbol> = (0..len).map(|i| Symbol((i % 2) as u32)).collect();
                    prop_assert_eq!(f.accepts_word(&w).unwrap(), powerset_accepts(&f, &w));
                }
            }

            #[test]
            fn epsilon_elimination_preserves_membership(raw in raw_nfa()) {
                let f = build(&raw);
                let g = f.eliminate_epsilon();
                prop_assert!(!g.has_epsilon());
                // exhaustive over the small alphabet up to length 6
                let mut words: Vec<Vec<Symbol>> = vec![Vec::new()];
                let mut layer = vec![Vec::new()];
                for _ in 0..6 {
                    let mut next = Vec::new();
                    for w in &layer {
                        for s in f.alphabet.symbols() {
                            let mut nw = w.clone();
                            nw.push(s);
                            next.push(nw);
                        }
                    }
                    words.extend(next.iter().cloned());
                    layer = next;
                }
                for w in words {
                    prop_assert_eq!(f.accepts_word(&w).unwrap(), g.accepts_word(&w).unwrap());
                }
            }

            #[test]
            fn reverse_is_an_involution(raw in raw_nfa()) {
                let f = build(&raw);
                let rr = f.reverse().reverse();
                for w in f.bounded_language(5) {
                    prop_assert!(rr.accepts_word(&w).unwrap());
                }
                for w in rr.bounded_language(5) {
                    prop_assert!(f.accepts_word(&w).unwrap());
                }
            }

            #[test]
            fn reverse_mirrors_membership(raw in raw_nfa()) {
                let f = build(&raw);
                let r = f.reverse();
                let mut words: Vec<Vec<Symbol>> = vec![Vec::new()];
                let mut layer = vec![Vec::new()];
                for _ in 0..5 {
                    let mut next = Vec::new();
                    for w in &layer {
                        for s in f.alphabet.symbols() {
                            let mut nw = w.clone();
                            nw.push(s);
                            next.push(nw);
                        }
                    }
                    words.extend(next.iter().cloned());
                    layer = next;
                }
                for w in words {
                    let rev: Vec<Symbol> = w.iter().rev().copied().collect();
                    prop_assert_eq!(
                        f.accepts_word(&w).unwrap(),
                        r.accepts_word(&rev).unwrap()
                    );
                }
            }

            #[test]
            fn membership_runs_within_a_polynomial_step_budget(raw in raw_nfa()) {
                let f = build(&raw);
                let w: Vec<Symbol> = (0..6).map(|i| Symbol((i % 2) as u32)).collect();
                let (_, steps) = f.accepts_counted(&f.initials, &f.finals, &w).unwrap();
                let budget = 4 * f.state_count().max(1)
                    * (f.transitions.len() + f.state_count()).max(1)
                    * (w.len() + 1);
                prop_assert!(steps <= budget, "steps {} above budget {}", steps, budget);
            }
        }
    }

    #[test]
    fn product_identity_and_annihilator() {
        let f = ab_automaton();
        // universal automaton over {a,b}
        let mut utab = SymbolTable::new();
        utab.intern("a");
        utab.intern("b");
        let mut u = Fsa::new(utab);
        let q = u.add_state("u");
        let a = u.alphabet.get("a").unwrap();
        let b = u.alphabet.get("b").unwrap();
        u.add_transition(q, Some(a), q);
        u.add_transition(q, Some(b), q);
        u.initials.insert(q);
        u.finals.insert(q);

        let p = f.product(&u).unwrap();
        assert_eq!(p.bounded_language(4), f.bounded_language(4));

        let mut etab = SymbolTable::new();
        etab.intern("a");
        etab.intern("b");
        let mut empty = Fsa::new(etab);
        let e = empty.add_state("e");
        empty.initials.insert(e);
        let pe = f.product(&empty).unwrap();
        assert!(pe.bounded_language(4).is_empty());
    }
}
