//! Ordered multi-pushdown automata in normal form, their semantics, and the
//! language-level closure helpers.
//!
//! Machines are kept in the two-kind normal form: a kind-1 transition pops a
//! symbol from the first stack while pushing at most two symbols there and at
//! most one non-bottom symbol on each later stack; a kind-2 transition pops a
//! non-bottom symbol from stack `i >= 2` (all earlier stacks empty) and pushes
//! exactly one non-bottom symbol on the first stack. General ordered
//! transitions are accepted through [`RawMpa`] and compiled by
//! [`RawMpa::normalize`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::fsa::{Fsa, StateId};
use crate::symbol::{Symbol, SymbolTable, BOTTOM};

/// A state plus one bottom-terminated word per stack (top first).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Configuration {
    pub state: StateId,
    pub stacks: Vec<Vec<Symbol>>,
}

impl Configuration {
    /// Concatenation `w1 w2 ... wn` read by M-automata.
    pub fn concat_word(&self) -> Vec<Symbol> {
        let mut w = Vec::new();
        for s in &self.stacks {
            w.extend_from_slice(s);
        }
        w
    }

    /// Number of non-bottom symbols on the tallest stack.
    pub fn max_height(&self) -> usize {
        self.stacks.iter().map(|s| s.len() - 1).max().unwrap_or(0)
    }

    /// All stacks empty (equal to bottom).
    pub fn all_empty(&self) -> bool {
        self.stacks.iter().all(|s| s.len() == 1)
    }
}

/// Kind-1 transition: pop from the first stack, push everywhere.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct T1 {
    pub from: StateId,
    pub pop: Symbol,
    pub label: Option<Symbol>,
    pub to: StateId,
    /// Word pushed on stack 1, top first (`alpha_1`).
    pub push1: Vec<Symbol>,
    /// One optional non-bottom symbol per stack `2..=n`.
    pub upper: Vec<Option<Symbol>>,
}

/// Kind-2 transition: pop a non-bottom symbol from stack `i >= 2` while the
/// earlier stacks are empty, push one symbol on stack 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct T2 {
    pub from: StateId,
    /// Popped stack index, 1-based, in `2..=n`.
    pub stack: usize,
    pub pop: Symbol,
    pub label: Option<Symbol>,
    pub to: StateId,
    pub push1: Symbol,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum MachineTransition {
    T1(T1),
    T2(T2),
}

impl MachineTransition {
    pub fn label(&self) -> Option<Symbol> {
        match self {
            MachineTransition::T1(t) => t.label,
            MachineTransition::T2(t) => t.label,
        }
    }

    pub fn from(&self) -> StateId {
        match self {
            MachineTransition::T1(t) => t.from,
            MachineTransition::T2(t) => t.from,
        }
    }

    pub fn to(&self) -> StateId {
        match self {
            MachineTransition::T1(t) => t.to,
            MachineTransition::T2(t) => t.to,
        }
    }

    /// 1-based index of the popped stack.
    pub fn popped_stack(&self) -> usize {
        match self {
            MachineTransition::T1(_) => 1,
            MachineTransition::T2(t) => t.stack,
        }
    }

    /// True for a kind-1 transition that pops and re-pushes the bottom symbol
    /// of the first stack (an emptiness test on stack 1).
    pub fn is_bottom_test(&self) -> bool {
        matches!(self, MachineTransition::T1(t) if t.pop == BOTTOM)
    }
}

#[derive(Clone, Debug)]
pub struct Ompa {
    pub n: usize,
    names: Vec<String>,
    pub input: SymbolTable,
    pub stack: SymbolTable,
    pub t1: BTreeSet<T1>,
    pub t2: BTreeSet<T2>,
    pub q0: StateId,
    pub gamma0: Symbol,
    pub finals: BTreeSet<StateId>,
    /// Optional state labeling for omega-regular checking.
    pub labels: BTreeMap<StateId, BTreeSet<String>>,
}

impl Ompa {
    pub fn new(n: usize, input: SymbolTable, stack: SymbolTable) -> Self {
        assert!(n >= 1, "a machine has at least one stack");
        assert!(stack.has_bottom(), "stack alphabets carry the bottom symbol");
        Ompa {
            n,
            names: Vec::new(),
            input,
            stack,
            t1: BTreeSet::new(),
            t2: BTreeSet::new(),
            q0: StateId(0),
            gamma0: Symbol(1),
            finals: BTreeSet::new(),
            labels: BTreeMap::new(),
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

    pub fn find_state(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|n| n == name).map(|i| StateId(i as u32))
    }

    /// `|M| = n + |Q| + |Sigma| + |Gamma| + |Delta|`.
    pub fn size(&self) -> usize {
        self.n + self.names.len() + self.input.len() + self.stack.len() + self.t1.len() + self.t2.len()
    }

    pub fn transitions_sorted(&self) -> Vec<MachineTransition> {
        let mut v: Vec<MachineTransition> =
            self.t1.iter().cloned().map(MachineTransition::T1).collect();
        v.extend(self.t2.iter().cloned().map(MachineTransition::T2));
        v
    }

    pub fn initial_config(&self) -> Configuration {
        let mut stacks = vec![vec![BOTTOM]; self.n];
        stacks[0] = vec![self.gamma0, BOTTOM];
        Configuration { state: self.q0, stacks }
    }

    pub fn is_final_config(&self, c: &Configuration) -> bool {
        self.finals.contains(&c.state) && c.all_empty()
    }

    fn check_state(&self, q: StateId) -> Result<()> {
        if q.index() >= self.names.len() {
            return Err(Error::input(format!("state {q} is not declared")));
        }
        Ok(())
    }

    pub fn check_config(&self, c: &Configuration) -> Result<()> {
        self.check_state(c.state)?;
        if c.stacks.len() != self.n {
            return Err(Error::input(format!(
                "configuration has {} stacks, machine has {}",
                c.stacks.len(),
                self.n
            )));
        }
        for s in &c.stacks {
            if s.is_empty() || *s.last().unwrap() != BOTTOM {
                return Err(Error::input("every stack word ends with the bottom symbol"));
            }
            if s[..s.len() - 1].iter().any(|&x| x == BOTTOM) {
                return Err(Error::input("the bottom symbol only appears at the bottom"));
            }
            for &x in s {
                if !self.stack.contains(x) {
                    return Err(Error::input("stack symbol outside the machine alphabet"));
                }
            }
        }
        Ok(())
    }

    /// Normal-form and well-formedness validation.
    pub fn validate(&self) -> Result<()> {
        self.check_state(self.q0)?;
        if self.gamma0 == BOTTOM || !self.stack.contains(self.gamma0) {
            return Err(Error::input("the initial stack symbol is a declared non-bottom symbol"));
        }
        for &f in &self.finals {
            self.check_state(f)?;
        }
        for t in &self.t1 {
            self.check_state(t.from)?;
            self.check_state(t.to)?;
            if !self.stack.contains(t.pop) {
                return Err(Error::input("t1 pops an undeclared symbol"));
            }
            if let Some(a) = t.label {
                if !self.input.contains(a) {
                    return Err(Error::input("t1 reads an undeclared input symbol"));
                }
            }
            if t.upper.len() != self.n - 1 {
                return Err(Error::input("t1 must push on exactly the stacks 2..n"));
            }
            if t.push1.len() > 2 {
                return Err(Error::input("t1 pushes at most two symbols on stack 1"));
            }
            if t.pop == BOTTOM {
                if t.push1.last() != Some(&BOTTOM)
                    || t.push1[..t.push1.len().saturating_sub(1)].contains(&BOTTOM)
                {
                    return Err(Error::input(
                        "popping bottom must re-push a word ending with the bottom symbol",
                    ));
                }
            } else if t.push1.contains(&BOTTOM) {
                return Err(Error::input("only bottom pops may push the bottom symbol"));
            }
            for up in &t.upper {
                if let Some(s) = up {
                    if *s == BOTTOM || !self.stack.contains(*s) {
                        return Err(Error::input("stacks 2..n receive non-bottom symbols"));
                    }
                }
            }
        }
        for t in &self.t2 {
            self.check_state(t.from)?;
            self.check_state(t.to)?;
            if t.stack < 2 || t.stack > self.n {
                return Err(Error::input(format!(
                    "t2 pops stack {} but the machine has stacks 2..{}",
                    t.stack, self.n
                )));
            }
            if t.pop == BOTTOM || !self.stack.contains(t.pop) {
                return Err(Error::input("t2 pops a declared non-bottom symbol"));
            }
            if t.push1 == BOTTOM || !self.stack.contains(t.push1) {
                return Err(Error::input("t2 pushes a declared non-bottom symbol on stack 1"));
            }
            if let Some(a) = t.label {
                if !self.input.contains(a) {
                    return Err(Error::input("t2 reads an undeclared input symbol"));
                }
            }
        }
        for q in self.labels.keys() {
            self.check_state(*q)?;
        }
        Ok(())
    }

    /// One-step successors. For ordered machines only the first non-empty
    /// stack can be popped; the precondition is enforced dynamically.
    pub fn step(&self, c: &Configuration) -> Result<Vec<(MachineTransition, Configuration)>> {
        self.check_config(c)?;
        let mut out = Vec::new();
        for t in &self.t1 {
            if t.from != c.state || c.stacks[0][0] != t.pop {
                continue;
            }
            let mut stacks = c.stacks.clone();
            let mut first = t.push1.clone();
            first.extend_from_slice(&c.stacks[0][1..]);
            stacks[0] = first;
            for (j, up) in t.upper.iter().enumerate() {
                if let Some(s) = up {
                    stacks[j + 1].insert(0, *s);
                }
            }
            out.push((MachineTransition::T1(t.clone()), Configuration { state: t.to, stacks }));
        }
        for t in &self.t2 {
            if t.from != c.state {
                continue;
            }
            let popped = t.stack - 1;
            if !(0..popped).all(|j| c.stacks[j].len() == 1) {
                continue;
            }
            if c.stacks[popped][0] != t.pop {
                continue;
            }
            let mut stacks = c.stacks.clone();
            stacks[0] = vec![t.push1, BOTTOM];
            stacks[popped] = c.stacks[popped][1..].to_vec();
            out.push((MachineTransition::T2(t.clone()), Configuration { state: t.to, stacks }));
        }
        Ok(out)
    }

    /// Breadth-first closure of [`Ompa::step`] truncated at the bounds.
    pub fn bounded_explore(
        &self,
        start: &Configuration,
        max_steps: usize,
        max_height: usize,
    ) -> Result<Exploration> {
        self.check_config(start)?;
        let mut ex = Exploration {
            configs: BTreeSet::new(),
            parents: BTreeMap::new(),
            height_truncations: 0,
            frontier_truncated: false,
        };
        if start.max_height() > max_height {
            ex.height_truncations += 1;
            return Ok(ex);
        }
        ex.configs.insert(start.clone());
        let mut frontier = vec![start.clone()];
        for _ in 0..max_steps {
            if frontier.is_empty() {
                break;
            }
            let mut next = Vec::new();
            for c in frontier {
                for (t, succ) in self.step(&c)? {
                    if succ.max_height() > max_height {
                        ex.height_truncations += 1;
                        continue;
                    }
                    if ex.configs.insert(succ.clone()) {
                        ex.parents.insert(succ.clone(), (c.clone(), t));
                        next.push(succ);
                    }
                }
            }
            frontier = next;
        }
        if !frontier.is_empty() {
            // unexpanded configurations remain
            let mut pending = false;
            for c in &frontier {
                if !self.step(c)?.iter().all(|(_, s)| {
                    ex.configs.contains(s) || s.max_height() > max_height
                }) {
                    pending = true;
                    break;
                }
            }
            ex.frontier_truncated = pending;
        }
        Ok(ex)
    }

    /// Product with an epsilon-free FSA over the same input alphabet; accepts
    /// `L(M) ∩ L(A)` with size `O(|M| * |A|)`.
    pub fn intersect_fsa(&self, a: &Fsa) -> Result<Ompa> {
        if a.alphabet != self.input {
            return Err(Error::input("machine and automaton input alphabets differ"));
        }
        let (a, s0) = a.eliminate_epsilon().single_initial();
        let fcount = a.state_count() as u32;
        let mut m = Ompa::new(self.n, self.input.clone(), self.stack.clone());
        for q in self.states() {
            for s in a.states() {
                m.add_state(format!("{}&{}", self.state_name(q), a.state_name(s)));
            }
        }
        let pair = |q: StateId, s: StateId| StateId(q.0 * fcount + s.0);
        m.q0 = pair(self.q0, s0);
        m.gamma0 = self.gamma0;
        for &qf in &self.finals {
            for &sf in &a.finals {
                m.finals.insert(pair(qf, sf));
            }
        }
        for (q, props) in &self.labels {
            for s in a.states() {
                m.labels.insert(pair(*q, s), props.clone());
            }
        }
        for t in &self.t1 {
            match t.label {
                None => {
                    for s in a.states() {
                        let mut nt = t.clone();
                        nt.from = pair(t.from, s);
                        nt.to = pair(t.to, s);
                        m.t1.insert(nt);
                    }
                }
                Some(x) => {
                    for &(f, l, to) in &a.transitions {
                        if l == Some(x) {
                            let mut nt = t.clone();
                            nt.from = pair(t.from, f);
                            nt.to = pair(t.to, to);
                            m.t1.insert(nt);
                        }
                    }
                }
            }
        }
        for t in &self.t2 {
            match t.label {
                None => {
                    for s in a.states() {
                        let mut nt = t.clone();
                        nt.from = pair(t.from, s);
                        nt.to = pair(t.to, s);
                        m.t2.insert(nt);
                    }
                }
                Some(x) => {
                    for &(f, l, to) in &a.transitions {
                        if l == Some(x) {
                            let mut nt = t.clone();
                            nt.from = pair(t.from, f);
                            nt.to = pair(t.to, to);
                            m.t2.insert(nt);
                        }
                    }
                }
            }
        }
        Ok(m)
    }

    /// Accepts `L(self) ∪ L(other)`; both machines need the same stack count
    /// and input alphabet.
    pub fn union(&self, other: &Ompa) -> Result<Ompa> {
        if self.n != other.n {
            return Err(Error::input("union requires machines with the same stack count"));
        }
        if self.input != other.input {
            return Err(Error::input("union requires machines over the same input alphabet"));
        }
        let mut stack = self.stack.clone();
        let remap: Vec<Symbol> =
            other.stack.names().iter().map(|n| stack.intern(n)).collect();
        let start = stack.fresh("u");
        let mut m = Ompa::new(self.n, self.input.clone(), stack);
        let q0 = m.add_state("$u0");
        m.q0 = q0;
        m.gamma0 = start;
        let off1 = m.names.len() as u32;
        for q in self.states() {
            m.add_state(format!("l.{}", self.state_name(q)));
        }
        let off2 = m.names.len() as u32;
        for q in other.states() {
            m.add_state(format!("r.{}", other.state_name(q)));
        }
        let sh1 = |q: StateId| StateId(q.0 + off1);
        let sh2 = |q: StateId| StateId(q.0 + off2);
        let rm = |s: Symbol| remap[s.index()];
        for t in &self.t1 {
            let mut nt = t.clone();
            nt.from = sh1(t.from);
            nt.to = sh1(t.to);
            m.t1.insert(nt);
        }
        for t in &self.t2 {
            let mut nt = t.clone();
            nt.from = sh1(t.from);
            nt.to = sh1(t.to);
            m.t2.insert(nt);
        }
        for t in &other.t1 {
            m.t1.insert(T1 {
                from: sh2(t.from),
                pop: rm(t.pop),
                label: t.label,
                to: sh2(t.to),
                push1: t.push1.iter().map(|&s| rm(s)).collect(),
                upper: t.upper.iter().map(|u| u.map(rm)).collect(),
            });
        }
        for t in &other.t2 {
            m.t2.insert(T2 {
                from: sh2(t.from),
                stack: t.stack,
                pop: rm(t.pop),
                label: t.label,
                to: sh2(t.to),
                push1: rm(t.push1),
            });
        }
        // dispatch into either component
        m.t1.insert(T1 {
            from: q0,
            pop: start,
            label: None,
            to: sh1(self.q0),
            push1: vec![self.gamma0],
            upper: vec![None; self.n - 1],
        });
        m.t1.insert(T1 {
            from: q0,
            pop: start,
            label: None,
            to: sh2(other.q0),
            push1: vec![rm(other.gamma0)],
            upper: vec![None; self.n - 1],
        });
        for &f in &self.finals {
            m.finals.insert(sh1(f));
        }
        for &f in &other.finals {
            m.finals.insert(sh2(f));
        }
        for (q, props) in &self.labels {
            m.labels.insert(sh1(*q), props.clone());
        }
        for (q, props) in &other.labels {
            m.labels.insert(sh2(*q), props.clone());
        }
        Ok(m)
    }

    pub(crate) fn flow_coreach(&self, targets: &BTreeSet<StateId>) -> BTreeSet<StateId> {
        let mut radj = vec![Vec::new(); self.names.len()];
        for t in &self.t1 {
            radj[t.to.index()].push(t.from);
        }
        for t in &self.t2 {
            radj[t.to.index()].push(t.from);
        }
        let mut seen = targets.clone();
        let mut queue: VecDeque<StateId> = targets.iter().copied().collect();
        while let Some(q) = queue.pop_front() {
            for &f in &radj[q.index()] {
                if seen.insert(f) {
                    queue.push_back(f);
                }
            }
        }
        seen
    }

    /// Restriction to states that can still reach one of `targets` in the
    /// state graph. Runs that end in a target state are preserved exactly;
    /// only dead detours disappear, so target-directed predecessor analyses
    /// are unaffected. Returns the state renumbering.
    pub(crate) fn trim_coreach(&self, targets: &BTreeSet<StateId>) -> (Ompa, Vec<Option<StateId>>) {
        let mut live = self.flow_coreach(targets);
        live.insert(self.q0);
        let mut m = Ompa::new(self.n, self.input.clone(), self.stack.clone());
        let mut map = vec![None; self.names.len()];
        for q in self.states() {
            if live.contains(&q) {
                map[q.index()] = Some(m.add_state(self.state_name(q).to_string()));
            }
        }
        m.q0 = map[self.q0.index()].unwrap();
        m.gamma0 = self.gamma0;
        for t in &self.t1 {
            if let (Some(f), Some(to)) = (map[t.from.index()], map[t.to.index()]) {
                let mut nt = t.clone();
                nt.from = f;
                nt.to = to;
                m.t1.insert(nt);
            }
        }
        for t in &self.t2 {
            if let (Some(f), Some(to)) = (map[t.from.index()], map[t.to.index()]) {
                let mut nt = t.clone();
                nt.from = f;
                nt.to = to;
                m.t2.insert(nt);
            }
        }
        for &f in &self.finals {
            if let Some(nf) = map[f.index()] {
                m.finals.insert(nf);
            }
        }
        for (q, props) in &self.labels {
            if let Some(nq) = map[q.index()] {
                m.labels.insert(nq, props.clone());
            }
        }
        (m, map)
    }
}

/// Result of a bounded forward exploration.
#[derive(Clone, Debug)]
pub struct Exploration {
    pub configs: BTreeSet<Configuration>,
    /// Forward run index: each discovered configuration maps to its BFS
    /// predecessor and the transition that produced it.
    pub parents: BTreeMap<Configuration, (Configuration, MachineTransition)>,
    /// Successors discarded because a stack exceeded the height bound.
    pub height_truncations: usize,
    /// True when the step budget ran out with unexpanded configurations.
    pub frontier_truncated: bool,
}

impl Exploration {
    /// True when the reported configuration set is forward-closed, i.e. the
    /// oracle was exhaustive for this instance.
    pub fn complete(&self) -> bool {
        self.height_truncations == 0 && !self.frontier_truncated
    }
}

/// General ordered multi-pushdown transitions prior to normal-form
/// compilation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct RawTransition {
    pub from: StateId,
    /// `gamma_i` per stack; `None` is epsilon (stack untouched).
    pub pops: Vec<Option<Symbol>>,
    pub label: Option<Symbol>,
    pub to: StateId,
    /// `alpha_i` per stack, top first.
    pub pushes: Vec<Vec<Symbol>>,
}

#[derive(Clone, Debug)]
pub struct RawMpa {
    pub n: usize,
    pub names: Vec<String>,
    pub input: SymbolTable,
    pub stack: SymbolTable,
    pub transitions: Vec<RawTransition>,
    pub q0: StateId,
    pub gamma0: Symbol,
    pub finals: BTreeSet<StateId>,
    pub labels: BTreeMap<StateId, BTreeSet<String>>,
}

/// Output of [`RawMpa::normalize`]: the machine plus the embedding of the old
/// state space into the new one.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub ompa: Ompa,
    pub state_map: Vec<StateId>,
}

impl RawMpa {
    /// 0-based index of the popped stack, or `None` for a pure push.
    /// Validates the ordered constraint and the bottom rules.
    fn popped_index(&self, t: &RawTransition, pos: usize) -> Result<Option<usize>> {
        if t.pops.len() != self.n || t.pushes.len() != self.n {
            return Err(Error::input(format!(
                "transition {pos}: expected {} pop and push entries",
                self.n
            )));
        }
        let idx = t.pops.iter().rposition(|p| p.is_some());
        if let Some(i) = idx {
            for j in 0..i {
                if t.pops[j] != Some(BOTTOM) {
                    return Err(Error::input(format!(
                        "transition {pos}: popping stack {} requires stacks 1..{} to test bottom \
                         (ordered constraint)",
                        i + 1,
                        i
                    )));
                }
            }
            if i >= 1 && t.pops[i] == Some(BOTTOM) {
                return Err(Error::input(format!(
                    "transition {pos}: popping the bottom symbol from stack {} is not \
                     expressible in normal form",
                    i + 1
                )));
            }
        }
        for j in 0..self.n {
            let pushed = &t.pushes[j];
            if t.pops[j] == Some(BOTTOM) {
                if pushed.last() != Some(&BOTTOM)
                    || pushed[..pushed.len() - 1].contains(&BOTTOM)
                {
                    return Err(Error::input(format!(
                        "transition {pos}: stack {} pops bottom and must re-push a word \
                         ending with one bottom",
                        j + 1
                    )));
                }
            } else if pushed.contains(&BOTTOM) {
                return Err(Error::input(format!(
                    "transition {pos}: stack {} may not push the bottom symbol",
                    j + 1
                )));
            }
        }
        Ok(idx)
    }

    /// Compiles to the two-kind normal form. Transitions already in normal
    /// shape pass through untouched; the rest split into chains over fresh
    /// `$`-states and one fresh chain symbol per rewritten transition.
    pub fn normalize(&self) -> Result<Normalized> {
        let mut m = Ompa::new(self.n, self.input.clone(), self.stack.clone());
        for name in &self.names {
            m.add_state(name.clone());
        }
        m.q0 = self.q0;
        m.gamma0 = self.gamma0;
        m.finals = self.finals.clone();
        m.labels = self.labels.clone();
        let state_map: Vec<StateId> = (0..self.names.len() as u32).map(StateId).collect();

        // expand pure pushes over every possible stack-1 top
        let mut staged: Vec<RawTransition> = Vec::new();
        for (pos, t) in self.transitions.iter().enumerate() {
            match self.popped_index(t, pos)? {
                None => {
                    for g in self.stack.symbols() {
                        let mut nt = t.clone();
                        nt.pops[0] = Some(g);
                        nt.pushes[0].push(g);
                        staged.push(nt);
                    }
                }
                Some(_) => staged.push(t.clone()),
            }
        }

        for t in &staged {
            let i = t.pops.iter().rposition(|p| p.is_some()).expect("staged transitions pop");
            if i == 0 {
                self.emit_stack1(&mut m, t)?;
            } else {
                self.emit_upper(&mut m, t, i)?;
            }
        }
        let ompa = m;
        ompa.validate()?;
        Ok(Normalized { ompa, state_map })
    }

    /// Pop on stack 1: either a direct kind-1 transition or a chain.
    fn emit_stack1(&self, m: &mut Ompa, t: &RawTransition) -> Result<()> {
        let pop = t.pops[0].unwrap();
        let direct = t.pushes[0].len() <= 2 && t.pushes[1..].iter().all(|p| p.len() <= 1);
        if direct {
            m.t1.insert(T1 {
                from: t.from,
                pop,
                label: t.label,
                to: t.to,
                push1: t.pushes[0].clone(),
                upper: t.pushes[1..].iter().map(|p| p.first().copied()).collect(),
            });
            return Ok(());
        }
        let hold = m.stack.fresh("x");
        // first step replaces the popped symbol with the chain marker
        let push1 = if pop == BOTTOM { vec![hold, BOTTOM] } else { vec![hold] };
        let alpha1 = if pop == BOTTOM {
            &t.pushes[0][..t.pushes[0].len() - 1]
        } else {
            &t.pushes[0][..]
        };
        let mut cur = m.add_state(format!("$c{}", m.state_count()));
        m.t1.insert(T1 {
            from: t.from,
            pop,
            label: t.label,
            to: cur,
            push1,
            upper: vec![None; self.n - 1],
        });
        cur = self.emit_jobs(m, cur, hold, alpha1, &t.pushes[1..]);
        // final step drops the marker, leaving alpha_1 in place
        m.t1.insert(T1 {
            from: cur,
            pop: hold,
            label: None,
            to: t.to,
            push1: Vec::new(),
            upper: vec![None; self.n - 1],
        });
        Ok(())
    }

    /// Pop on stack `i + 1 >= 2`: a kind-2 transition, then a chain restoring
    /// the pushes the raw transition performed on the other stacks.
    fn emit_upper(&self, m: &mut Ompa, t: &RawTransition, i: usize) -> Result<()> {
        let pop = t.pops[i].unwrap();
        // already the exact normal shape: push one symbol on stack 1 only
        let plain = t.pushes[0].len() == 2
            && t.pushes[0][1] == BOTTOM
            && t.pushes[0][0] != BOTTOM
            && (1..i).all(|j| t.pushes[j] == vec![BOTTOM])
            && (i..self.n).all(|j| t.pushes[j].is_empty());
        if plain {
            m.t2.insert(T2 {
                from: t.from,
                stack: i + 1,
                pop,
                label: t.label,
                to: t.to,
                push1: t.pushes[0][0],
            });
            return Ok(());
        }
        let hold = m.stack.fresh("x");
        let cur = m.add_state(format!("$c{}", m.state_count()));
        m.t2.insert(T2 {
            from: t.from,
            stack: i + 1,
            pop,
            label: t.label,
            to: cur,
            push1: hold,
        });
        let alpha1 = &t.pushes[0][..t.pushes[0].len() - 1]; // stack 1 popped bottom
        let mut uppers: Vec<&[Symbol]> = Vec::with_capacity(self.n - 1);
        for j in 1..self.n {
            let w = &t.pushes[j];
            // stacks between 1 and the popped one re-push their bottom
            if j < i {
                uppers.push(&w[..w.len() - 1]);
            } else {
                uppers.push(&w[..]);
            }
        }
        let owned: Vec<Vec<Symbol>> = uppers.iter().map(|w| w.to_vec()).collect();
        let cur = self.emit_jobs(m, cur, hold, alpha1, &owned);
        m.t1.insert(T1 {
            from: cur,
            pop: hold,
            label: None,
            to: t.to,
            push1: Vec::new(),
            upper: vec![None; self.n - 1],
        });
        Ok(())
    }

    /// Serial chain that deposits one pending symbol per step while the chain
    /// marker stays on top of stack 1. Upper-stack words are emitted deepest
    /// symbol first; stack-1 symbols are slid under the marker the same way.
    fn emit_jobs(
        &self,
        m: &mut Ompa,
        mut cur: StateId,
        hold: Symbol,
        alpha1: &[Symbol],
        uppers: &[Vec<Symbol>],
    ) -> StateId {
        enum Job {
            Upper(usize, Symbol),
            First(Symbol),
        }
        let mut jobs = Vec::new();
        for (j, w) in uppers.iter().enumerate() {
            for &s in w.iter().rev() {
                jobs.push(Job::Upper(j, s));
            }
        }
        for &s in alpha1.iter().rev() {
            jobs.push(Job::First(s));
        }
        for job in jobs {
            let next = m.add_state(format!("$c{}", m.state_count()));
            let (push1, upper) = match job {
                Job::Upper(j, s) => {
                    let mut up = vec![None; self.n - 1];
                    up[j] = Some(s);
                    (vec![hold], up)
                }
                Job::First(s) => (vec![hold, s], vec![None; self.n - 1]),
            };
            m.t1.insert(T1 { from: cur, pop: hold, label: None, to: next, push1, upper });
            cur = next;
        }
        cur
    }
}
