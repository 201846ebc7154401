//! Configuration automata: the symbolic representation of configuration sets.
//!
//! A configuration automaton is an FSA over a stack alphabet whose initial
//! states are exactly the states of the owning machine. An M-automaton (for an
//! n-stack machine) accepts a configuration `(q, w1, ..., wn)` iff the word
//! `w1 w2 ... wn` is accepted from the representative of `q`; every accepted
//! word decomposes uniquely into n stack words because each stack word is a
//! bottom-terminated block. A P-automaton plays the same role for generalized
//! pushdown automata, whose configurations carry a single unstructured word.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::fsa::{Fsa, StateId};
use crate::ompa::Configuration;
use crate::symbol::{Symbol, SymbolTable, BOTTOM};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ConfigKind {
    /// M-automaton for an n-stack machine.
    M { stacks: usize },
    /// P-automaton for a generalized pushdown automaton.
    P,
}

#[derive(Clone, Debug)]
pub struct ConfigAutomaton {
    pub(crate) fsa: Fsa,
    pub kind: ConfigKind,
    pub(crate) owner_names: Vec<String>,
    pub(crate) owner_reps: Vec<StateId>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum BooleanOp {
    Union,
    Intersection,
    Difference,
}

impl ConfigAutomaton {
    /// Automaton recognizing the empty configuration set.
    pub fn empty(kind: ConfigKind, owner_names: Vec<String>, alphabet: SymbolTable) -> Self {
        let mut fsa = Fsa::new(alphabet);
        let mut reps = Vec::with_capacity(owner_names.len());
        for name in &owner_names {
            let id = fsa.add_state(name.clone());
            fsa.initials.insert(id);
            reps.push(id);
        }
        ConfigAutomaton { fsa, kind, owner_names, owner_reps: reps }
    }

    /// Accepts exactly the listed configurations.
    pub fn for_configs(
        owner_names: Vec<String>,
        alphabet: SymbolTable,
        stacks: usize,
        configs: &[Configuration],
    ) -> Result<Self> {
        let mut a = ConfigAutomaton::empty(ConfigKind::M { stacks }, owner_names, alphabet);
        for c in configs {
            if c.stacks.len() != stacks {
                return Err(Error::input("configuration stack count mismatch"));
            }
            let word = c.concat_word();
            let mut cur = a.rep(c.state)?;
            for (i, &s) in word.iter().enumerate() {
                let next = a.fsa.add_state(format!("t{}", a.fsa.state_count()));
                a.fsa.add_transition(cur, Some(s), next);
                cur = next;
                if i + 1 == word.len() {
                    a.fsa.finals.insert(next);
                }
            }
            if word.is_empty() {
                a.fsa.finals.insert(cur);
            }
        }
        Ok(a)
    }

    /// Accepts every well-formed configuration of the signature: n blocks,
    /// each in `(Gamma \ {_})* _`.
    pub fn universe(owner_names: Vec<String>, alphabet: SymbolTable, stacks: usize) -> Self {
        let mut a = ConfigAutomaton::empty(ConfigKind::M { stacks }, owner_names, alphabet);
        let mut layers = Vec::with_capacity(stacks);
        for i in 0..stacks {
            layers.push(a.fsa.add_state(format!("lvl{}", i + 1)));
        }
        let fin = a.fsa.add_state("acc");
        a.fsa.finals.insert(fin);
        let symbols: Vec<Symbol> = a.fsa.alphabet.symbols_no_bottom().collect();
        for i in 0..stacks {
            let next = if i + 1 == stacks { fin } else { layers[i + 1] };
            for &s in &symbols {
                a.fsa.add_transition(layers[i], Some(s), layers[i]);
            }
            a.fsa.add_transition(layers[i], Some(BOTTOM), next);
        }
        let first_next = if stacks == 1 { fin } else { layers[1] };
        for rep in a.owner_reps.clone() {
            for &s in &symbols {
                a.fsa.add_transition(rep, Some(s), layers[0]);
            }
            a.fsa.add_transition(rep, Some(BOTTOM), first_next);
        }
        a
    }

    pub fn stacks(&self) -> Option<usize> {
        match self.kind {
            ConfigKind::M { stacks } => Some(stacks),
            ConfigKind::P => None,
        }
    }

    pub fn owner_names(&self) -> &[String] {
        &self.owner_names
    }

    pub fn owner_count(&self) -> usize {
        self.owner_names.len()
    }

    pub fn fsa(&self) -> &Fsa {
        &self.fsa
    }

    /// Mutable access for constructions that build automata piecewise; the
    /// caller keeps the owner-representative invariants.
    pub fn fsa_mut(&mut self) -> &mut Fsa {
        &mut self.fsa
    }

    pub fn rep(&self, owner: StateId) -> Result<StateId> {
        self.owner_reps
            .get(owner.index())
            .copied()
            .ok_or_else(|| Error::input(format!("unknown owner state {owner}")))
    }

    pub fn owner_by_name(&self, name: &str) -> Option<StateId> {
        self.owner_names.iter().position(|n| n == name).map(|i| StateId(i as u32))
    }

    pub fn size(&self) -> usize {
        self.fsa.size()
    }

    fn require_same_signature(&self, other: &Self) -> Result<()> {
        if self.kind != other.kind
            || self.owner_names != other.owner_names
            || self.fsa.alphabet != other.fsa.alphabet
        {
            return Err(Error::input("configuration automata have different signatures"));
        }
        Ok(())
    }

    /// Membership of an n-stack configuration (M-automata only).
    pub fn member(&self, c: &Configuration) -> Result<bool> {
        let stacks = self
            .stacks()
            .ok_or_else(|| Error::input("membership of a tuple configuration needs an M-automaton"))?;
        if c.stacks.len() != stacks {
            return Err(Error::input(format!(
                "configuration has {} stacks, automaton expects {stacks}",
                c.stacks.len()
            )));
        }
        let word = c.concat_word();
        self.member_word(c.state, &word)
    }

    /// Membership of `(owner, word)`; this is the P-automaton notion and the
    /// common core of M-automaton membership.
    pub fn member_word(&self, owner: StateId, word: &[Symbol]) -> Result<bool> {
        let rep = self.rep(owner)?;
        let mut from = BTreeSet::new();
        from.insert(rep);
        self.fsa.accepts(&from, &self.fsa.finals, word)
    }

    /// Epsilon-free, initial-isolated copy with identical language. The rep
    /// map is unchanged because both passes keep existing state ids stable.
    pub fn normalize(&self) -> Self {
        let fsa = self.fsa.eliminate_epsilon().isolate_initials();
        ConfigAutomaton {
            fsa,
            kind: self.kind,
            owner_names: self.owner_names.clone(),
            owner_reps: self.owner_reps.clone(),
        }
    }

    /// Removes useless states; owner representatives always survive.
    pub fn trim(&self) -> Self {
        let keep: BTreeSet<StateId> = self.owner_reps.iter().copied().collect();
        let (fsa, map) = self.fsa.trim_keeping(&keep);
        let owner_reps = self
            .owner_reps
            .iter()
            .map(|r| map[r.index()].expect("rep kept by trim"))
            .collect();
        ConfigAutomaton { fsa, kind: self.kind, owner_names: self.owner_names.clone(), owner_reps }
    }

    /// Trim plus forward-bisimulation quotient; owner representatives keep
    /// their identity. Recognizes the same configuration set, usually much
    /// smaller.
    pub fn reduce(&self) -> Self {
        let trimmed = self.trim();
        let keep: BTreeSet<StateId> = trimmed.owner_reps.iter().copied().collect();
        let (fsa, map) = trimmed.fsa.quotient_keeping(&keep);
        ConfigAutomaton {
            fsa,
            kind: trimmed.kind,
            owner_names: trimmed.owner_names.clone(),
            owner_reps: trimmed.owner_reps.iter().map(|r| map[r.index()]).collect(),
        }
    }

    /// True iff no configuration is accepted.
    pub fn is_empty_language(&self) -> bool {
        let reach = self.fsa.reachable_from(&self.fsa.initials);
        !reach.iter().any(|q| self.fsa.finals.contains(q))
    }

    /// Keeps only configurations whose state is in `owners`.
    pub fn restrict_owners(&self, owners: &BTreeSet<StateId>) -> Self {
        let mut out = self.clone();
        for (idx, rep) in self.owner_reps.iter().enumerate() {
            if !owners.contains(&StateId(idx as u32)) {
                // replace the rep with a fresh dead state
                let dead = out.fsa.add_state(format!("{}-dead", self.owner_names[idx]));
                out.fsa.initials.remove(rep);
                out.fsa.initials.insert(dead);
                out.owner_reps[idx] = dead;
            }
        }
        out
    }

    /// Boolean combination of recognized configuration sets.
    pub fn boolean(&self, other: &Self, op: BooleanOp) -> Result<Self> {
        self.require_same_signature(other)?;
        match op {
            BooleanOp::Union => Ok(self.union(other)),
            BooleanOp::Intersection => Ok(self.intersection(other)),
            BooleanOp::Difference => {
                let comp = other.complement()?;
                Ok(self.intersection(&comp))
            }
        }
    }

    fn union(&self, other: &Self) -> Self {
        let a = self.normalize();
        let b = other.normalize();
        let mut fsa = Fsa::new(a.fsa.alphabet.clone());
        let mut reps = Vec::with_capacity(a.owner_names.len());
        for name in &a.owner_names {
            let id = fsa.add_state(name.clone());
            fsa.initials.insert(id);
            reps.push(id);
        }
        let offset_a = fsa.state_count() as u32;
        for q in a.fsa.states() {
            fsa.add_state(format!("a.{}", a.fsa.state_name(q)));
        }
        let offset_b = fsa.state_count() as u32;
        for q in b.fsa.states() {
            fsa.add_state(format!("b.{}", b.fsa.state_name(q)));
        }
        let sh_a = |q: StateId| StateId(q.0 + offset_a);
        let sh_b = |q: StateId| StateId(q.0 + offset_b);
        for &(f, l, t) in &a.fsa.transitions {
            fsa.add_transition(sh_a(f), l, sh_a(t));
        }
        for &(f, l, t) in &b.fsa.transitions {
            fsa.add_transition(sh_b(f), l, sh_b(t));
        }
        for &f in &a.fsa.finals {
            fsa.finals.insert(sh_a(f));
        }
        for &f in &b.fsa.finals {
            fsa.finals.insert(sh_b(f));
        }
        // fresh reps copy the first moves (and acceptance) of both sides
        for (idx, &rep) in reps.iter().enumerate() {
            let ra = a.owner_reps[idx];
            let rb = b.owner_reps[idx];
            let mut edges = Vec::new();
            for &(f, l, t) in &a.fsa.transitions {
                if f == ra {
                    edges.push((rep, l, sh_a(t)));
                }
            }
            for &(f, l, t) in &b.fsa.transitions {
                if f == rb {
                    edges.push((rep, l, sh_b(t)));
                }
            }
            for e in edges {
                fsa.transitions.insert(e);
            }
            if a.fsa.finals.contains(&ra) || b.fsa.finals.contains(&rb) {
                fsa.finals.insert(rep);
            }
        }
        ConfigAutomaton {
            fsa,
            kind: self.kind,
            owner_names: self.owner_names.clone(),
            owner_reps: reps,
        }
        .trim()
    }

    fn intersection(&self, other: &Self) -> Self {
        let a = self.normalize();
        let b = other.normalize();
        let mut fsa = Fsa::new(a.fsa.alphabet.clone());
        let mut map: BTreeMap<(StateId, StateId), StateId> = BTreeMap::new();
        let mut queue: VecDeque<(StateId, StateId)> = VecDeque::new();
        let mut reps = Vec::with_capacity(a.owner_names.len());
        for (idx, name) in a.owner_names.iter().enumerate() {
            let pair = (a.owner_reps[idx], b.owner_reps[idx]);
            let id = *map.entry(pair).or_insert_with(|| {
                let id = fsa.add_state(name.clone());
                queue.push_back(pair);
                id
            });
            fsa.initials.insert(id);
            reps.push(id);
        }
        while let Some((qa, qb)) = queue.pop_front() {
            let id = map[&(qa, qb)];
            if a.fsa.finals.contains(&qa) && b.fsa.finals.contains(&qb) {
                fsa.finals.insert(id);
            }
            let mut succs: BTreeSet<(Symbol, StateId, StateId)> = BTreeSet::new();
            for &(f, l, t) in &a.fsa.transitions {
                if f != qa {
                    continue;
                }
                let s = l.expect("normalized automaton is epsilon-free");
                for &(g, m, u) in &b.fsa.transitions {
                    if g == qb && m == Some(s) {
                        succs.insert((s, t, u));
                    }
                }
            }
            for (s, t, u) in succs {
                let nid = *map.entry((t, u)).or_insert_with(|| {
                    let nid = fsa.add_state(format!("i{}", fsa.state_count()));
                    queue.push_back((t, u));
                    nid
                });
                fsa.transitions.insert((id, Some(s), nid));
            }
        }
        ConfigAutomaton {
            fsa,
            kind: self.kind,
            owner_names: self.owner_names.clone(),
            owner_reps: reps,
        }
        .trim()
    }

    /// Complement within the universe of well-formed configurations. A subset
    /// construction runs in lockstep with the stack-block counter, so only
    /// well-formed words are ever accepted.
    pub fn complement(&self) -> Result<Self> {
        let stacks = self
            .stacks()
            .ok_or_else(|| Error::input("complement is only defined for M-automata"))?;
        let a = self.normalize();
        let alphabet = a.fsa.alphabet.clone();
        let symbols: Vec<Symbol> = alphabet.symbols().collect();

        // subset state x block index (1..=stacks+1); index stacks+1 means the
        // whole configuration word has been read
        type Node = (BTreeSet<StateId>, usize);
        let mut fsa = Fsa::new(alphabet);
        let mut map: BTreeMap<Node, StateId> = BTreeMap::new();
        let mut queue: VecDeque<Node> = VecDeque::new();
        let mut reps = Vec::with_capacity(a.owner_names.len());
        for (idx, name) in a.owner_names.iter().enumerate() {
            let mut set = BTreeSet::new();
            set.insert(a.owner_reps[idx]);
            let node: Node = (set, 1);
            let id = *map.entry(node.clone()).or_insert_with(|| {
                let id = fsa.add_state(name.clone());
                queue.push_back(node);
                id
            });
            fsa.initials.insert(id);
            reps.push(id);
        }
        while let Some(node) = queue.pop_front() {
            let id = map[&node];
            let (subset, block) = &node;
            if *block == stacks + 1 {
                if !subset.iter().any(|q| a.fsa.finals.contains(q)) {
                    fsa.finals.insert(id);
                }
                continue; // word complete, no outgoing edges
            }
            for &s in &symbols {
                let next_block = if s == BOTTOM { block + 1 } else { *block };
                let mut next: BTreeSet<StateId> = BTreeSet::new();
                for &q in subset.iter() {
                    for &(f, l, t) in &a.fsa.transitions {
                        if f == q && l == Some(s) {
                            next.insert(t);
                        }
                    }
                }
                let nnode: Node = (next, next_block);
                let nid = *map.entry(nnode.clone()).or_insert_with(|| {
                    let nid = fsa.add_state(format!("c{}", fsa.state_count()));
                    queue.push_back(nnode);
                    nid
                });
                fsa.transitions.insert((id, Some(s), nid));
            }
        }
        Ok(ConfigAutomaton {
            fsa,
            kind: self.kind,
            owner_names: self.owner_names.clone(),
            owner_reps: reps,
        }
        .trim())
    }
}
