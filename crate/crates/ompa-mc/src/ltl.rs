//! Omega-regular global model checking: LTL formulas, their translation to
//! Buchi automata, the machine/automaton product, and the violating and
//! satisfying configuration sets.
//!
//! The trace of an infinite run is the sequence of state labels it visits; a
//! configuration violates a formula when SOME infinite run from it fails the
//! formula, and satisfies it otherwise. In particular a configuration with no
//! infinite run at all satisfies every formula.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::config_auto::ConfigAutomaton;
use crate::error::{Error, Result};
use crate::fsa::StateId;
use crate::liveness::repeated_reach_set;
use crate::ompa::Ompa;
use crate::symbol::SymbolTable;

/// Formula syntax tree. `F` and `G` are kept for display and desugared into
/// `U` / `R` during normalization.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Ltl {
    True,
    False,
    Prop(String),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Finally(Box<Ltl>),
    Globally(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
    Release(Box<Ltl>, Box<Ltl>),
}

impl Ltl {
    pub fn size(&self) -> usize {
        match self {
            Ltl::True | Ltl::False | Ltl::Prop(_) => 1,
            Ltl::Not(a) | Ltl::Next(a) | Ltl::Finally(a) | Ltl::Globally(a) => 1 + a.size(),
            Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Until(a, b) | Ltl::Release(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    pub fn props(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut BTreeSet<String>) {
        match self {
            Ltl::Prop(p) => {
                out.insert(p.clone());
            }
            Ltl::Not(a) | Ltl::Next(a) | Ltl::Finally(a) | Ltl::Globally(a) => {
                a.collect_props(out)
            }
            Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Until(a, b) | Ltl::Release(a, b) => {
                a.collect_props(out);
                b.collect_props(out);
            }
            _ => {}
        }
    }

    pub fn negated(&self) -> Ltl {
        Ltl::Not(Box::new(self.clone()))
    }
}

impl std::fmt::Display for Ltl {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Ltl::True => write!(f, "true"),
            Ltl::False => write!(f, "false"),
            Ltl::Prop(p) => write!(f, "{p}"),
            Ltl::Not(a) => write!(f, "!({a})"),
            Ltl::And(a, b) => write!(f, "({a} & {b})"),
            Ltl::Or(a, b) => write!(f, "({a} | {b})"),
            Ltl::Next(a) => write!(f, "X ({a})"),
            Ltl::Finally(a) => write!(f, "F ({a})"),
            Ltl::Globally(a) => write!(f, "G ({a})"),
            Ltl::Until(a, b) => write!(f, "({a} U {b})"),
            Ltl::Release(a, b) => write!(f, "({a} R {b})"),
        }
    }
}

/// Parses the CLI grammar: `true false p !f (f) f&f f|f f->f X f F f G f
/// f U f f R f`, with precedence `unary > U/R > & > | > ->`.
pub fn parse_ltl(src: &str) -> Result<Ltl> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let f = p.parse_implies()?;
    if p.pos != p.tokens.len() {
        return Err(Error::parse(1, p.col(), "trailing input after formula"));
    }
    Ok(f)
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Ident(String, usize),
    Not(usize),
    And(usize),
    Or(usize),
    Implies(usize),
    LPar(usize),
    RPar(usize),
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '!' => {
                out.push(Tok::Not(col));
                i += 1;
            }
            '&' => {
                out.push(Tok::And(col));
                i += 1;
            }
            '|' => {
                out.push(Tok::Or(col));
                i += 1;
            }
            '(' => {
                out.push(Tok::LPar(col));
                i += 1;
            }
            ')' => {
                out.push(Tok::RPar(col));
                i += 1;
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    out.push(Tok::Implies(col));
                    i += 2;
                } else {
                    return Err(Error::parse(1, col, "expected `->`"));
                }
            }
            c if c.is_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect(), col));
            }
            other => return Err(Error::parse(1, col, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn col(&self) -> usize {
        match self.tokens.get(self.pos) {
            Some(
                Tok::Ident(_, c)
                | Tok::Not(c)
                | Tok::And(c)
                | Tok::Or(c)
                | Tok::Implies(c)
                | Tok::LPar(c)
                | Tok::RPar(c),
            ) => *c,
            None => self.tokens.len() + 1,
        }
    }

    fn parse_implies(&mut self) -> Result<Ltl> {
        let lhs = self.parse_or()?;
        if matches!(self.tokens.get(self.pos), Some(Tok::Implies(_))) {
            self.pos += 1;
            let rhs = self.parse_implies()?;
            return Ok(Ltl::Or(Box::new(Ltl::Not(Box::new(lhs))), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn parse_or(&mut self) -> Result<Ltl> {
        let mut lhs = self.parse_and()?;
        while matches!(self.tokens.get(self.pos), Some(Tok::Or(_))) {
            self.pos += 1;
            let rhs = self.parse_and()?;
            lhs = Ltl::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Ltl> {
        let mut lhs = self.parse_until()?;
        while matches!(self.tokens.get(self.pos), Some(Tok::And(_))) {
            self.pos += 1;
            let rhs = self.parse_until()?;
            lhs = Ltl::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_until(&mut self) -> Result<Ltl> {
        let lhs = self.parse_unary()?;
        match self.tokens.get(self.pos) {
            Some(Tok::Ident(w, _)) if w == "U" => {
                self.pos += 1;
                let rhs = self.parse_until()?;
                Ok(Ltl::Until(Box::new(lhs), Box::new(rhs)))
            }
            Some(Tok::Ident(w, _)) if w == "R" => {
                self.pos += 1;
                let rhs = self.parse_until()?;
                Ok(Ltl::Release(Box::new(lhs), Box::new(rhs)))
            }
            _ => Ok(lhs),
        }
    }

    fn parse_unary(&mut self) -> Result<Ltl> {
        match self.tokens.get(self.pos).cloned() {
            Some(Tok::Not(_)) => {
                self.pos += 1;
                Ok(Ltl::Not(Box::new(self.parse_unary()?)))
            }
            Some(Tok::Ident(w, col)) => {
                self.pos += 1;
                match w.as_str() {
                    "X" => Ok(Ltl::Next(Box::new(self.parse_unary()?))),
                    "F" => Ok(Ltl::Finally(Box::new(self.parse_unary()?))),
                    "G" => Ok(Ltl::Globally(Box::new(self.parse_unary()?))),
                    "true" => Ok(Ltl::True),
                    "false" => Ok(Ltl::False),
                    "U" | "R" => Err(Error::parse(1, col, "temporal operator needs a left operand")),
                    _ => Ok(Ltl::Prop(w)),
                }
            }
            Some(Tok::LPar(col)) => {
                self.pos += 1;
                let f = self.parse_implies()?;
                if !matches!(self.tokens.get(self.pos), Some(Tok::RPar(_))) {
                    return Err(Error::parse(1, col, "unclosed parenthesis"));
                }
                self.pos += 1;
                Ok(f)
            }
            other => Err(Error::parse(
                1,
                self.col(),
                format!("expected a formula, found {other:?}"),
            )),
        }
    }
}

/// Negation normal form over the core connectives; `F`/`G` desugar to
/// `U`/`R`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Nnf {
    True,
    False,
    Lit(usize, bool),
    And(Box<Nnf>, Box<Nnf>),
    Or(Box<Nnf>, Box<Nnf>),
    Next(Box<Nnf>),
    Until(Box<Nnf>, Box<Nnf>),
    Release(Box<Nnf>, Box<Nnf>),
}

fn to_nnf(f: &Ltl, props: &[String], neg: bool) -> Result<Nnf> {
    let prop_id = |p: &str| {
        props
            .iter()
            .position(|x| x == p)
            .ok_or_else(|| Error::input(format!("proposition `{p}` is not declared")))
    };
    Ok(match (f, neg) {
        (Ltl::True, false) | (Ltl::False, true) => Nnf::True,
        (Ltl::True, true) | (Ltl::False, false) => Nnf::False,
        (Ltl::Prop(p), pos_neg) => Nnf::Lit(prop_id(p)?, !pos_neg),
        (Ltl::Not(a), _) => to_nnf(a, props, !neg)?,
        (Ltl::And(a, b), false) | (Ltl::Or(a, b), true) => Nnf::And(
            Box::new(to_nnf(a, props, neg)?),
            Box::new(to_nnf(b, props, neg)?),
        ),
        (Ltl::And(a, b), true) | (Ltl::Or(a, b), false) => Nnf::Or(
            Box::new(to_nnf(a, props, neg)?),
            Box::new(to_nnf(b, props, neg)?),
        ),
        (Ltl::Next(a), _) => Nnf::Next(Box::new(to_nnf(a, props, neg)?)),
        (Ltl::Finally(a), false) => {
            Nnf::Until(Box::new(Nnf::True), Box::new(to_nnf(a, props, false)?))
        }
        (Ltl::Finally(a), true) => {
            Nnf::Release(Box::new(Nnf::False), Box::new(to_nnf(a, props, true)?))
        }
        (Ltl::Globally(a), false) => {
            Nnf::Release(Box::new(Nnf::False), Box::new(to_nnf(a, props, false)?))
        }
        (Ltl::Globally(a), true) => {
            Nnf::Until(Box::new(Nnf::True), Box::new(to_nnf(a, props, true)?))
        }
        (Ltl::Until(a, b), false) => Nnf::Until(
            Box::new(to_nnf(a, props, false)?),
            Box::new(to_nnf(b, props, false)?),
        ),
        (Ltl::Until(a, b), true) => Nnf::Release(
            Box::new(to_nnf(a, props, true)?),
            Box::new(to_nnf(b, props, true)?),
        ),
        (Ltl::Release(a, b), false) => Nnf::Release(
            Box::new(to_nnf(a, props, false)?),
            Box::new(to_nnf(b, props, false)?),
        ),
        (Ltl::Release(a, b), true) => Nnf::Until(
            Box::new(to_nnf(a, props, true)?),
            Box::new(to_nnf(b, props, true)?),
        ),
    })
}

/// Buchi automaton over letters that are subsets of the proposition set,
/// encoded as bitmasks.
#[derive(Clone, Debug)]
pub struct BuchiAutomaton {
    pub props: Vec<String>,
    names: Vec<String>,
    pub transitions: BTreeSet<(StateId, u64, StateId)>,
    pub initials: BTreeSet<StateId>,
    pub accepting: BTreeSet<StateId>,
}

impl BuchiAutomaton {
    pub fn new(props: Vec<String>) -> Self {
        BuchiAutomaton {
            props,
            names: Vec::new(),
            transitions: BTreeSet::new(),
            initials: BTreeSet::new(),
            accepting: BTreeSet::new(),
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

    pub fn find_state(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|n| n == name).map(|i| StateId(i as u32))
    }

    pub fn letter_mask(&self, letter: &BTreeSet<String>) -> Result<u64> {
        let mut mask = 0u64;
        for p in letter {
            let idx = self
                .props
                .iter()
                .position(|x| x == p)
                .ok_or_else(|| Error::input(format!("proposition `{p}` is not declared")))?;
            mask |= 1 << idx;
        }
        Ok(mask)
    }

    /// Keeps only states on a path from an initial state to an accepting
    /// cycle; the accepted omega-language is unchanged.
    pub fn trim(&self) -> BuchiAutomaton {
        let mut fwd = vec![BTreeSet::new(); self.names.len()];
        let mut bwd = vec![BTreeSet::new(); self.names.len()];
        for &(f, _, t) in &self.transitions {
            fwd[f.index()].insert(t);
            bwd[t.index()].insert(f);
        }
        let reach = |starts: &BTreeSet<StateId>, adj: &Vec<BTreeSet<StateId>>| {
            let mut seen = starts.clone();
            let mut queue: VecDeque<StateId> = starts.iter().copied().collect();
            while let Some(q) = queue.pop_front() {
                for &t in &adj[q.index()] {
                    if seen.insert(t) {
                        queue.push_back(t);
                    }
                }
            }
            seen
        };
        let from_init = reach(&self.initials, &fwd);
        // accepting states on a cycle, reachable from the initials
        let mut live_acc = BTreeSet::new();
        for &a in &self.accepting {
            if !from_init.contains(&a) {
                continue;
            }
            let succs: BTreeSet<StateId> = fwd[a.index()].iter().copied().collect();
            if reach(&succs, &fwd).contains(&a) {
                live_acc.insert(a);
            }
        }
        let to_acc = reach(&live_acc, &bwd);
        let keep: BTreeSet<StateId> = from_init.intersection(&to_acc).copied().collect();
        let mut out = BuchiAutomaton::new(self.props.clone());
        let mut map = vec![None; self.names.len()];
        for q in self.states() {
            if keep.contains(&q) {
                map[q.index()] = Some(out.add_state(self.names[q.index()].clone()));
            }
        }
        for &(f, l, t) in &self.transitions {
            if let (Some(nf), Some(nt)) = (map[f.index()], map[t.index()]) {
                out.transitions.insert((nf, l, nt));
            }
        }
        for &i in &self.initials {
            if let Some(ni) = map[i.index()] {
                out.initials.insert(ni);
            }
        }
        for &a in &self.accepting {
            if let Some(na) = map[a.index()] {
                out.accepting.insert(na);
            }
        }
        if out.names.is_empty() {
            out.add_state("void");
        }
        out
    }

    /// Forward-bisimulation quotient: states with the same acceptance flag
    /// and the same letter-to-class successor map merge. Preserves the
    /// accepted omega-language and typically collapses tableau output.
    pub fn quotient(&self) -> BuchiAutomaton {
        let n = self.names.len();
        let mut class: Vec<usize> = self
            .states()
            .map(|q| usize::from(self.accepting.contains(&q)))
            .collect();
        loop {
            let mut sigs: BTreeMap<(usize, BTreeSet<(u64, usize)>), usize> = BTreeMap::new();
            let mut next = vec![0usize; n];
            for q in self.states() {
                let mut succ = BTreeSet::new();
                for &(f, l, t) in &self.transitions {
                    if f == q {
                        succ.insert((l, class[t.index()]));
                    }
                }
                let key = (class[q.index()], succ);
                let fresh = sigs.len();
                next[q.index()] = *sigs.entry(key).or_insert(fresh);
            }
            if next == class {
                break;
            }
            class = next;
        }
        let count = class.iter().max().map_or(0, |m| m + 1);
        let mut out = BuchiAutomaton::new(self.props.clone());
        for c in 0..count {
            let member = (0..n).find(|i| class[*i] == c).expect("class member");
            out.add_state(self.names[member].clone());
        }
        for &(f, l, t) in &self.transitions {
            out.transitions
                .insert((StateId(class[f.index()] as u32), l, StateId(class[t.index()] as u32)));
        }
        for &i in &self.initials {
            out.initials.insert(StateId(class[i.index()] as u32));
        }
        for &a in &self.accepting {
            out.accepting.insert(StateId(class[a.index()] as u32));
        }
        out
    }

    /// Membership of the ultimately periodic word `u v^omega`.
    pub fn accepts_lasso(&self, u: &[u64], v: &[u64]) -> bool {
        assert!(!v.is_empty(), "the period of a lasso word is non-empty");
        let mut cur = self.initials.clone();
        for &letter in u {
            let mut next = BTreeSet::new();
            for &(f, l, t) in &self.transitions {
                if cur.contains(&f) && l == letter {
                    next.insert(t);
                }
            }
            cur = next;
        }
        // product with the period positions
        let mut nodes: BTreeSet<(StateId, usize)> = cur.iter().map(|&s| (s, 0)).collect();
        let mut queue: VecDeque<(StateId, usize)> = nodes.iter().copied().collect();
        let mut edges: BTreeMap<(StateId, usize), BTreeSet<(StateId, usize)>> = BTreeMap::new();
        while let Some((s, ph)) = queue.pop_front() {
            let letter = v[ph];
            let nph = (ph + 1) % v.len();
            for &(f, l, t) in &self.transitions {
                if f == s && l == letter {
                    edges.entry((s, ph)).or_default().insert((t, nph));
                    if nodes.insert((t, nph)) {
                        queue.push_back((t, nph));
                    }
                }
            }
        }
        // an accepting node with a non-trivial cycle back to itself
        for &(s, ph) in &nodes {
            if !self.accepting.contains(&s) {
                continue;
            }
            let mut seen: BTreeSet<(StateId, usize)> =
                edges.get(&(s, ph)).cloned().unwrap_or_default();
            let mut q2: VecDeque<(StateId, usize)> = seen.iter().copied().collect();
            if seen.contains(&(s, ph)) {
                return true;
            }
            while let Some(n) = q2.pop_front() {
                if n == (s, ph) {
                    return true;
                }
                if let Some(succs) = edges.get(&n) {
                    for &m in succs {
                        if seen.insert(m) {
                            q2.push_back(m);
                        }
                    }
                }
            }
            if seen.contains(&(s, ph)) {
                return true;
            }
        }
        false
    }
}

/// Translates a formula into a Buchi automaton over `2^props` accepting
/// exactly the infinite words that satisfy it. Closure-set tableau with
/// counter-based degeneralization.
pub fn ltl_to_buchi(f: &Ltl, props: &[String]) -> Result<BuchiAutomaton> {
    if props.len() > 16 {
        return Err(Error::input("at most 16 propositions are supported"));
    }
    let nnf = to_nnf(f, props, false)?;
    let mut closure: Vec<Nnf> = Vec::new();
    collect_closure(&nnf, &mut closure);
    closure.sort();
    closure.dedup();
    if closure.len() > 24 {
        return Err(Error::input("formula too large for the tableau translation"));
    }
    let idx_of = |g: &Nnf| closure.binary_search(g).expect("closure member");
    let phi = idx_of(&nnf);
    let untils: Vec<usize> = closure
        .iter()
        .enumerate()
        .filter_map(|(i, g)| matches!(g, Nnf::Until(_, _)).then_some(i))
        .collect();

    // locally consistent claim sets
    let n = closure.len();
    let mut atoms: Vec<BTreeSet<usize>> = Vec::new();
    'subsets: for mask in 0u64..(1 << n) {
        let has = |i: usize| mask & (1 << i) != 0;
        for i in 0..n {
            if !has(i) {
                continue;
            }
            match &closure[i] {
                Nnf::False => continue 'subsets,
                Nnf::Lit(p, pos) => {
                    if let Ok(j) = closure.binary_search(&Nnf::Lit(*p, !pos)) {
                        if has(j) {
                            continue 'subsets;
                        }
                    }
                }
                Nnf::And(a, b) => {
                    if !has(idx_of(a)) || !has(idx_of(b)) {
                        continue 'subsets;
                    }
                }
                Nnf::Or(a, b) => {
                    if !has(idx_of(a)) && !has(idx_of(b)) {
                        continue 'subsets;
                    }
                }
                Nnf::Until(a, b) => {
                    if !has(idx_of(b)) && !has(idx_of(a)) {
                        continue 'subsets;
                    }
                }
                Nnf::Release(_, b) => {
                    if !has(idx_of(b)) {
                        continue 'subsets;
                    }
                }
                _ => {}
            }
        }
        atoms.push((0..n).filter(|&i| has(i)).collect());
    }

    let letters: Vec<u64> = (0..(1u64 << props.len())).collect();
    let letter_ok = |atom: &BTreeSet<usize>, letter: u64| {
        atom.iter().all(|&i| match &closure[i] {
            Nnf::Lit(p, pos) => (letter & (1 << p) != 0) == *pos,
            _ => true,
        })
    };
    let step_ok = |from: &BTreeSet<usize>, to: &BTreeSet<usize>| {
        from.iter().all(|&i| match &closure[i] {
            Nnf::Next(a) => to.contains(&idx_of(a)),
            Nnf::Until(a, b) => {
                from.contains(&idx_of(b)) || (from.contains(&idx_of(a)) && to.contains(&i))
            }
            Nnf::Release(a, b) => {
                from.contains(&idx_of(b)) && (from.contains(&idx_of(a)) || to.contains(&i))
            }
            _ => true,
        })
    };

    // generalized edges over the reachable atoms
    let mut reachable: BTreeSet<usize> = (0..atoms.len())
        .filter(|&ai| atoms[ai].contains(&phi))
        .collect();
    let mut queue: VecDeque<usize> = reachable.iter().copied().collect();
    let mut gba_edges: Vec<(usize, u64, usize)> = Vec::new();
    while let Some(ai) = queue.pop_front() {
        for (bi, batom) in atoms.iter().enumerate() {
            if !step_ok(&atoms[ai], batom) {
                continue;
            }
            let mut connected = false;
            for &letter in &letters {
                if letter_ok(&atoms[ai], letter) {
                    gba_edges.push((ai, letter, bi));
                    connected = true;
                }
            }
            if connected && reachable.insert(bi) {
                queue.push_back(bi);
            }
        }
    }

    // degeneralize with a counter over the until obligations
    let k = untils.len().max(1);
    let fulfilled = |ai: usize, j: usize| -> bool {
        if untils.is_empty() {
            return true;
        }
        let u = untils[j];
        let atom = &atoms[ai];
        if !atom.contains(&u) {
            return true;
        }
        let Nnf::Until(_, b) = &closure[u] else { unreachable!() };
        atom.contains(&idx_of(b))
    };
    let mut out = BuchiAutomaton::new(props.to_vec());
    let mut out_ids: BTreeMap<(usize, usize), StateId> = BTreeMap::new();
    let mut oq: VecDeque<(usize, usize)> = VecDeque::new();
    for &ai in &reachable {
        if atoms[ai].contains(&phi) {
            let node = (ai, 0);
            let id = *out_ids
                .entry(node)
                .or_insert_with(|| out.add_state(format!("s{ai}.0")));
            out.initials.insert(id);
            oq.push_back(node);
        }
    }
    let mut visited: BTreeSet<(usize, usize)> = oq.iter().copied().collect();
    while let Some((ai, j)) = oq.pop_front() {
        let id = out_ids[&(ai, j)];
        if j == k - 1 && fulfilled(ai, j) {
            out.accepting.insert(id);
        }
        let nj = if fulfilled(ai, j) { (j + 1) % k } else { j };
        for (a, l, b) in &gba_edges {
            if *a != ai {
                continue;
            }
            let node = (*b, nj);
            let nid = *out_ids
                .entry(node)
                .or_insert_with(|| out.add_state(format!("s{b}.{nj}")));
            if visited.insert(node) {
                oq.push_back(node);
            }
            out.transitions.insert((id, *l, nid));
        }
    }
    Ok(out.trim().quotient().trim())
}

fn collect_closure(f: &Nnf, out: &mut Vec<Nnf>) {
    out.push(f.clone());
    match f {
        Nnf::And(a, b) | Nnf::Or(a, b) | Nnf::Until(a, b) | Nnf::Release(a, b) => {
            collect_closure(a, out);
            collect_closure(b, out);
        }
        Nnf::Next(a) => collect_closure(a, out),
        Nnf::Lit(p, pos) => {
            // keep the dual literal so consistency checks can find it
            out.push(Nnf::Lit(*p, !pos));
        }
        _ => {}
    }
}

/// Direct evaluation of a formula on the ultimately periodic word
/// `u v^omega`; the independent oracle for the automaton translation.
pub fn eval_lasso(f: &Ltl, props: &[String], u: &[u64], v: &[u64]) -> Result<bool> {
    assert!(!v.is_empty());
    let nnf = to_nnf(f, props, false)?;
    let len = u.len() + v.len();
    let letter = |pos: usize| if pos < u.len() { u[pos] } else { v[pos - u.len()] };
    let next = |pos: usize| if pos + 1 < len { pos + 1 } else { u.len() };
    Ok(eval_nnf(&nnf, &letter, &next, len)[0])
}

fn eval_nnf(
    f: &Nnf,
    letter: &dyn Fn(usize) -> u64,
    next: &dyn Fn(usize) -> usize,
    len: usize,
) -> Vec<bool> {
    match f {
        Nnf::True => vec![true; len],
        Nnf::False => vec![false; len],
        Nnf::Lit(p, pos) => (0..len).map(|i| (letter(i) & (1 << p) != 0) == *pos).collect(),
        Nnf::And(a, b) => {
            let va = eval_nnf(a, letter, next, len);
            let vb = eval_nnf(b, letter, next, len);
            (0..len).map(|i| va[i] && vb[i]).collect()
        }
        Nnf::Or(a, b) => {
            let va = eval_nnf(a, letter, next, len);
            let vb = eval_nnf(b, letter, next, len);
            (0..len).map(|i| va[i] || vb[i]).collect()
        }
        Nnf::Next(a) => {
            let va = eval_nnf(a, letter, next, len);
            (0..len).map(|i| va[next(i)]).collect()
        }
        Nnf::Until(a, b) => {
            let va = eval_nnf(a, letter, next, len);
            let vb = eval_nnf(b, letter, next, len);
            let mut cur = vec![false; len];
            loop {
                let mut changed = false;
                for i in 0..len {
                    let val = vb[i] || (va[i] && cur[next(i)]);
                    if val != cur[i] {
                        cur[i] = val;
                        changed = true;
                    }
                }
                if !changed {
                    return cur;
                }
            }
        }
        Nnf::Release(a, b) => {
            let va = eval_nnf(a, letter, next, len);
            let vb = eval_nnf(b, letter, next, len);
            let mut cur = vec![true; len];
            loop {
                let mut changed = false;
                for i in 0..len {
                    let val = vb[i] && (va[i] || cur[next(i)]);
                    if val != cur[i] {
                        cur[i] = val;
                        changed = true;
                    }
                }
                if !changed {
                    return cur;
                }
            }
        }
    }
}

/// A machine whose input alphabet is its own transition set: transition k (in
/// the canonical order) reads the fresh letter `t<k>`.
pub struct SelfLabeledOmpa {
    pub ompa: Ompa,
}

pub fn self_label(m: &Ompa) -> SelfLabeledOmpa {
    let transitions = m.transitions_sorted();
    let mut input = SymbolTable::new();
    let letters: Vec<_> =
        (0..transitions.len()).map(|k| input.intern(&format!("t{k}"))).collect();
    let mut out = Ompa::new(m.n, input, m.stack.clone());
    for q in m.states() {
        out.add_state(m.state_name(q).to_string());
    }
    out.q0 = m.q0;
    out.gamma0 = m.gamma0;
    out.finals = m.finals.clone();
    out.labels = m.labels.clone();
    for (k, t) in transitions.iter().enumerate() {
        match t {
            crate::ompa::MachineTransition::T1(t) => {
                let mut nt = t.clone();
                nt.label = Some(letters[k]);
                out.t1.insert(nt);
            }
            crate::ompa::MachineTransition::T2(t) => {
                let mut nt = t.clone();
                nt.label = Some(letters[k]);
                out.t2.insert(nt);
            }
        }
    }
    SelfLabeledOmpa { ompa: out }
}

/// Product machine: each transition from state `q` synchronizes with the
/// Buchi moves that read the label set of `q` (the source state's label).
/// Returns the product and the repeating state set `Q x accepting`.
pub fn buchi_product(
    m: &SelfLabeledOmpa,
    b: &BuchiAutomaton,
) -> Result<(Ompa, BTreeSet<StateId>)> {
    let m = &m.ompa;
    for (q, props) in &m.labels {
        for p in props {
            if !b.props.contains(p) {
                return Err(Error::input(format!(
                    "state {} carries proposition `{p}` unknown to the automaton",
                    m.state_name(*q)
                )));
            }
        }
    }
    let bcount = b.state_count().max(1) as u32;
    let letter_of = |q: StateId| -> u64 {
        let mut mask = 0u64;
        if let Some(props) = m.labels.get(&q) {
            for p in props {
                let idx = b.props.iter().position(|x| x == p).expect("checked above");
                mask |= 1 << idx;
            }
        }
        mask
    };
    let mut out = Ompa::new(m.n, m.input.clone(), m.stack.clone());
    for q in m.states() {
        for s in b.states() {
            out.add_state(format!("{}@{}", m.state_name(q), b.state_name(s)));
        }
        if b.state_count() == 0 {
            out.add_state(format!("{}@void", m.state_name(q)));
        }
    }
    let pair = |q: StateId, s: StateId| StateId(q.0 * bcount + s.0);
    out.q0 = pair(m.q0, StateId(0));
    out.gamma0 = m.gamma0;
    for (q, props) in &m.labels {
        for s in 0..bcount {
            out.labels.insert(pair(*q, StateId(s)), props.clone());
        }
    }
    for t in &m.t1 {
        let letter = letter_of(t.from);
        for &(f, l, to) in &b.transitions {
            if l == letter {
                let mut nt = t.clone();
                nt.from = pair(t.from, f);
                nt.to = pair(t.to, to);
                out.t1.insert(nt);
            }
        }
    }
    for t in &m.t2 {
        let letter = letter_of(t.from);
        for &(f, l, to) in &b.transitions {
            if l == letter {
                let mut nt = t.clone();
                nt.from = pair(t.from, f);
                nt.to = pair(t.to, to);
                out.t2.insert(nt);
            }
        }
    }
    let mut repeating = BTreeSet::new();
    for q in m.states() {
        for &s in &b.accepting {
            repeating.insert(pair(q, s));
        }
    }
    Ok((out, repeating))
}

/// Result of global model checking: the configurations with a violating
/// infinite run, and their complement.
pub struct GlobalCheck {
    pub violating: ConfigAutomaton,
    pub satisfying: ConfigAutomaton,
}

/// Computes the violating and satisfying configuration sets of a formula.
pub fn global_check(m: &Ompa, f: &Ltl) -> Result<GlobalCheck> {
    let mut props: BTreeSet<String> = f.props();
    for set in m.labels.values() {
        props.extend(set.iter().cloned());
    }
    let props: Vec<String> = props.into_iter().collect();
    let b = ltl_to_buchi(&f.negated(), &props)?;
    global_check_buchi(m, &b)
}

/// Global check against a Buchi automaton for the VIOLATING traces (callers
/// supply the negation of their property directly).
pub fn global_check_buchi(m: &Ompa, b: &BuchiAutomaton) -> Result<GlobalCheck> {
    let labeled = self_label(m);
    let (product, repeating) = buchi_product(&labeled, b)?;
    let bcount = b.state_count().max(1) as u32;
    let raw = if repeating.is_empty() || b.initials.is_empty() {
        ConfigAutomaton::empty(
            crate::config_auto::ConfigKind::M { stacks: product.n },
            product.state_names().to_vec(),
            product.stack.clone(),
        )
    } else {
        repeated_reach_set(&product, &repeating)?
    };
    // project away the Buchi component: a machine configuration violates iff
    // some initial pairing of it is in the product's repeated-reach set
    let mut violating = ConfigAutomaton::empty(
        crate::config_auto::ConfigKind::M { stacks: m.n },
        m.state_names().to_vec(),
        m.stack.clone(),
    );
    let inner = raw.fsa();
    let offset = violating.fsa.state_count() as u32;
    for s in inner.states() {
        violating.fsa.add_state(format!("v.{}", inner.state_name(s)));
    }
    let sh = |s: StateId| StateId(s.0 + offset);
    for &(f2, l, t) in &inner.transitions {
        violating.fsa.transitions.insert((sh(f2), l, sh(t)));
    }
    for &f2 in &inner.finals {
        violating.fsa.finals.insert(sh(f2));
    }
    for q in m.states() {
        for &b0 in &b.initials {
            let pr = StateId(q.0 * bcount + b0.0);
            let rep_inner = raw.rep(pr)?;
            let rep_outer = violating.owner_reps[q.index()];
            let mut edges = Vec::new();
            for &(f2, l, t) in &inner.transitions {
                if f2 == rep_inner {
                    edges.push((rep_outer, l, sh(t)));
                }
            }
            for e in edges {
                violating.fsa.transitions.insert(e);
            }
            if inner.finals.contains(&rep_inner) {
                violating.fsa.finals.insert(rep_outer);
            }
        }
    }
    let violating = violating.reduce();
    let satisfying = violating.complement()?;
    Ok(GlobalCheck { violating, satisfying })
}
