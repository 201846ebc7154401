//! Interned symbols shared by alphabets and stack contents.
//!
//! A [`SymbolTable`] is a bijection between printable names and dense ids.
//! Stack alphabets always contain the bottom symbol, printed `_`, at id 0;
//! it can never be removed and is reserved in every stack of every machine.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Dense id of an interned symbol, relative to its owning table.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Symbol(pub u32);

/// The bottom-of-stack symbol. Only valid for tables built with
/// [`SymbolTable::with_bottom`].
pub const BOTTOM: Symbol = Symbol(0);

/// Printable name of the bottom symbol.
pub const BOTTOM_NAME: &str = "_";

impl Symbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    names: Vec<String>,
    index: HashMap<String, Symbol>,
    has_bottom: bool,
    fresh_counter: u32,
}

impl PartialEq for SymbolTable {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.has_bottom == other.has_bottom
    }
}
impl Eq for SymbolTable {}

impl SymbolTable {
    /// Empty table without a bottom symbol (input alphabets).
    pub fn new() -> Self {
        SymbolTable::default()
    }

    /// Table with `_` pre-interned at id 0 (stack alphabets).
    pub fn with_bottom() -> Self {
        let mut t = SymbolTable::default();
        t.has_bottom = true;
        t.intern(BOTTOM_NAME);
        t
    }

    pub fn has_bottom(&self) -> bool {
        self.has_bottom
    }

    pub fn intern(&mut self, name: &str) -> Symbol {
        if let Some(&s) = self.index.get(name) {
            return s;
        }
        let s = Symbol(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), s);
        s
    }

    /// Interns a fresh symbol that cannot collide with user-supplied names.
    /// Fresh names use the reserved `$` prefix rejected by machine parsers.
    pub fn fresh(&mut self, base: &str) -> Symbol {
        loop {
            let name = format!("${}{}", base, self.fresh_counter);
            self.fresh_counter += 1;
            if !self.index.contains_key(&name) {
                return self.intern(&name);
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<Symbol> {
        self.index.get(name).copied()
    }

    pub fn lookup(&self, name: &str) -> Result<Symbol> {
        self.get(name)
            .ok_or_else(|| Error::input(format!("unknown symbol `{name}`")))
    }

    pub fn name(&self, s: Symbol) -> &str {
        &self.names[s.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, s: Symbol) -> bool {
        s.index() < self.names.len()
    }

    /// Ids in increasing order.
    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.names.len() as u32).map(Symbol)
    }

    /// Non-bottom ids in increasing order.
    pub fn symbols_no_bottom(&self) -> impl Iterator<Item = Symbol> + '_ {
        let skip = usize::from(self.has_bottom);
        (skip..self.names.len()).map(|i| Symbol(i as u32))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// True when `other` agrees with `self` on a prefix of the id space, so
    /// symbols of `other` keep their meaning under `self`.
    pub fn is_extension_of(&self, other: &SymbolTable) -> bool {
        self.has_bottom == other.has_bottom
            && self.names.len() >= other.names.len()
            && self.names[..other.names.len()] == other.names[..]
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Renders a word top-first, `eps` when empty.
pub fn word_to_string(table: &SymbolTable, w: &[Symbol]) -> String {
    if w.is_empty() {
        "eps".to_string()
    } else {
        w.iter().map(|&s| table.name(s)).collect::<Vec<_>>().join(" ")
    }
}
