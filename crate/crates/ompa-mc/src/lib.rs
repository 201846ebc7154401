//! Model checking for ordered multi-pushdown automata.
//!
//! An ordered multi-pushdown automaton (OMPA) is a multi-stack machine where a
//! pop is only ever performed on the first non-empty stack. This crate
//! computes recognizable predecessor sets (`Pre*`, `Pre+`) for such machines
//! by a saturation procedure over generalized pushdown automata, decides
//! emptiness, solves repeated-state reachability, and performs global
//! omega-regular (LTL) model checking. Configuration sets are represented by
//! M-automata: finite automata over the stack alphabet whose initial states
//! are the machine states and whose words are the concatenated stack
//! contents.
//!
//! Entry points:
//! - [`ompa::Ompa`] and [`ompa::RawMpa`]: machine model and normal form;
//! - [`gpa::Gpa`] and [`gpa::saturate`]: generalized pushdown automata with
//!   effective pushed languages and the `Pre*` saturation;
//! - [`analysis`]: emptiness, `Pre*`/`Pre+` for machines;
//! - [`liveness::repeated_reach`]: repeated-state reachability;
//! - [`ltl::global_check`]: violating/satisfying configuration sets for an
//!   LTL property;
//! - [`text`]: the on-disk formats and DOT export; [`cli`]: the command-line
//!   front end.

pub mod analysis;
pub mod cli;
pub mod config_auto;
pub mod error;
pub mod fsa;
pub mod gpa;
pub mod liveness;
pub mod ltl;
pub mod ompa;
pub mod oracle;
pub mod symbol;
pub mod text;

pub use error::{Error, Result};
