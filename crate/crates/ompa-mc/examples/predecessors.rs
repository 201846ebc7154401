//! Compute recognizable predecessor sets of a configuration set and check
//! the Pre*/Pre+ algebra on a bounded universe.
//!
//! ```sh
//! cargo run --release --example predecessors
//! ```

use ompa_mc::analysis::{prestar, preplus, single_config_target};
use ompa_mc::cli::{corpus_root, load_ompa};
use ompa_mc::config_auto::BooleanOp;
use ompa_mc::oracle::accepted_configs;
use ompa_mc::text;

fn main() -> ompa_mc::Result<()> {
    let root = corpus_root();
    let m = load_ompa(&root.join("fixtures/anbncn.ompa"))?;

    // target: the accepting configuration with both stacks empty
    let qc = m.find_state("qc").unwrap();
    let target = single_config_target(&m, qc)?;
    let pre = prestar(&m, &target)?;
    let plus = preplus(&m, &target)?;
    println!(
        "Pre* automaton: {} states; Pre+ automaton: {} states",
        pre.fsa().state_count(),
        plus.fsa().state_count()
    );

    for text_cfg in ["qc | _ | _", "qa | A A S _ | _", "qb | S _ | B B _", "qm | D _ | _", "qa | A _ | _"] {
        let c = text::parse_configuration(text_cfg, &m)?;
        println!(
            "{:<18} pre*: {:<5} pre+: {}",
            text_cfg,
            pre.member(&c)?,
            plus.member(&c)?
        );
    }

    // algebra on all configurations with stack heights <= 3:
    // pre+ is pre* minus nothing but the zero-step members, and
    // pre* = target ∪ pre+
    let height = 3;
    let pre_set = accepted_configs(&pre, height)?;
    let plus_set = accepted_configs(&plus, height)?;
    let union = target.boolean(&plus, BooleanOp::Union)?;
    let union_set = accepted_configs(&union, height)?;
    assert!(plus_set.is_subset(&pre_set));
    assert_eq!(pre_set, union_set);
    println!(
        "bounded algebra holds: |pre*| = {}, |pre+| = {}, pre* = target ∪ pre+",
        pre_set.len(),
        plus_set.len()
    );
    Ok(())
}
