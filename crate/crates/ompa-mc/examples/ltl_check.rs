//! Global omega-regular model checking: compute the configurations violating
//! and satisfying a formula.
//!
//! ```sh
//! cargo run --release --example ltl_check
//! ```

use ompa_mc::cli::{corpus_root, load_ompa};
use ompa_mc::ltl::{global_check, parse_ltl};
use ompa_mc::oracle::accepted_configs;
use ompa_mc::text;

fn main() -> ompa_mc::Result<()> {
    let root = corpus_root();
    let m = load_ompa(&root.join("fixtures/ltl-loop-escape.ompa"))?;
    for formula in ["G p", "F !p", "X p", "false", "true"] {
        let f = parse_ltl(formula)?;
        let chk = global_check(&m, &f)?;
        let viol = accepted_configs(&chk.violating, 2)?;
        let sat = accepted_configs(&chk.satisfying, 2)?;
        println!(
            "{:<6} violating: {:>2} / satisfying: {:>2} (heights <= 2)",
            formula,
            viol.len(),
            sat.len()
        );
        for c in viol.iter().take(3) {
            println!("        violates at {}", text::configuration_to_string(c, &m));
        }
    }
    Ok(())
}
