//! Repeated-state reachability: which configurations admit an infinite run
//! through a given state?
//!
//! ```sh
//! cargo run --release --example repeated
//! ```

use ompa_mc::cli::{corpus_root, load_ompa};
use ompa_mc::liveness::repeated_reach;
use ompa_mc::oracle::accepted_configs;
use ompa_mc::text;

fn main() -> ompa_mc::Result<()> {
    let root = corpus_root();
    for (file, state) in [
        ("fixtures/lasso-selfloop.ompa", "qf"),
        ("fixtures/lasso-two-stack.ompa", "q1"),
        ("fixtures/lasso-bottom.ompa", "qf"),
        ("fixtures/lasso-growing.ompa", "q"),
        ("fixtures/lasso-drain.ompa", "q"),
    ] {
        let m = load_ompa(&root.join(file))?;
        let qf = m.find_state(state).unwrap();
        let auto = repeated_reach(&m, qf)?;
        let members = accepted_configs(&auto, 2)?;
        println!("{file}: {} configurations with heights <= 2 loop through {state}", members.len());
        for c in members.iter().take(4) {
            println!("    {}", text::configuration_to_string(c, &m));
        }
    }
    Ok(())
}
