//! Decide language emptiness of ordered multi-pushdown machines.
//!
//! ```sh
//! cargo run --release --example emptiness
//! ```

use ompa_mc::analysis::ompa_emptiness;
use ompa_mc::cli::{corpus_manifest, corpus_root, load_ompa, Expectation};

fn main() -> ompa_mc::Result<()> {
    let root = corpus_root();
    for fixture in corpus_manifest() {
        if !fixture.path.ends_with(".ompa") {
            continue;
        }
        let m = load_ompa(&root.join(fixture.path))?;
        let nonempty = ompa_emptiness(&m)?;
        let verdict = if nonempty { "NONEMPTY" } else { "EMPTY" };
        let expect = match fixture.expect {
            Expectation::Nonempty => "NONEMPTY",
            Expectation::Empty => "EMPTY",
        };
        println!(
            "{:<38} {} stacks, {:>2} states -> {:<8} (expected {})",
            fixture.path,
            m.n,
            m.state_count(),
            verdict,
            expect
        );
        assert_eq!(verdict, expect);
    }
    Ok(())
}
