//! Saturate a generalized pushdown automaton whose pushed language is
//! supplied by a two-stack machine accepting its reversal, then query the
//! resulting predecessor set.
//!
//! ```sh
//! cargo run --release --example table1_gpa
//! ```

use ompa_mc::cli::corpus_root;
use ompa_mc::gpa::{gpa_emptiness, saturate};
use ompa_mc::text;

fn main() -> ompa_mc::Result<()> {
    let root = corpus_root();
    let path = root.join("fixtures/table1.gpa");
    let src = std::fs::read_to_string(&path)?;
    let g = text::parse_gpa(&src, path.parent().unwrap())?;

    println!("loaded GPA with {} states and {} delta entries", g.state_count(), g.delta.len());
    let started = std::time::Instant::now();
    let nonempty = gpa_emptiness(&g)?;
    println!("emptiness: {} ({:?})", if nonempty { "NONEMPTY" } else { "EMPTY" }, started.elapsed());

    // Pre*({(pf, eps)}) computed by saturation
    let sat = saturate(&g, &g.final_target(), g.default_budget())?;
    println!(
        "saturation added {} transitions with {} pushed-language queries",
        sat.added.len(),
        sat.oracle_calls
    );
    let gam = |n: &str| g.stack.get(n).unwrap();
    let queries = [
        ("p0", vec![gam("_")], true),
        ("p2", vec![gam("g2"), gam("g1"), gam("g0"), gam("_")], true),
        ("p1", vec![gam("g1"), gam("g0"), gam("_")], true),
        ("p2", vec![gam("g2"), gam("g0"), gam("_")], false),
    ];
    for (state, word, expect) in queries {
        let p = g.find_state(state).unwrap();
        let inside = sat.auto.member_word(p, &word)?;
        let rendered: Vec<&str> = word.iter().map(|&s| g.stack.name(s)).collect();
        println!("({state}, {}) in Pre*: {} (expected {})", rendered.join(" "), inside, expect);
        assert_eq!(inside, expect);
    }
    Ok(())
}
