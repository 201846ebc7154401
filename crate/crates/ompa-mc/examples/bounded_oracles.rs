//! The desk-scale oracles behind `--check`: bounded forward exploration,
//! backward reachability over a height-bounded configuration graph, and
//! lasso certificates.
//!
//! ```sh
//! cargo run --release --example bounded_oracles
//! ```

use std::collections::BTreeSet;

use ompa_mc::cli::{corpus_root, load_ompa};
use ompa_mc::oracle;
use ompa_mc::text;

fn main() -> ompa_mc::Result<()> {
    let root = corpus_root();
    let m = load_ompa(&root.join("fixtures/anbncn.ompa"))?;

    let ex = m.bounded_explore(&m.initial_config(), 12, 6)?;
    println!(
        "explored {} configurations in 12 steps (complete: {}, height cutoffs: {})",
        ex.configs.len(),
        ex.complete(),
        ex.height_truncations
    );
    let accepting: Vec<_> = ex.configs.iter().filter(|c| m.is_final_config(c)).collect();
    println!("accepting configurations reached: {}", accepting.len());

    // reconstruct a run to the first accepting configuration from the index
    if let Some(goal) = accepting.first() {
        let mut chain = vec![(*goal).clone()];
        while let Some((pred, _)) = ex.parents.get(chain.last().unwrap()) {
            chain.push(pred.clone());
        }
        chain.reverse();
        println!("one accepting run ({} steps):", chain.len() - 1);
        for c in &chain {
            println!("    {}", text::configuration_to_string(c, &m));
        }
    }

    // backward closure to the accepting configuration on a bounded graph
    let qc = m.find_state("qc").unwrap();
    let goal = text::parse_configuration("qc | _ | _", &m)?;
    let oracle = oracle::backward_reach(&m, 2, &mut |c| Ok(*c == goal))?;
    println!(
        "backward oracle at height 2: {} members of Pre* (exhaustive: {})",
        oracle.members.len(),
        oracle.exhaustive
    );

    // lasso certificates on a machine with infinite runs
    let lasso = load_ompa(&root.join("fixtures/lasso-two-stack.ompa"))?;
    let q1 = lasso.find_state("q1").unwrap();
    let c = text::parse_configuration("q1 | A _ | _", &lasso)?;
    let (found, definitive) =
        oracle::exists_lasso(&lasso, &c, &BTreeSet::from([q1]), 12, 6, 10_000)?;
    println!("lasso through q1 from (q1 | A _ | _): {found} (definitive: {definitive})");
    let _ = qc;
    Ok(())
}
