//! Parse every shipped fixture, write it back, re-parse, and render DOT.
//!
//! ```sh
//! cargo run --release --example formats_and_dot
//! ```

use ompa_mc::cli::{corpus_manifest, corpus_root};
use ompa_mc::text;

fn main() -> ompa_mc::Result<()> {
    let root = corpus_root();
    for fixture in corpus_manifest() {
        let path = root.join(fixture.path);
        let src = std::fs::read_to_string(&path)?;
        match text::sniff_header(&src)? {
            text::Header::Ompa => {
                let m = text::parse_ompa(&src)?;
                let rendered = text::ompa_to_string(&m);
                let again = text::parse_ompa(&rendered)?;
                assert_eq!(text::ompa_to_string(&again), rendered);
                let dot = text::ompa_to_dot(&m, fixture.path);
                println!("{:<38} round-trips; DOT has {} lines", fixture.path, dot.lines().count());
            }
            text::Header::Gpa => {
                let base = path.parent().unwrap();
                let g = text::parse_gpa(&src, base)?;
                let rendered = text::gpa_to_string(&g)?;
                let again = text::parse_gpa(&rendered, base)?;
                assert_eq!(text::gpa_to_string(&again)?, rendered);
                let dot = text::gpa_to_dot(&g, fixture.path);
                println!("{:<38} round-trips; DOT has {} lines", fixture.path, dot.lines().count());
            }
            other => println!("{:<38} ({other:?})", fixture.path),
        }
    }
    Ok(())
}
