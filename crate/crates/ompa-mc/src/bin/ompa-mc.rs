use clap::Parser;
use ompa_mc::cli::{run, Invocation};

fn main() {
    let inv = Invocation::parse();
    match run(&inv) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
