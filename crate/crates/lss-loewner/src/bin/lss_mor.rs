use clap::Parser;
use lss_loewner::cli::{Cli, run};

fn main() {
    std::process::exit(run(Cli::parse()));
}
