use clap::Parser;
use fastqaoa::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    std::process::exit(execute(&cli));
}
