use clap::Parser;
use qinner_cli::{main_with, Cli};

fn main() {
    std::process::exit(main_with(Cli::parse()));
}
