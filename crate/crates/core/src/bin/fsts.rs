use clap::Parser;

fn main() {
    std::process::exit(fsts::cli::run(fsts::cli::Cli::parse()));
}
