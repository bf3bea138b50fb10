use clap::Parser;

fn main() {
    std::process::exit(chopper_cli::run(chopper_cli::Cli::parse()));
}
