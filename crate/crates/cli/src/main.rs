use clap::Parser;

fn main() {
    let cli = otto_cli::Cli::parse();
    std::process::exit(otto_cli::run(&cli));
}
