use clap::Parser;

fn main() {
    let cli = gps_cli::Cli::parse();
    std::process::exit(gps_cli::run(&cli));
}
