use clap::Parser;

fn main() {
    let cli = fevkit::cli::Cli::parse();
    std::process::exit(fevkit::cli::run(cli));
}
