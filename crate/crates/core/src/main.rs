use clap::Parser;

fn main() {
    let cli = classmoments::cli::Cli::parse();
    std::process::exit(classmoments::cli::run(cli));
}
