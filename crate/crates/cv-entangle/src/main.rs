use clap::Parser;

fn main() {
    let cli = cv_entangle::cli::Cli::parse();
    std::process::exit(cv_entangle::cli::run(cli));
}
