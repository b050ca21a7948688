use clap::Parser;

fn main() {
    let cli = ccca_cli::args::Cli::parse();
    match ccca_cli::run(cli) {
        Ok(outcome) => std::process::exit(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
