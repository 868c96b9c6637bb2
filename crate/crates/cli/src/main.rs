use clap::Parser;

fn main() {
    let cli = marketsched_cli::Cli::parse();
    if let Err(err) = marketsched_cli::run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(marketsched_cli::exit_code(&err));
    }
}
