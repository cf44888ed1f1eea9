use clap::Parser;

mod cli;

fn main() {
    let parsed = cli::Cli::parse();
    let config = match parsed.resolve() {
        Ok(config) => config,
        Err(e) => {
            eprintln!("a2line: {e}");
            std::process::exit(2);
        }
    };
    if let Err(e) = cli::run(config) {
        eprintln!("a2line: {e}");
        std::process::exit(1);
    }
}
