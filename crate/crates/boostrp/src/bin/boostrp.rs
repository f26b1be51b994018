use clap::Parser;

fn main() {
    let cli = boostrp::cli::Cli::parse();
    if let Err(e) = boostrp::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(if e.is_usage() { 2 } else { 1 });
    }
}
