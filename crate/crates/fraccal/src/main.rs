use clap::Parser;

fn main() {
    let args = fraccal::cli::CliArgs::parse();
    if let Err(e) = fraccal::cli::run(args) {
        eprintln!("error: {e}");
        // usage problems exit 2, runtime failures exit 3
        std::process::exit(if e.is_usage() { 2 } else { 3 });
    }
}
