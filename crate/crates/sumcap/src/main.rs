use clap::Parser;

fn main() {
    let cli = sumcap::cli::Cli::parse();
    if let Err(e) = sumcap::cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
