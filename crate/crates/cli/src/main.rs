use clap::Parser;

fn main() {
    let cli = essop_cli::args::Cli::parse();
    let mut out = std::io::stdout().lock();
    let mut diag = std::io::stderr();
    if let Err(e) = essop_cli::run(cli, &mut out, &mut diag) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
