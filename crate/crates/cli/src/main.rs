use clap::Parser;

fn main() {
    let cli = riskctl::Cli::parse();
    if let Err(e) = riskctl::run(cli) {
        eprintln!("{}", e.json_line());
        std::process::exit(e.code);
    }
}
