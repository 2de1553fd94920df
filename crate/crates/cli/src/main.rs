use clap::Parser;

fn main() {
    let cli = subharmonics_cli::Cli::parse();
    match subharmonics_cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}
