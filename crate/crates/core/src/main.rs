use clap::Parser;

use clone_qfim::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("clone-qfim: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
