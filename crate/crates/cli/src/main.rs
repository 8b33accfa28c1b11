use clap::Parser;
use radbound_cli::config::Cli;
use radbound_cli::{run, CliError};

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            eprint!("{}", outcome.summary);
            match &outcome.path {
                Some(path) => {
                    if let Some(parent) = path.parent() {
                        if !parent.as_os_str().is_empty() {
                            if let Err(e) = std::fs::create_dir_all(parent) {
                                eprintln!("radbound: cannot create {}: {e}", parent.display());
                                std::process::exit(2);
                            }
                        }
                    }
                    if let Err(e) = std::fs::write(path, &outcome.text) {
                        eprintln!("radbound: cannot write {}: {e}", path.display());
                        std::process::exit(2);
                    }
                    eprintln!("radbound: wrote {}", path.display());
                }
                None => print!("{}", outcome.text),
            }
            std::process::exit(outcome.exit);
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("radbound: {msg}");
            std::process::exit(2);
        }
    }
}
