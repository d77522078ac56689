use clap::Parser;
use mps_bench::cli::{execute, Cli};
use mps_bench::exit_code;

fn main() {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(report) => {
            print!("{report}");
            std::process::exit(exit_code::SUCCESS);
        }
        Err(e) => {
            eprintln!("{}", e.machine_line());
            std::process::exit(e.exit_code());
        }
    }
}
