use std::io::Read;
use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let input = match args.get(1) {
        Some(path) => std::fs::read_to_string(path),
        None => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf).map(|_| buf)
        }
    };
    let input = match input {
        Ok(s) => s,
        Err(e) => {
            eprintln!("bvsat: {e}");
            println!("unknown");
            return ExitCode::FAILURE;
        }
    };
    match bvsat::check_smt2(&input) {
        Ok(verdict) => {
            println!("{verdict}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("bvsat: {e}");
            println!("unknown");
            ExitCode::FAILURE
        }
    }
}
