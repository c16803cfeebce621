use std::process::ExitCode;

fn main() -> ExitCode {
    match exitlab::cli::run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}
