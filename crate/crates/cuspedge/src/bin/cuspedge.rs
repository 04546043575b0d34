use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(cuspedge::cli::main_entry())
}
