use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(voxscreen::cli::run() as u8)
}
