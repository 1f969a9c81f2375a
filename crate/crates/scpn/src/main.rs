use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(scpn::cli::run(std::env::args_os()))
}
