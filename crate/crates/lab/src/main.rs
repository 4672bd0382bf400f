use std::process::ExitCode;

fn main() -> ExitCode {
    partlab::cli::main_with_args(std::env::args_os())
}
