use std::process::ExitCode;

fn main() -> ExitCode {
    mtmc::cli::main_with_args(std::env::args_os())
}
