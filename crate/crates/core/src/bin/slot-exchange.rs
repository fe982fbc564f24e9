use std::process::ExitCode;

fn main() -> ExitCode {
    slot_exchange::cli::main_with_args(std::env::args_os())
}
