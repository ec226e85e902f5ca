use std::process::ExitCode;

fn main() -> ExitCode {
    cyclealg::cli::main()
}
