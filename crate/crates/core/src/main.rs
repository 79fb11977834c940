use std::process::ExitCode;

fn main() -> ExitCode {
    dot_denoise::cli::run(std::env::args_os())
}
