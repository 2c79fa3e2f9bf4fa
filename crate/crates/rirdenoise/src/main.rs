fn main() -> std::process::ExitCode {
    let status = rirdenoise::cli::main_with_args(std::env::args_os());
    std::process::ExitCode::from(status as u8)
}
