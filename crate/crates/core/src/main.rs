fn main() -> std::process::ExitCode {
    rwwce::cli::main_with_args(std::env::args_os())
}
