fn main() -> std::process::ExitCode {
    su2sigma_cli::run(std::env::args_os())
}
