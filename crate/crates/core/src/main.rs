fn main() -> std::process::ExitCode {
    aniso_core::cli::main()
}
