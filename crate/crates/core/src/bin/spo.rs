fn main() -> std::process::ExitCode {
    spo_core::cli::main()
}
