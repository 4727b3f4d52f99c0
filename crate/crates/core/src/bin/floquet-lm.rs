fn main() -> std::process::ExitCode {
    floquet_lm::cli::main()
}
