fn main() -> std::process::ExitCode {
    confspace::cli::main()
}
