fn main() -> std::process::ExitCode {
    absc::cli::main()
}
