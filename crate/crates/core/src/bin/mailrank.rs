fn main() -> std::process::ExitCode {
    mailrank::cli::main()
}
