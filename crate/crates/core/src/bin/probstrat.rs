fn main() -> std::process::ExitCode {
    probstrat::cli::main()
}
