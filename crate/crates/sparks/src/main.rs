fn main() -> std::process::ExitCode {
    sparks::cli::main()
}
