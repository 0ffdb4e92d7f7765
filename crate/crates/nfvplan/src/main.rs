fn main() -> std::process::ExitCode {
    nfvplan::cli::main()
}
