fn main() -> std::process::ExitCode {
    lmldap::cli::main()
}
