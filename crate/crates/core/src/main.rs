fn main() -> std::process::ExitCode {
    fnls_lab::cli::main()
}
