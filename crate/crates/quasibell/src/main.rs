fn main() -> std::process::ExitCode {
    quasibell::cli::main()
}
