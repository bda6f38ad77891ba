fn main() -> std::process::ExitCode {
    gjkernel::cli::main()
}
