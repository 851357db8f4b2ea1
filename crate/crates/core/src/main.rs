fn main() -> std::process::ExitCode {
    rsqrt_forge::cli::main()
}
