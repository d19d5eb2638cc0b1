fn main() -> std::process::ExitCode {
    zigzag::cli::main_entry()
}
