fn main() {
    std::process::exit(dnls_tw::cli::run_command(std::env::args_os()));
}
