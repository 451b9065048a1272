fn main() {
    std::process::exit(risklab::cli::main_with(std::env::args_os()));
}
