fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(bergman_lab::cli::main_with_args(&args));
}
