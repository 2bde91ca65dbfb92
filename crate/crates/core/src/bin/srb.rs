fn main() {
    std::process::exit(srb::cli::main_with(std::env::args_os()));
}
