fn main() {
    std::process::exit(dnes::cli::main_with(std::env::args_os()));
}
