fn main() {
    std::process::exit(diracspec::cli::main_with(std::env::args_os()));
}
