fn main() {
    std::process::exit(blockade::cli::main(std::env::args_os()));
}
