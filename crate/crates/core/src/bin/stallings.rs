fn main() {
    std::process::exit(stallings::cli::run(std::env::args_os()));
}
