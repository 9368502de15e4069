fn main() {
    std::process::exit(ormspace_cli::run(std::env::args_os()));
}
