fn main() {
    std::process::exit(isingmacro_cli::run(std::env::args_os()));
}
