fn main() {
    std::process::exit(progdec_cli::run(std::env::args_os()));
}
