fn main() {
    std::process::exit(vidstitch::cli::main_with(std::env::args_os()));
}
