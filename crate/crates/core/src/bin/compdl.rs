fn main() {
    std::process::exit(compdl::cli::run(std::env::args_os()));
}
