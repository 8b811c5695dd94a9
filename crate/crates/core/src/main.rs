fn main() {
    std::process::exit(qgeo::cli::run(std::env::args_os()));
}
