fn main() {
    std::process::exit(nems_qnd::cli::run(std::env::args_os()));
}
