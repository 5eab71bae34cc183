fn main() {
    std::process::exit(nodal_core::cli::run_from(std::env::args_os()));
}
