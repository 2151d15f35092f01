fn main() {
    std::process::exit(pam_core::harness::cli::main_from(std::env::args_os()));
}
