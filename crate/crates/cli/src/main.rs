fn main() {
    std::process::exit(ncadmm_cli::run_cli(std::env::args_os()));
}
