fn main() {
    std::process::exit(smalltime_ldp_cli::run(std::env::args_os()));
}
