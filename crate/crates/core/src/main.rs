fn main() {
    std::process::exit(omas::cli::cli_main(std::env::args_os()));
}
