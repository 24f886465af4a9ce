fn main() {
    std::process::exit(oqlab_cli::cli_main(std::env::args_os()));
}
