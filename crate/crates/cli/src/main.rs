fn main() {
    std::process::exit(haplitz_cli::run(std::env::args_os()));
}
