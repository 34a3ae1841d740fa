fn main() {
    std::process::exit(fuzzy_histspec::cli::run(std::env::args_os()));
}
