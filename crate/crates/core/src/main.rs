fn main() {
    std::process::exit(chaos_bounds::cli::run(std::env::args_os()));
}
