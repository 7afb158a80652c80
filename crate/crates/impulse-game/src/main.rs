fn main() {
    std::process::exit(impulse_game::cli::run(std::env::args_os()));
}
