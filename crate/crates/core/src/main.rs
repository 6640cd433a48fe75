fn main() {
    std::process::exit(riccati_disguise::cli::run(std::env::args_os()));
}
