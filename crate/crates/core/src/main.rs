fn main() {
    std::process::exit(mixdecon::cli::dispatch(std::env::args_os()));
}
