fn main() {
    std::process::exit(l1rkbs::cli::dispatch(std::env::args_os()));
}
