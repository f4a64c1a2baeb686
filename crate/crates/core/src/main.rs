fn main() {
    std::process::exit(zzlab::cli::main_with_args(std::env::args_os()));
}
