fn main() {
    std::process::exit(planbench_harness::cli::main_with_args(std::env::args_os()));
}
