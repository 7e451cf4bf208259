fn main() {
    std::process::exit(stackelberg_workbench::cli::run(std::env::args_os()));
}
