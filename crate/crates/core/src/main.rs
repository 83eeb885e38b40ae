fn main() {
    std::process::exit(willmore::cli::main_exit_code());
}
