fn main() {
    let code = levy_invert_cli::run(std::env::args_os());
    std::process::exit(code);
}
