fn main() {
    let code = stgan_cli::cli::cmd_dispatch(std::env::args_os());
    std::process::exit(code);
}
