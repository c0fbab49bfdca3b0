fn main() {
    let stdout = std::io::stdout();
    let code = witt_rb::report::run_args(std::env::args_os(), &mut stdout.lock());
    std::process::exit(code);
}
