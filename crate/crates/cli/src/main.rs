fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(primcount_cli::run(&argv));
}
