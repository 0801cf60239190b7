fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(moment_tails::cli::run(&args));
}
