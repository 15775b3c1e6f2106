fn main() {
    std::process::exit(trigdisc::cli::run(std::env::args_os()));
}
