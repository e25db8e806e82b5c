fn main() {
    std::process::exit(patrolmap::io::run_cli(std::env::args_os()));
}
