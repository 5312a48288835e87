use std::process::exit;

fn main() {
    exit(dipbec::cli::run(std::env::args_os()));
}
