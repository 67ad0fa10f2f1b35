use rotomode::cli;

fn main() {
    if let Err(e) = cli::configure_threads() {
        eprintln!("rotomode: {e}");
        std::process::exit(e.exit_code());
    }
    std::process::exit(cli::run_from(std::env::args_os()));
}
