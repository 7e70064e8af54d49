fn main() {
    std::process::exit(coherence_ledger::cli::run(std::env::args_os()));
}
