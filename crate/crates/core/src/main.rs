fn main() {
    std::process::exit(ptslab::cli::main());
}
