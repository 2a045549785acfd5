fn main() {
    std::process::exit(ym2d::cli::main());
}
