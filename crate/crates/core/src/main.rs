fn main() {
    std::process::exit(qdcavity::cli::main());
}
