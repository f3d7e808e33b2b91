fn main() {
    std::process::exit(milsent::cli::main());
}
