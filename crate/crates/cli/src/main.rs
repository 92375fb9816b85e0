fn main() {
    groth_cli::run()
}
