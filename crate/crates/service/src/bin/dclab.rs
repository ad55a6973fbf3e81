fn main() {
    std::process::exit(dclab_service::cli::main());
}
