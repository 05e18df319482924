fn main() {
    std::process::exit(polariton_lab::main_with_args(std::env::args_os()));
}
