fn main() {
    std::process::exit(blwbench::run(std::env::args_os()));
}
