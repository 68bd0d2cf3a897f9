fn main() {
    std::process::exit(kiloswarm::run(std::env::args_os()));
}
