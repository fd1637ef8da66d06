fn main() {
    std::process::exit(gpquad::cli::parse_and_dispatch(std::env::args()));
}
