fn main() {
    std::process::exit(kandinsky::cli::run(std::env::args_os()));
}
