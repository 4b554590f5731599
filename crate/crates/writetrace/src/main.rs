fn main() { std::process::exit(writetrace::cli::run()); }
