fn main() {
    let out = std::env::var_os(fermat_tower::cli::OUT_ENV).map(std::path::PathBuf::from);
    std::process::exit(fermat_tower::cli::run(std::env::args_os(), out.as_deref()));
}
