fn main() {
    std::process::exit(banach_lab_cli::main_entry());
}
