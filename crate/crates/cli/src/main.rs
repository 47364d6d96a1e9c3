fn main() {
    std::process::exit(dipolar_spin_sim::run_cli(std::env::args_os()));
}
