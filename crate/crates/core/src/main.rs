fn main() {
    std::process::exit(hcps_synth::cli::run(std::env::args_os()));
}
