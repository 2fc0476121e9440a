use clap::Parser;

fn main() {
    let cli = ck_dilation::cli::Cli::parse();
    std::process::exit(ck_dilation::cli::run(&cli));
}
