use clap::Parser;

fn main() {
    let cli = skewinfo::cli::Cli::parse();
    std::process::exit(skewinfo::cli::main_with(cli));
}
