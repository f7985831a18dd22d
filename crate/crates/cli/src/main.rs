use clap::Parser;

fn main() {
    let cli = match moped_cli::Cli::try_parse() {
        Ok(cli) => cli,
        // clap exits 0 for --help/--version and 2 for usage errors
        Err(err) => err.exit(),
    };
    if let Err(err) = moped_cli::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
