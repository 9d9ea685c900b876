use clap::Parser;
use linkmotion_cli::{execute, Cli, Outcome};

fn main() {
    let cli = Cli::parse();
    let outcome = execute(cli);
    match &outcome {
        Outcome::Success(text) | Outcome::False(text) => print!("{text}"),
        Outcome::Usage(text) | Outcome::InvalidSpec(text) => eprintln!("{text}"),
    }
    std::process::exit(outcome.code());
}
