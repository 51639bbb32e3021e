use clap::Parser;
use medkit_server::ServeArgs;

/// Slice-rendering service for the medkit viewer.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(flatten)]
    serve: ServeArgs,
}

fn main() -> anyhow::Result<()> {
    medkit_server::run(&Cli::parse().serve)
}
