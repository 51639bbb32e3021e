use clap::Parser;
use medkit_server::{ServeArgs, DEFAULT_PORT};

#[derive(Parser)]
struct Cli {
    #[command(flatten)]
    serve: ServeArgs,
}

// One test so the environment is not shared with anything else.
#[test]
fn port_precedence() {
    std::env::remove_var("MEDKIT_PORT");
    let args = Cli::parse_from(["medkit-server"]).serve;
    assert_eq!(args.port, DEFAULT_PORT);
    assert_eq!(args.data_dir, std::path::PathBuf::from("."));

    std::env::set_var("MEDKIT_PORT", "9123");
    assert_eq!(Cli::parse_from(["medkit-server"]).serve.port, 9123);
    let args = Cli::parse_from(["medkit-server", "--port", "9200", "--data-dir", "/tmp"]).serve;
    assert_eq!(args.port, 9200);
    assert_eq!(args.config().data_dir, std::path::PathBuf::from("/tmp"));
    assert_eq!(args.addr().port(), 9200);

    std::env::set_var("MEDKIT_PORT", "not-a-port");
    assert!(Cli::try_parse_from(["medkit-server"]).is_err());
    std::env::remove_var("MEDKIT_PORT");
}
