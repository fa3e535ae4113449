use clap::Parser;
use sl_frechet::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        let payload = serde_json::json!({
            "error": err.kind(),
            "message": err.to_string(),
        });
        eprintln!("{payload}");
        std::process::exit(err.exit_code());
    }
}
