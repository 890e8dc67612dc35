use std::process::ExitCode;

use clap::Parser;
use matsel_service::{serve, ServiceConfig};

#[tokio::main]
async fn main() -> ExitCode {
    let config = ServiceConfig::parse();
    match serve(config).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
