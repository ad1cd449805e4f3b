use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use eqdose_core::{Engine, TissueLibrary};
use eqdose_service::{cors_layer, router, DEFAULT_BIND};

/// Serve the eqdose engine over HTTP.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Address to listen on.
    #[arg(long, env = "EQDOSE_BIND", default_value = DEFAULT_BIND)]
    bind: String,
    /// Tissue library file; the built-in seed library when omitted.
    #[arg(long, env = "EQDOSE_TISSUES")]
    tissues: Option<PathBuf>,
    /// Browser origin allowed by CORS (repeatable). Any origin when omitted.
    #[arg(long = "cors-origin")]
    cors_origins: Vec<String>,
}

#[tokio::main]
async fn main() -> ExitCode {
    let args = Args::parse();
    let library = match &args.tissues {
        Some(p) => match TissueLibrary::from_path(p) {
            Ok(lib) => lib,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => TissueLibrary::seed(),
    };
    let cors = match cors_layer(&args.cors_origins) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let checksum = library.checksum().to_string();
    let app = router(Arc::new(Engine::new(library)), cors);

    let listener = match tokio::net::TcpListener::bind(&args.bind).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot bind {}: {e}", args.bind);
            return ExitCode::FAILURE;
        }
    };
    eprintln!(
        "eqdose-serve listening on {} (library {checksum})",
        args.bind
    );
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    if let Err(e) = axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await
    {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
