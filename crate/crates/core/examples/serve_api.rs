//! Serves the HTTP API over a synthetic matrix.
//!
//! Run with: `cargo run -p mtmc --example serve_api -- 8080`, then e.g.
//!
//! ```text
//! curl localhost:8080/api/health
//! curl -X POST localhost:8080/api/select -d '{"phi":[1,0,0,0.5]}'
//! ```

use std::sync::Arc;

use mtmc::service::{router, serve, AppState};
use mtmc::{build_matrix, generate, SynthConfig};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let port: u16 = std::env::args()
        .nth(1)
        .map(|p| p.parse())
        .transpose()?
        .unwrap_or(8080);
    let (specs, records) = generate(&SynthConfig::default())?;
    let state = Arc::new(AppState::new(build_matrix(&records, &specs)?)?);

    let example = state.select(&[0.0, 0.0, 0.0, 0.0])?;
    println!("all-zero weights currently select {}", example.selected_id);

    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    println!("listening on http://{}", listener.local_addr()?);
    serve(listener, router(state, None)).await?;
    Ok(())
}
