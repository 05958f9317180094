//! `mock-service`: run the bundled text-to-3D stand-in server.

use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use quadforge::error::Result;

use crate::mock_service::{serve, MockFixtures};

#[derive(Args)]
pub struct MockArgs {
    /// Bind address; port 0 picks an ephemeral port (printed on stdout).
    #[arg(long, default_value = "127.0.0.1:0")]
    pub addr: String,
    /// Serve the .stl files of this directory instead of the built-in
    /// procedural candidates.
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
}

pub fn run(args: MockArgs) -> Result<ExitCode> {
    let listener = TcpListener::bind(&args.addr)?;
    let addr = listener.local_addr()?;
    println!("http://{addr}");
    let fixtures = match args.fixtures {
        Some(dir) => MockFixtures::Dir(dir),
        None => MockFixtures::Builtin,
    };
    serve(listener, fixtures)?;
    super::ok()
}
