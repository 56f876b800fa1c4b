use std::process::ExitCode;

use clap::Parser;
use dcohom::{emit, run, Command, Options};

/// Exact Hochschild and de Rham cohomology of rings of differential operators.
#[derive(Parser, Debug)]
#[command(name = "dcohom", version)]
struct Args {
    command: Command,
    /// e.g. `affine(2)`, `torus(1)`, `localized(f = x1^2 + 1)`, `product(torus(1), affine(1))`
    space: String,
    /// PBW window; escalated by 2 once if a computation does not stabilize.
    #[arg(long)]
    window: Option<u32>,
    /// Closed 2-form for `deform`, e.g. `dx1^dx2`.
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    /// Closed 1-form for `outer`, e.g. `x1^-1 dx1`.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let options = Options {
        window: args.window,
        omega: args.omega,
        lambda: args.lambda,
    };
    match run(args.command, &args.space, &options) {
        Ok(doc) => {
            print!("{}", emit(&doc, args.json));
            ExitCode::from(doc.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
