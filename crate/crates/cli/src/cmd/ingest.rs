use std::path::PathBuf;

use tagphys::dataset::{save, DataFormat};

use crate::error::CliError;
use crate::Ctx;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    input: PathBuf,
    /// csv or json; inferred from the extension when omitted.
    #[arg(long)]
    format: Option<DataFormat>,
    /// Canonical JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(ctx: &Ctx, args: Args) -> Result<(), CliError> {
    let ds = ctx.load_dataset(&args.input, args.format)?;
    if let Some(out) = &args.out {
        if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("creating {}: {e}", parent.display())))?;
        }
        save(&ds, out, DataFormat::Json)?;
    }
    ctx.say(format!("{}: {} records", args.input.display(), ds.len()));
    Ok(())
}
