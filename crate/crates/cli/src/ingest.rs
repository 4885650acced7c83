use std::path::PathBuf;

use clap::Args;
use pairstream::data::{dataset_stats, read_libsvm};

use crate::config::parse_label_map;
use crate::output::{emit, render, Format};
use crate::{config_err, CliResult};

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "threshold")]
    pub label_map: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_ingest(args: IngestArgs) -> CliResult<()> {
    let map = parse_label_map(&args.label_map)?;
    let ds = read_libsvm(&args.data, map).map_err(|e| config_err(format!("{}: {e}", args.data.display())))?;
    emit(&render(&[dataset_stats(&ds)], args.format)?, args.out.as_deref())
}
