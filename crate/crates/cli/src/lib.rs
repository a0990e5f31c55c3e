//! Command-line sweeps over the giant-atom model, writing figure-data tables.

pub mod config;
pub mod error;
pub mod format;
pub mod run;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};

pub use config::Subject;
pub use error::{CliError, Result};
pub use format::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RwaFlag {
    On,
    Off,
}

#[derive(Debug, Parser)]
#[command(
    name = "giant-atom",
    version,
    about = "Parameter sweeps for a giant atom in a coupled-cavity waveguide"
)]
pub struct Cli {
    /// What to compute.
    #[arg(value_enum)]
    pub subject: Subject,

    /// TOML (or .json) file with [params], [axes.*] and [numerics].
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Override a config entry, e.g. `g=0.2` or `axes.tau.count=50`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Output table; stdout when absent. A `<out>.meta.json` sidecar is written alongside.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,

    /// Shorthand for `--set rwa=on|off`.
    #[arg(long, value_enum)]
    pub rwa: Option<RwaFlag>,

    /// Record failed sweep points as rows with an error column instead of aborting.
    #[arg(long)]
    pub continue_on_error: bool,
}

/// Path of the metadata sidecar for an output file.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn execute(cli: &Cli) -> Result<()> {
    let started = Instant::now();
    let mut tree = config::load_tree(cli.config.as_deref())?;
    for assignment in &cli.overrides {
        config::apply_override(&mut tree, assignment)?;
    }
    if let Some(flag) = cli.rwa {
        let v = if flag == RwaFlag::On { "on" } else { "off" };
        config::apply_override(&mut tree, &format!("params.rwa=\"{v}\""))?;
    }
    let spec = config::resolve(cli.subject, &tree)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let ctx = run::RunContext {
        continue_on_error: cli.continue_on_error,
    };
    let output = pool.install(|| run::run(&spec, &ctx))?;
    let elapsed = started.elapsed().as_secs_f64();

    match &cli.out {
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            output.table.write(cli.format, &mut lock)?;
            lock.flush()?;
        }
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            output.table.write(cli.format, &mut w)?;
            w.flush()?;
            let mut meta = json!({
                "tool": env!("CARGO_PKG_NAME"),
                "version": env!("CARGO_PKG_VERSION"),
                "core_version": giant_atom_version(),
            });
            if let (Value::Object(m), Value::Object(d)) = (&mut meta, spec.describe()) {
                m.extend(d);
                m.insert("rows".into(), json!(output.table.rows.len()));
                m.insert("jobs".into(), json!(pool.current_num_threads()));
                m.insert("timings".into(), json!({ "total_seconds": elapsed }));
                m.insert("results".into(), Value::Object(output.results));
            }
            let text = serde_json::to_string_pretty(&meta).expect("metadata serialises");
            std::fs::write(sidecar_path(path), text + "\n")?;
        }
    }
    log::info!("{} finished in {elapsed:.3} s", spec.subject.name());
    Ok(())
}

fn giant_atom_version() -> &'static str {
    giant_atom::VERSION
}
