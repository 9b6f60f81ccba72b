//! CSV emission: fixed header per subcommand, 12 significant digits for
//! real-valued fields, deterministic row order (the callers iterate grids in
//! declaration order).

use std::io::Write;
use std::path::{Path, PathBuf};

/// Where rows go: a file or stdout.
pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    pub fn from_flag(out: &Option<PathBuf>) -> Self {
        match out {
            None => Sink::Stdout,
            Some(p) if p.as_os_str() == "-" => Sink::Stdout,
            Some(p) => Sink::File(p.clone()),
        }
    }

    pub fn writer(&self) -> anyhow::Result<Box<dyn Write>> {
        match self {
            Sink::Stdout => Ok(Box::new(std::io::stdout().lock())),
            Sink::File(path) => {
                let f = std::fs::File::create(path).map_err(|e| {
                    anyhow::anyhow!("cannot create output {}: {e}", path.display())
                })?;
                Ok(Box::new(std::io::BufWriter::new(f)))
            }
        }
    }
}

/// 12 significant digits, locale-free.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn write_row(w: &mut dyn Write, fields: &[String]) -> anyhow::Result<()> {
    writeln!(w, "{}", fields.join(","))?;
    Ok(())
}

pub fn write_file_or_fail(path: &Path, content: &str) -> anyhow::Result<()> {
    std::fs::write(path, content)
        .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))
}
