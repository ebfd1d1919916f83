//! Versioned CSV outputs. Every file starts with a header whose first column
//! is `schema`, and every row carries the schema id in that column.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use cupgame::{GameTrace, Rational};

pub const BACKLOG_SCHEMA: &str = "cupgame-backlog/1";
pub const SWEEP_SCHEMA: &str = "cupgame-sweep/1";
pub const CURVE_SCHEMA: &str = "cupgame-curve/1";

/// `"num/den"` and a float rendering.
pub fn rational_cells(r: &Rational) -> [String; 2] {
    [r.to_ratio_string(), format!("{}", r.to_f64())]
}

pub fn backlog_csv(trace: &GameTrace) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["schema", "round", "backlog", "backlog_float"])?;
    for (i, b) in trace.backlogs.iter().enumerate() {
        let [r, f] = rational_cells(b);
        w.write_record([BACKLOG_SCHEMA.to_string(), (i + 1).to_string(), r, f])?;
    }
    Ok(w.into_inner()?)
}

/// Writes through a temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("out")
    ));
    let mut f = std::fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    f.write_all(bytes)?;
    f.sync_all()?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}
