//! Grid function files and atomic writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use latlab_core::sobolev_grid::{GridDomain, GridFunction};

use crate::error::{LabError, LabResult};

/// Only the unit domains round-trip: the header carries no extents.
fn unit_domain(kind: &str, n: usize) -> Option<GridDomain> {
    match kind {
        "interval" => GridDomain::unit_interval(n).ok(),
        "torus" => GridDomain::unit_torus(n).ok(),
        "rectangle" | "square" => GridDomain::unit_square(n).ok(),
        _ => None,
    }
}

/// `# domain=<kind>,n=<n>,h=<h>` followed by one value per line.
pub fn format_grid_function(f: &GridFunction) -> LabResult<String> {
    let d = f.domain();
    if unit_domain(d.kind_name(), d.n()).as_ref() != Some(d) {
        return Err(LabError::usage("domain", "only unit domains can be serialized"));
    }
    let mut out = format!("# domain={},n={},h={}\n", d.kind_name(), d.n(), d.h());
    for v in f.values() {
        out.push_str(&format!("{v}\n"));
    }
    Ok(out)
}

pub fn parse_grid_function(text: &str, path: &Path) -> LabResult<GridFunction> {
    let malformed = |line: u64, message: String| LabError::Malformed { path: path.to_path_buf(), line, message };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| malformed(1, "empty file".into()))?;
    let fields = header.strip_prefix("# ").ok_or_else(|| malformed(1, "missing `# domain=` header".into()))?;
    let (mut kind, mut n, mut h) = (None, None, None);
    for part in fields.split(',') {
        match part.split_once('=') {
            Some(("domain", v)) => kind = Some(v.to_string()),
            Some(("n", v)) => n = v.parse::<usize>().ok(),
            Some(("h", v)) => h = v.parse::<f64>().ok(),
            _ => return Err(malformed(1, format!("unexpected header field `{part}`"))),
        }
    }
    let (Some(kind), Some(n), Some(h)) = (kind, n, h) else {
        return Err(malformed(1, "header needs domain, n and h".into()));
    };
    let domain = unit_domain(&kind, n).ok_or_else(|| malformed(1, format!("unknown domain `{kind}` with n = {n}")))?;
    if (domain.h() - h).abs() > 1e-12 * domain.h() {
        return Err(malformed(1, format!("h = {h} does not match n = {n}")));
    }
    let mut values = Vec::with_capacity(domain.node_count());
    for (i, line) in lines.enumerate() {
        let line_no = i as u64 + 2;
        if line.trim().is_empty() {
            continue;
        }
        let v: f64 = line.trim().parse().map_err(|_| malformed(line_no, format!("`{line}` is not a number")))?;
        values.push(v);
    }
    let count = values.len();
    GridFunction::new(domain, values)
        .map_err(|_| malformed(1, format!("{count} values for {} nodes", domain.node_count())))
}

pub fn read_grid_function(path: &Path) -> LabResult<GridFunction> {
    let text = fs::read_to_string(path).map_err(|source| LabError::Io { path: path.to_path_buf(), source })?;
    parse_grid_function(&text, path)
}

pub fn write_grid_function(path: &Path, f: &GridFunction) -> LabResult<()> {
    write_atomic(path, format_grid_function(f)?.as_bytes())
}

/// Writes to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> LabResult<()> {
    let io_err = |p: &Path| {
        let p: PathBuf = p.to_path_buf();
        move |source| LabError::Io { path: p, source }
    };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let mut file = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    file.write_all(bytes).and_then(|_| file.sync_all()).map_err(io_err(&tmp))?;
    drop(file);
    fs::rename(&tmp, path).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let d = GridDomain::unit_interval(5).unwrap();
        let f = GridFunction::new(d, vec![0.0, 0.1, -2.5, 1e-300, 3.0]).unwrap();
        let text = format_grid_function(&f).unwrap();
        assert!(text.starts_with("# domain=interval,n=5,h=0.25\n"));
        assert_eq!(parse_grid_function(&text, Path::new("f.csv")).unwrap(), f);
    }

    #[test]
    fn malformed_lines_are_named() {
        let err = parse_grid_function("# domain=torus,n=3,h=0.3333333333333333\n1\nx\n2\n", Path::new("g.csv")).unwrap_err();
        assert!(matches!(err, LabError::Malformed { line: 3, .. }), "{err}");
        let err = parse_grid_function("# domain=torus,n=4,h=0.25\n1\n2\n", Path::new("g.csv")).unwrap_err();
        assert!(err.to_string().contains("2 values for 4 nodes"));
        assert!(parse_grid_function("1\n2\n", Path::new("g.csv")).is_err());
    }
}
