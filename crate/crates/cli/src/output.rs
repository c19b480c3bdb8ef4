//! CSV and report files in the output directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context as _;

/// Number formatting shared by every CSV: shortest round-trip digits, so the
/// bytes depend only on the value.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// CSV text: provenance comment, header row, data rows.
pub fn render_csv(hash: &str, seed: u64, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = String::new();
    writeln!(s, "# config_sha256={hash} seed={seed}").unwrap();
    writeln!(s, "{}", header.join(",")).unwrap();
    for r in rows {
        debug_assert_eq!(r.len(), header.len());
        writeln!(s, "{}", r.join(",")).unwrap();
    }
    s
}

/// Where a command writes. Without a directory nothing touches the disk.
#[derive(Debug, Clone)]
pub struct Output {
    dir: Option<PathBuf>,
    pub hash: String,
    pub seed: u64,
}

impl Output {
    pub fn new(dir: Option<&Path>, hash: String, seed: u64) -> anyhow::Result<Self> {
        if let Some(d) = dir {
            std::fs::create_dir_all(d).with_context(|| format!("cannot create {}", d.display()))?;
        }
        Ok(Self { dir: dir.map(Path::to_path_buf), hash, seed })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn write(&self, name: &str, text: &str) -> anyhow::Result<Option<PathBuf>> {
        let Some(d) = &self.dir else { return Ok(None) };
        let p = d.join(name);
        std::fs::write(&p, text).with_context(|| format!("cannot write {}", p.display()))?;
        Ok(Some(p))
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<String> {
        let text = render_csv(&self.hash, self.seed, header, rows);
        self.write(name, &text)?;
        Ok(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let t = render_csv("ab", 7, &["a", "b"], &[vec![num(1.0), num(0.5)], vec![num(1e-7), num(-2.25e20)]]);
        assert_eq!(t, "# config_sha256=ab seed=7\na,b\n1,0.5\n1e-7,-2.25e20\n");
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.02e23, -1e-300, 123456.789, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
