//! Plot-ready artifact files: columnar text with `#`-prefixed header
//! lines, plus a run manifest listing every produced file with its
//! SHA-256 checksum. All numeric formatting is fixed-width scientific,
//! so identical data renders to identical bytes.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::Result;

/// Name of the manifest file written next to the data files.
pub const MANIFEST_NAME: &str = "manifest.txt";

/// One rendered output file, held in memory until the whole run has
/// succeeded so failed runs leave no partial outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    /// Flat file name inside the output directory.
    pub name: String,
    pub content: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, content: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            content: content.into(),
        }
    }
}

/// Deterministic float rendering used in every data column.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Render a columnar table: `#` description lines, a `# columns:` line,
/// then one space-separated row per record.
pub fn columnar(description: &[String], columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    for line in description {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("# columns: ");
    out.push_str(&columns.join(" "));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Render a matrix block: `#` description lines (condition number and
/// residual belong there), then one row of the matrix per line.
pub fn matrix_block(description: &[String], matrix: &ndarray::Array2<f64>) -> String {
    let mut out = String::new();
    for line in description {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(&format!("# rows: {} cols: {}\n", matrix.nrows(), matrix.ncols()));
    for i in 0..matrix.nrows() {
        let row: Vec<String> = (0..matrix.ncols()).map(|j| fmt_f64(matrix[[i, j]])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

/// Render the manifest: one row per artifact (checksum, size, name).
/// The timestamp comment is the only line allowed to differ between
/// reruns of the same config.
pub fn manifest(artifacts: &[Artifact], unix_time_s: u64) -> String {
    let mut out = String::new();
    out.push_str("# run manifest\n");
    out.push_str(&format!("# generated_unix_time {unix_time_s}\n"));
    out.push_str("# columns: sha256 bytes name\n");
    for artifact in artifacts {
        out.push_str(&format!(
            "{} {} {}\n",
            sha256_hex(artifact.content.as_bytes()),
            artifact.content.len(),
            artifact.name
        ));
    }
    out
}

/// Write all artifacts plus their manifest into `dir` (created if
/// needed). Returns the paths written, manifest last.
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    let unix_time_s = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(artifacts.len() + 1);
    for artifact in artifacts {
        let path = dir.join(&artifact.name);
        std::fs::write(&path, &artifact.content)?;
        paths.push(path);
    }
    let manifest_path = dir.join(MANIFEST_NAME);
    std::fs::write(&manifest_path, manifest(artifacts, unix_time_s))?;
    paths.push(manifest_path);
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn columnar_layout_is_stable() {
        let text = columnar(
            &["demo".to_string()],
            &["x", "y"],
            &[
                vec![fmt_f64(1.0), fmt_f64(0.5)],
                vec![fmt_f64(2.0), fmt_f64(0.25)],
            ],
        );
        assert_eq!(
            text,
            "# demo\n# columns: x y\n\
             1.0000000000000000e0 5.0000000000000000e-1\n\
             2.0000000000000000e0 2.5000000000000000e-1\n"
        );
    }

    #[test]
    fn matrix_block_has_dimensions_line() {
        let m = array![[1.0, 0.0], [0.0, 1.0]];
        let text = matrix_block(&["identity".to_string()], &m);
        assert!(text.starts_with("# identity\n# rows: 2 cols: 2\n"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn sha256_matches_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_lists_every_artifact_with_hash() {
        let artifacts = vec![
            Artifact::new("a.txt", "hello\n"),
            Artifact::new("b.txt", "world\n"),
        ];
        let text = manifest(&artifacts, 12345);
        assert!(text.contains("# generated_unix_time 12345"));
        for artifact in &artifacts {
            let hash = sha256_hex(artifact.content.as_bytes());
            assert!(text.contains(&format!(
                "{hash} {} {}",
                artifact.content.len(),
                artifact.name
            )));
        }
    }

    #[test]
    fn write_all_produces_files_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let artifacts = vec![Artifact::new("data.txt", "# columns: x\n1.0\n")];
        let paths = write_all(dir.path(), &artifacts).unwrap();
        assert_eq!(paths.len(), 2);
        assert!(paths[0].ends_with("data.txt"));
        assert!(paths[1].ends_with(MANIFEST_NAME));
        let stored = std::fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(stored, artifacts[0].content);
        let manifest_text = std::fs::read_to_string(&paths[1]).unwrap();
        assert!(manifest_text.contains("data.txt"));
    }
}
