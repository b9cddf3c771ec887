//! Sample manifests (`.rebm`): UTF-8, one row per line,
//! `image path <TAB> label [<TAB> mask path]`.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleManifestRow {
    pub image: String,
    pub label: u32,
    pub mask: Option<String>,
}

impl SampleManifestRow {
    pub fn new(image: impl Into<String>, label: u32, mask: Option<String>) -> Self {
        Self {
            image: image.into(),
            label,
            mask: mask.filter(|m| !m.is_empty()),
        }
    }

    /// File stem of the image path, used as the image id in score records.
    pub fn image_id(&self) -> String {
        Path::new(&self.image)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.image.clone())
    }
}

fn parse_row(line: &str, lineno: usize) -> Result<SampleManifestRow> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() < 2 {
        return Err(Error::Manifest {
            line: lineno,
            message: format!("expected at least 2 tab-separated fields, found {}", fields.len()),
        });
    }
    if fields.len() > 3 {
        return Err(Error::Manifest {
            line: lineno,
            message: format!("expected at most 3 fields, found {}", fields.len()),
        });
    }
    if fields[0].is_empty() {
        return Err(Error::Manifest {
            line: lineno,
            message: "empty image path".into(),
        });
    }
    let label = fields[1].trim().parse::<u32>().map_err(|_| Error::Manifest {
        line: lineno,
        message: format!("label {:?} is not a non-negative integer", fields[1]),
    })?;
    let mask = fields.get(2).map(|m| m.to_string());
    Ok(SampleManifestRow::new(fields[0], label, mask))
}

pub fn read_manifest<R: BufRead>(source: R) -> Result<Vec<SampleManifestRow>> {
    source
        .lines()
        .enumerate()
        .map(|(i, line)| {
            let line = line.map_err(|e| Error::io("<manifest>", e))?;
            parse_row(&line, i + 1)
        })
        .collect()
}

pub fn write_manifest<W: Write>(rows: &[SampleManifestRow], sink: &mut W) -> Result<()> {
    for row in rows {
        if row.image.contains(['\t', '\n']) {
            return Err(Error::Format(format!(
                "image path {:?} contains a tab or newline",
                row.image
            )));
        }
        writeln!(
            sink,
            "{}\t{}\t{}",
            row.image,
            row.label,
            row.mask.as_deref().unwrap_or("")
        )
        .map_err(|e| Error::io("<manifest>", e))?;
    }
    Ok(())
}

pub fn read_manifest_file(path: impl AsRef<Path>) -> Result<Vec<SampleManifestRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_manifest(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn write_manifest_file(rows: &[SampleManifestRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_manifest(rows, &mut file).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Resolves a manifest path relative to the manifest's directory.
pub fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Checks labels against `class_count` and that every referenced file exists.
pub fn validate(rows: &[SampleManifestRow], base: &Path, class_count: u32) -> Result<()> {
    for (i, row) in rows.iter().enumerate() {
        let line = i + 1;
        if row.label >= class_count {
            return Err(Error::Manifest {
                line,
                message: format!("label {} not below class count {class_count}", row.label),
            });
        }
        for p in std::iter::once(&row.image).chain(row.mask.as_ref()) {
            if !resolve(base, p).exists() {
                return Err(Error::Manifest {
                    line,
                    message: format!("referenced file {p:?} does not exist"),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rows_with_and_without_masks() {
        let text = "a b/img 1.png\t0\t\nc.png\t3\tmasks/c.png\nd.png\t1\n";
        let rows = read_manifest(text.as_bytes()).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].image, "a b/img 1.png");
        assert_eq!(rows[0].mask, None);
        assert_eq!(rows[1].label, 3);
        assert_eq!(rows[1].mask.as_deref(), Some("masks/c.png"));
        assert_eq!(rows[2].mask, None);
        assert_eq!(rows[1].image_id(), "c");
    }

    #[test]
    fn short_row_reports_one_based_line() {
        let text = "a.png\t0\nbroken-row\n";
        match read_manifest(text.as_bytes()).unwrap_err() {
            Error::Manifest { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn bad_label_rejected() {
        assert!(read_manifest("a.png\t-1\n".as_bytes()).is_err());
        assert!(read_manifest("a.png\tx\n".as_bytes()).is_err());
    }

    #[test]
    fn write_then_read() {
        let rows = vec![
            SampleManifestRow::new("x y.png", 2, Some("m.png".into())),
            SampleManifestRow::new("z.png", 0, None),
        ];
        let mut buf = Vec::new();
        write_manifest(&rows, &mut buf).unwrap();
        assert_eq!(read_manifest(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn validate_checks_labels_and_files() {
        let dir = std::env::temp_dir().join(format!("rebm-validate-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("ok.png"), b"").unwrap();
        let good = vec![SampleManifestRow::new("ok.png", 1, None)];
        validate(&good, &dir, 7).unwrap();
        assert!(validate(&good, &dir, 1).is_err());
        let missing = vec![SampleManifestRow::new("missing.png", 0, None)];
        assert!(validate(&missing, &dir, 7).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
