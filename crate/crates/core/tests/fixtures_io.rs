//! Tensors written by an independent Python writer (`fixtures/write_rebf.py`).

use std::path::PathBuf;

use reb_core::manifest::{read_manifest, write_manifest, SampleManifestRow};
use reb_core::tensor_io::{read_raw_file, read_tensor_file, write_tensor_file};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn python_tensor_reads_bitwise() {
    let t = read_tensor_file(fixture("py_3x2x2.h2.rebf")).unwrap();
    assert_eq!((t.channels(), t.height(), t.width()), (3, 2, 2));
    for c in 0..3 {
        for h in 0..2 {
            for w in 0..2 {
                let want = (100 * c + 10 * h + w) as f32 + 0.25;
                assert_eq!(t.get(c, h, w).to_bits(), want.to_bits());
            }
        }
    }
    let bytes = std::fs::read(fixture("py_3x2x2.h2.rebf")).unwrap();
    assert_eq!(bytes.len(), 22 + 4 * 12);
}

#[test]
fn python_tensor_survives_rust_rewrite() {
    let t = read_tensor_file(fixture("py_2x1x1.h3.rebf")).unwrap();
    assert_eq!(t.data()[0], -1.5);
    assert_eq!(t.data()[1].to_bits(), 3.0e-8f32.to_bits());
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("copy.h3.rebf");
    write_tensor_file(&t, &out).unwrap();
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(fixture("py_2x1x1.h3.rebf")).unwrap());
    assert_eq!(read_raw_file(&out).unwrap().dims(), &[2, 1, 1]);
}

#[test]
fn python_manifest_pairs_with_hierarchy_files() {
    let file = std::fs::File::open(fixture("py.rebm")).unwrap();
    let rows = read_manifest(std::io::BufReader::new(file)).unwrap();
    assert_eq!(
        rows,
        vec![
            SampleManifestRow::new("images/py_3x2x2.png", 0, None),
            SampleManifestRow::new("images/scratch_01.png", 3, Some("masks/scratch_01.png".into())),
        ]
    );
    // the image id names the feature files
    let id = rows[0].image_id();
    assert!(fixture(&format!("{id}.h2.rebf")).exists());

    let mut out = Vec::new();
    write_manifest(&rows, &mut out).unwrap();
    assert_eq!(read_manifest(&out[..]).unwrap(), rows);
}
