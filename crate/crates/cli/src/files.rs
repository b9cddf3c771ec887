use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use image::{DynamicImage, ExtendedColorType};
use reb_core::defectmaker::{Image, Mask};
use reb_core::manifest::SampleManifestRow;
use reb_core::tensor_io::read_tensor_file;
use reb_core::{aggregate_hierarchies, PatchFeatureSet};

/// Grayscale PNGs load as one channel, everything else as RGB.
pub fn load_png(path: &Path) -> Result<Image> {
    let img = image::open(path).with_context(|| format!("reading image {}", path.display()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (channels, data) = match img {
        DynamicImage::ImageLuma8(g) => (1, g.into_raw()),
        DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLumaA16(_) => {
            (1, img.to_luma8().into_raw())
        }
        other => (3, other.to_rgb8().into_raw()),
    };
    Ok(Image::new(h, w, channels, data)?)
}

pub fn save_png(path: &Path, img: &Image) -> Result<()> {
    let color = match img.channels() {
        1 => ExtendedColorType::L8,
        3 => ExtendedColorType::Rgb8,
        c => bail!("cannot write a {c}-channel PNG"),
    };
    image::save_buffer(path, img.data(), img.width() as u32, img.height() as u32, color)
        .with_context(|| format!("writing image {}", path.display()))
}

/// Nonzero pixels are set.
pub fn load_mask(path: &Path) -> Result<Mask> {
    let img = image::open(path).with_context(|| format!("reading mask {}", path.display()))?;
    let g = img.to_luma8();
    Ok(Mask::from_bytes(g.height() as usize, g.width() as usize, g.as_raw())?)
}

pub fn save_mask(path: &Path, mask: &Mask) -> Result<()> {
    image::save_buffer(
        path,
        &mask.to_bytes(),
        mask.width() as u32,
        mask.height() as u32,
        ExtendedColorType::L8,
    )
    .with_context(|| format!("writing mask {}", path.display()))
}

/// PNG files of a directory in name order.
pub fn list_pngs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("png"))
        })
        .collect();
    out.sort();
    Ok(out)
}

pub fn hierarchy_path(dir: &Path, stem: &str, level: u32) -> PathBuf {
    dir.join(format!("{stem}.h{level}.rebf"))
}

/// Stems with a hierarchy-2 tensor in `dir`, sorted.
pub fn feature_stems(dir: &Path) -> Result<Vec<String>> {
    let mut stems: Vec<String> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            e.file_name()
                .to_str()
                .and_then(|n| n.strip_suffix(".h2.rebf"))
                .map(str::to_owned)
        })
        .collect();
    stems.sort();
    Ok(stems)
}

/// Manifest stems, or every stem in the directory.
pub fn select_stems(dir: &Path, rows: Option<&[SampleManifestRow]>) -> Result<Vec<String>> {
    let stems = match rows {
        Some(rows) => rows.iter().map(SampleManifestRow::image_id).collect(),
        None => feature_stems(dir)?,
    };
    if stems.is_empty() {
        bail!("no feature tensors found in {}", dir.display());
    }
    Ok(stems)
}

pub fn load_patches(dir: &Path, stem: &str, pool_window: usize) -> Result<PatchFeatureSet> {
    let load = |level| {
        let p = hierarchy_path(dir, stem, level);
        read_tensor_file(&p).with_context(|| format!("loading features for {stem}"))
    };
    let (h2, h3) = (load(2)?, load(3)?);
    aggregate_hierarchies(&h2, &h3, pool_window).with_context(|| format!("aggregating features for {stem}"))
}

pub const SCORE_HEADER: &str = "image_id\timage_score";

pub fn write_scores(path: &Path, rows: &[(String, f64)]) -> Result<()> {
    let mut text = String::from(SCORE_HEADER);
    text.push('\n');
    for (id, s) in rows {
        text.push_str(&format!("{id}\t{s}\n"));
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_scores(path: &Path) -> Result<Vec<(String, f64)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(i, l)| !(l.is_empty() || *i == 0 && *l == SCORE_HEADER))
        .map(|(i, l)| {
            let (id, s) = l
                .split_once('\t')
                .ok_or_else(|| anyhow!("{} line {}: expected id<TAB>score", path.display(), i + 1))?;
            let v: f64 = s
                .trim()
                .parse()
                .with_context(|| format!("{} line {}: bad score {s:?}", path.display(), i + 1))?;
            Ok((id.to_string(), v))
        })
        .collect()
}
