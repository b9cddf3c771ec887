use rand::Rng;

use super::config::FuseMode;
use super::pixels::{Image, Mask};
use super::shapes::{ShapeMask, RETRY_BUDGET};
use crate::error::{Error, Result};

/// Where the shape's bounding-box corner lands in the target frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Offset {
    pub y: usize,
    pub x: usize,
}

/// Draws an offset uniformly among those that put every shape pixel inside
/// the frame and, when given, inside `saliency`.
///
/// With a saliency mask, a proposal aligns a random shape pixel with a random
/// salient pixel. Every feasible offset is proposed with the same
/// probability, so accepting feasible proposals samples them uniformly. If
/// proposals keep failing, all offsets are enumerated.
pub fn place_defect<R: Rng + ?Sized>(
    shape: &ShapeMask,
    frame: (usize, usize),
    saliency: Option<&Mask>,
    rng: &mut R,
) -> Result<Offset> {
    let b = shape.bbox();
    if b.h > frame.0 || b.w > frame.1 {
        return Err(Error::Placement(format!(
            "{}x{} shape does not fit a {}x{} frame",
            b.h, b.w, frame.0, frame.1
        )));
    }
    let Some(sal) = saliency else {
        return Ok(Offset {
            y: rng.random_range(0..=frame.0 - b.h),
            x: rng.random_range(0..=frame.1 - b.w),
        });
    };
    if (sal.height(), sal.width()) != frame {
        return Err(Error::Dimension(format!(
            "saliency {}x{} does not match the {}x{} frame",
            sal.height(),
            sal.width(),
            frame.0,
            frame.1
        )));
    }
    let salient: Vec<(usize, usize)> = sal.set_cells().collect();
    if salient.is_empty() {
        return Err(Error::Placement("saliency mask is empty".into()));
    }
    let cells: Vec<(usize, usize)> = shape.cells().collect();
    let fits = |oy: usize, ox: usize| {
        oy + b.h <= frame.0
            && ox + b.w <= frame.1
            && cells.iter().all(|&(y, x)| sal.get(oy + y, ox + x))
    };
    for _ in 0..RETRY_BUDGET {
        let p = salient[rng.random_range(0..salient.len())];
        let q = cells[rng.random_range(0..cells.len())];
        if p.0 < q.0 || p.1 < q.1 {
            continue;
        }
        let (oy, ox) = (p.0 - q.0, p.1 - q.1);
        if fits(oy, ox) {
            return Ok(Offset { y: oy, x: ox });
        }
    }
    let feasible: Vec<Offset> = (0..=frame.0 - b.h)
        .flat_map(|y| (0..=frame.1 - b.w).map(move |x| Offset { y, x }))
        .filter(|o| fits(o.y, o.x))
        .collect();
    if feasible.is_empty() {
        return Err(Error::Placement(format!(
            "no offset puts the {}x{} shape inside the saliency region",
            b.h, b.w
        )));
    }
    Ok(feasible[rng.random_range(0..feasible.len())])
}

/// The shape's pixels placed at `offset` on an empty frame.
pub fn placed_mask(shape: &ShapeMask, frame: (usize, usize), offset: Offset) -> Result<Mask> {
    check_offset(shape, frame, offset)?;
    let mut m = Mask::empty(frame.0, frame.1);
    for (y, x) in shape.cells() {
        m.set(offset.y + y, offset.x + x, true);
    }
    Ok(m)
}

fn check_offset(shape: &ShapeMask, frame: (usize, usize), o: Offset) -> Result<()> {
    let b = shape.bbox();
    if o.y + b.h > frame.0 || o.x + b.w > frame.1 {
        return Err(Error::Placement(format!(
            "offset ({}, {}) puts the {}x{} shape outside the {}x{} frame",
            o.y, o.x, b.h, b.w, frame.0, frame.1
        )));
    }
    Ok(())
}

/// Writes `fill` into `image` on the placed shape pixels. `Paste` copies the
/// fill; `Blend` writes `round(beta * fill + (1 - beta) * background)` with
/// halves rounded away from zero. Other pixels are untouched.
pub fn fuse_defect(
    image: &Image,
    fill: &Image,
    shape: &ShapeMask,
    offset: Offset,
    mode: FuseMode,
    beta: f64,
) -> Result<Image> {
    let b = shape.bbox();
    if (fill.height(), fill.width()) != (b.h, b.w) {
        return Err(Error::Dimension(format!(
            "fill {}x{} does not match the {}x{} shape box",
            fill.height(),
            fill.width(),
            b.h,
            b.w
        )));
    }
    if fill.channels() != image.channels() {
        return Err(Error::Dimension(format!(
            "fill has {} channels, image has {}",
            fill.channels(),
            image.channels()
        )));
    }
    if mode == FuseMode::Blend && !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Parameter(format!("blend weight {beta} must lie in (0, 1]")));
    }
    check_offset(shape, (image.height(), image.width()), offset)?;
    let mut out = image.clone();
    for (y, x) in shape.cells() {
        let src = fill.pixel(y, x);
        let dst = out.pixel_mut(offset.y + y, offset.x + x);
        match mode {
            FuseMode::Paste => dst.copy_from_slice(src),
            FuseMode::Blend => {
                for (d, &s) in dst.iter_mut().zip(src) {
                    let v = beta * s as f64 + (1.0 - beta) * *d as f64;
                    *d = v.round().clamp(0.0, 255.0) as u8;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn shape_from(rows: &[&str]) -> ShapeMask {
        let h = rows.len();
        let w = rows[0].len();
        let bytes: Vec<u8> = rows.iter().flat_map(|r| r.bytes().map(|c| (c == b'#') as u8)).collect();
        ShapeMask::new(Mask::from_bytes(h, w, &bytes).unwrap()).unwrap()
    }

    #[test]
    fn full_frame_saliency_accepts_any_in_bounds_offset() {
        let shape = shape_from(&["##", "#."]);
        let sal = Mask::filled(6, 7, true);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..3000 {
            let o = place_defect(&shape, (6, 7), Some(&sal), &mut rng).unwrap();
            assert!(o.y <= 4 && o.x <= 5);
            seen.insert((o.y, o.x));
        }
        assert_eq!(seen.len(), 5 * 6);
    }

    #[test]
    fn placements_are_uniform_over_feasible_offsets() {
        // an L-shaped saliency region where offsets have different overlap counts
        let shape = shape_from(&["##"]);
        let sal = Mask::from_bytes(3, 3, &[1, 1, 1, 1, 0, 0, 1, 0, 0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut hist = std::collections::BTreeMap::new();
        let n = 20_000;
        for _ in 0..n {
            let o = place_defect(&shape, (3, 3), Some(&sal), &mut rng).unwrap();
            *hist.entry((o.y, o.x)).or_insert(0usize) += 1;
        }
        assert_eq!(hist.keys().copied().collect::<Vec<_>>(), vec![(0, 0), (0, 1)]);
        for &c in hist.values() {
            assert!((c as f64 / n as f64 - 0.5).abs() < 0.02);
        }
    }

    #[test]
    fn single_pixel_saliency_forces_the_offset() {
        let shape = shape_from(&["#"]);
        let mut sal = Mask::empty(5, 5);
        sal.set(3, 1, true);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            assert_eq!(place_defect(&shape, (5, 5), Some(&sal), &mut rng).unwrap(), Offset { y: 3, x: 1 });
        }
    }

    #[test]
    fn half_frame_saliency_contains_every_placement() {
        let shape = shape_from(&[".##.", "####", ".#.."]);
        let mut sal = Mask::empty(16, 16);
        for y in 0..16 {
            for x in 0..8 {
                sal.set(y, x, true);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let o = place_defect(&shape, (16, 16), Some(&sal), &mut rng).unwrap();
            let m = placed_mask(&shape, (16, 16), o).unwrap();
            assert_eq!(m.set_cells().filter(|&(y, x)| !sal.get(y, x)).count(), 0);
            assert_eq!(m.count(), shape.count());
        }
    }

    #[test]
    fn infeasible_and_mismatched_saliency() {
        let shape = shape_from(&["###"]);
        let mut sal = Mask::empty(4, 4);
        sal.set(0, 0, true);
        sal.set(0, 1, true);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(place_defect(&shape, (4, 4), Some(&sal), &mut rng), Err(Error::Placement(_))));
        assert!(matches!(
            place_defect(&shape, (4, 5), Some(&sal), &mut rng),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(place_defect(&shape, (4, 2), None, &mut rng), Err(Error::Placement(_))));
    }

    #[test]
    fn blend_arithmetic_and_rounding() {
        let img = Image::filled(3, 3, 1, 100).unwrap();
        let fill = Image::filled(1, 1, 1, 200).unwrap();
        let shape = shape_from(&["#"]);
        let o = Offset { y: 1, x: 1 };
        let out = fuse_defect(&img, &fill, &shape, o, FuseMode::Blend, 0.5).unwrap();
        assert_eq!(out.pixel(1, 1), &[150]);
        // 0.5 * 3 + 0.5 * 0 = 1.5 rounds up
        let odd = Image::filled(1, 1, 1, 3).unwrap();
        let out = fuse_defect(&Image::filled(1, 1, 1, 0).unwrap(), &odd, &shape, Offset { y: 0, x: 0 }, FuseMode::Blend, 0.5).unwrap();
        assert_eq!(out.data(), &[2]);
    }

    #[test]
    fn blend_at_one_equals_paste_and_outside_is_untouched() {
        let img = Image::new(4, 5, 2, (0..40).collect()).unwrap();
        let shape = shape_from(&["#.#", ".##"]);
        let fill = Image::new(2, 3, 2, (200..212).collect()).unwrap();
        let o = Offset { y: 2, x: 1 };
        let paste = fuse_defect(&img, &fill, &shape, o, FuseMode::Paste, 0.3).unwrap();
        let blend = fuse_defect(&img, &fill, &shape, o, FuseMode::Blend, 1.0).unwrap();
        assert_eq!(paste, blend);
        let placed = placed_mask(&shape, (4, 5), o).unwrap();
        for y in 0..4 {
            for x in 0..5 {
                if placed.get(y, x) {
                    assert_eq!(paste.pixel(y, x), fill.pixel(y - 2, x - 1));
                } else {
                    assert_eq!(paste.pixel(y, x), img.pixel(y, x));
                }
            }
        }
    }

    #[test]
    fn fuse_errors() {
        let img = Image::filled(3, 3, 1, 0).unwrap();
        let shape = shape_from(&["##"]);
        let fill = Image::filled(1, 2, 1, 9).unwrap();
        let bad = Offset { y: 0, x: 2 };
        assert!(matches!(fuse_defect(&img, &fill, &shape, bad, FuseMode::Paste, 1.0), Err(Error::Placement(_))));
        let ok = Offset { y: 0, x: 0 };
        assert!(fuse_defect(&img, &fill, &shape, ok, FuseMode::Blend, 0.0).is_err());
        assert!(fuse_defect(&img, &fill, &shape, ok, FuseMode::Blend, 1.5).is_err());
        let rgb = Image::filled(1, 2, 3, 9).unwrap();
        assert!(fuse_defect(&img, &rgb, &shape, ok, FuseMode::Paste, 1.0).is_err());
    }
}
