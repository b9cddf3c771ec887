//! 2-D plane resampling helpers shared by feature aggregation and score maps.
//!
//! All routines treat the plane border by clamping (edge replication), which
//! keeps constant planes constant.

/// Box mean over a `window x window` neighborhood, stride 1, edge-replicating.
pub fn mean_pool(src: &[f64], h: usize, w: usize, window: usize) -> Vec<f64> {
    debug_assert_eq!(src.len(), h * w);
    debug_assert!(window % 2 == 1);
    if window == 1 {
        return src.to_vec();
    }
    let r = (window / 2) as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    // separable: rows then columns
    let mut tmp = vec![0.0; h * w];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0.0;
            for dx in -r..=r {
                s += src[y * w + clamp(x as isize + dx, w)];
            }
            tmp[y * w + x] = s / window as f64;
        }
    }
    let mut out = vec![0.0; h * w];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0.0;
            for dy in -r..=r {
                s += tmp[clamp(y as isize + dy, h) * w + x];
            }
            out[y * w + x] = s / window as f64;
        }
    }
    out
}

/// Source coordinate and blend weight for half-pixel-center sampling.
#[inline]
fn source_taps(dst: usize, in_len: usize, out_len: usize) -> (usize, usize, f64) {
    let scale = in_len as f64 / out_len as f64;
    let s = ((dst as f64 + 0.5) * scale - 0.5).max(0.0);
    let i0 = (s.floor() as usize).min(in_len - 1);
    let i1 = (i0 + 1).min(in_len - 1);
    (i0, i1, s - i0 as f64)
}

/// Bilinear resize with half-pixel centers (corner alignment off).
pub fn resize_bilinear(
    src: &[f64],
    in_h: usize,
    in_w: usize,
    out_h: usize,
    out_w: usize,
) -> Vec<f64> {
    debug_assert_eq!(src.len(), in_h * in_w);
    let cols: Vec<_> = (0..out_w).map(|x| source_taps(x, in_w, out_w)).collect();
    let mut out = Vec::with_capacity(out_h * out_w);
    for y in 0..out_h {
        let (y0, y1, fy) = source_taps(y, in_h, out_h);
        for &(x0, x1, fx) in &cols {
            let top = src[y0 * in_w + x0] * (1.0 - fx) + src[y0 * in_w + x1] * fx;
            let bot = src[y1 * in_w + x0] * (1.0 - fx) + src[y1 * in_w + x1] * fx;
            out.push(top * (1.0 - fy) + bot * fy);
        }
    }
    out
}

/// Normalized Gaussian taps with radius `ceil(3 sigma)`.
fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil().max(1.0) as isize;
    let k: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = k.iter().sum();
    k.into_iter().map(|v| v / total).collect()
}

/// Separable Gaussian blur; `sigma == 0` returns the input unchanged.
pub fn gaussian_blur(src: &[f64], h: usize, w: usize, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return src.to_vec();
    }
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; h * w];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = k
                .iter()
                .enumerate()
                .map(|(j, kv)| kv * src[y * w + clamp(x as isize + j as isize - r, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; h * w];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = k
                .iter()
                .enumerate()
                .map(|(j, kv)| kv * tmp[clamp(y as isize + j as isize - r, h) * w + x])
                .sum();
        }
    }
    out
}
