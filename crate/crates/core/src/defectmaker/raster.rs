//! Rasterization and binary morphology on [`Mask`] grids. Coverage is
//! decided at pixel centers.

use super::bezier::Point;
use super::pixels::Mask;

/// Even-odd fill of a closed polygon.
pub fn fill_polygon(poly: &[Point], height: usize, width: usize) -> Mask {
    let mut mask = Mask::empty(height, width);
    let n = poly.len();
    if n < 3 {
        return mask;
    }
    let mut xs = Vec::new();
    for row in 0..height {
        let yc = row as f64 + 0.5;
        xs.clear();
        for i in 0..n {
            let [x0, y0] = poly[i];
            let [x1, y1] = poly[(i + 1) % n];
            // half-open in y so shared vertices are counted once
            if (y0 <= yc) != (y1 <= yc) {
                xs.push(x0 + (yc - y0) / (y1 - y0) * (x1 - x0));
            }
        }
        xs.sort_by(f64::total_cmp);
        for span in xs.chunks_exact(2) {
            // centers x + 0.5 in [span[0], span[1])
            let start = (span[0] - 0.5).ceil().max(0.0);
            let end = (span[1] - 0.5).ceil().min(width as f64);
            let mut col = start;
            while col < end {
                mask.set(row, col as usize, true);
                col += 1.0;
            }
        }
    }
    mask
}

/// Sets every pixel whose center lies strictly within `radius[i]` of the
/// polyline, the radius interpolating linearly along each segment.
pub fn stroke_polyline(points: &[Point], radius: &[f64], height: usize, width: usize) -> Mask {
    assert_eq!(points.len(), radius.len(), "one radius per vertex");
    let mut mask = Mask::empty(height, width);
    if points.is_empty() {
        return mask;
    }
    let segs: Vec<(usize, usize)> = if points.len() == 1 {
        vec![(0, 0)]
    } else {
        (0..points.len() - 1).map(|i| (i, i + 1)).collect()
    };
    for (a, b) in segs {
        let (p, q) = (points[a], points[b]);
        let (ra, rb) = (radius[a], radius[b]);
        let r = ra.max(rb);
        let y_lo = ((p[1].min(q[1]) - r - 0.5).floor().max(0.0)) as usize;
        let y_hi = ((p[1].max(q[1]) + r - 0.5).ceil().min(height as f64 - 1.0)).max(-1.0);
        let x_lo = ((p[0].min(q[0]) - r - 0.5).floor().max(0.0)) as usize;
        let x_hi = ((p[0].max(q[0]) + r - 0.5).ceil().min(width as f64 - 1.0)).max(-1.0);
        if y_hi < 0.0 || x_hi < 0.0 {
            continue;
        }
        let d = [q[0] - p[0], q[1] - p[1]];
        let len2 = d[0] * d[0] + d[1] * d[1];
        for row in y_lo..=y_hi as usize {
            for col in x_lo..=x_hi as usize {
                if mask.get(row, col) {
                    continue;
                }
                let c = [col as f64 + 0.5, row as f64 + 0.5];
                let t = if len2 > 0.0 {
                    (((c[0] - p[0]) * d[0] + (c[1] - p[1]) * d[1]) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let e = [p[0] + t * d[0] - c[0], p[1] + t * d[1] - c[1]];
                let rt = ra + t * (rb - ra);
                if e[0] * e[0] + e[1] * e[1] < rt * rt {
                    mask.set(row, col, true);
                }
            }
        }
    }
    mask
}

/// One erosion step with the 3x3 cross; cells outside the grid count as unset.
pub fn erode_cross(mask: &Mask) -> Mask {
    let (h, w) = (mask.height(), mask.width());
    let mut out = Mask::empty(h, w);
    for (y, x) in mask.set_cells() {
        let keep = y > 0
            && x > 0
            && y + 1 < h
            && x + 1 < w
            && mask.get(y - 1, x)
            && mask.get(y + 1, x)
            && mask.get(y, x - 1)
            && mask.get(y, x + 1);
        if keep {
            out.set(y, x, true);
        }
    }
    out
}

/// 8-connected component labels (0 = background, components numbered from 1
/// in row-major order of their first cell) and the component count.
pub fn label_components(mask: &Mask) -> (Vec<u32>, usize) {
    let (h, w) = (mask.height(), mask.width());
    let mut labels = vec![0u32; h * w];
    let mut count = 0;
    let mut stack = Vec::new();
    for (y, x) in mask.set_cells() {
        if labels[y * w + x] != 0 {
            continue;
        }
        count += 1;
        labels[y * w + x] = count as u32;
        stack.push((y, x));
        while let Some((cy, cx)) = stack.pop() {
            for ny in cy.saturating_sub(1)..=(cy + 1).min(h - 1) {
                for nx in cx.saturating_sub(1)..=(cx + 1).min(w - 1) {
                    if mask.get(ny, nx) && labels[ny * w + nx] == 0 {
                        labels[ny * w + nx] = count as u32;
                        stack.push((ny, nx));
                    }
                }
            }
        }
    }
    (labels, count)
}

pub fn count_components(mask: &Mask) -> usize {
    label_components(mask).1
}

/// Erodes until the mask splits into at least two components. `None` if it
/// empties first.
pub fn erode_until_split(mask: &Mask) -> Option<Mask> {
    let mut cur = mask.clone();
    loop {
        if cur.is_empty() {
            return None;
        }
        if count_components(&cur) >= 2 {
            return Some(cur);
        }
        cur = erode_cross(&cur);
    }
}
