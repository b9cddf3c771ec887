use crate::error::{Error, Result};

/// `(x, y)` in pixel units; pixel `(row, col)` has its center at `(col + 0.5, row + 0.5)`.
pub type Point = [f64; 2];

/// Samples a Bézier curve at `samples` uniform parameters in `[0, 1]` by
/// de Casteljau's algorithm. The first and last samples equal the first and
/// last control points exactly.
pub fn bezier_curve_points(control: &[Point], samples: usize) -> Result<Vec<Point>> {
    if control.len() < 2 {
        return Err(Error::Parameter(format!(
            "a Bézier curve needs at least 2 control points, got {}",
            control.len()
        )));
    }
    if samples < 2 {
        return Err(Error::Parameter(format!(
            "a Bézier curve needs at least 2 samples, got {samples}"
        )));
    }
    let mut scratch = vec![[0.0; 2]; control.len()];
    Ok((0..samples)
        .map(|i| {
            let t = i as f64 / (samples - 1) as f64;
            de_casteljau(control, t, &mut scratch)
        })
        .collect())
}

fn de_casteljau(control: &[Point], t: f64, scratch: &mut [Point]) -> Point {
    scratch.copy_from_slice(control);
    let s = 1.0 - t;
    for level in (1..control.len()).rev() {
        for i in 0..level {
            // (1 - t) a + t b is exact at both ends, unlike a + t (b - a)
            scratch[i] = [
                s * scratch[i][0] + t * scratch[i + 1][0],
                s * scratch[i][1] + t * scratch[i + 1][1],
            ];
        }
    }
    scratch[0]
}

/// Signed shoelace area of a closed polygon.
pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    (0..n)
        .map(|i| {
            let [x0, y0] = poly[i];
            let [x1, y1] = poly[(i + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum::<f64>()
        * 0.5
}

/// `(min, max)` corners of the point set.
pub fn bounds(points: &[Point]) -> (Point, Point) {
    points.iter().fold(
        ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
        |(lo, hi), p| {
            (
                [lo[0].min(p[0]), lo[1].min(p[1])],
                [hi[0].max(p[0]), hi[1].max(p[1])],
            )
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_controls_give_a_point() {
        let pts = bezier_curve_points(&[[2.5, -1.0]; 5], 17).unwrap();
        assert!(pts.iter().all(|&p| p == [2.5, -1.0]));
    }

    #[test]
    fn linear_midpoint() {
        let pts = bezier_curve_points(&[[0.0, 0.0], [4.0, 2.0]], 3).unwrap();
        assert_eq!(pts, vec![[0.0, 0.0], [2.0, 1.0], [4.0, 2.0]]);
    }

    #[test]
    fn quadratic_closed_form() {
        let c = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0]];
        let pts = bezier_curve_points(&c, 11).unwrap();
        for (i, p) in pts.iter().enumerate() {
            let t = i as f64 / 10.0;
            let (a, b, d) = ((1.0 - t) * (1.0 - t), 2.0 * t * (1.0 - t), t * t);
            let want = [a * c[0][0] + b * c[1][0] + d * c[2][0], a * c[0][1] + b * c[1][1] + d * c[2][1]];
            assert!((p[0] - want[0]).abs() < 1e-12 && (p[1] - want[1]).abs() < 1e-12);
        }
        assert_eq!(pts[5], [1.5, 0.5]);
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(bezier_curve_points(&[[0.0, 0.0]], 8), Err(Error::Parameter(_))));
        assert!(bezier_curve_points(&[[0.0, 0.0], [1.0, 1.0]], 1).is_err());
    }

    #[test]
    fn shoelace_square() {
        let sq = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]];
        assert_eq!(polygon_area(&sq), 4.0);
        let rev: Vec<_> = sq.iter().rev().copied().collect();
        assert_eq!(polygon_area(&rev), -4.0);
    }

    proptest! {
        #[test]
        fn endpoints_are_interpolated_exactly(
            c in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 2..9),
            samples in 2usize..200,
        ) {
            let control: Vec<Point> = c.iter().map(|&(x, y)| [x, y]).collect();
            let pts = bezier_curve_points(&control, samples).unwrap();
            prop_assert_eq!(pts.len(), samples);
            prop_assert_eq!(pts[0], control[0]);
            prop_assert_eq!(pts[samples - 1], *control.last().unwrap());
            let (lo, hi) = bounds(&control);
            for p in &pts {
                prop_assert!(p[0] >= lo[0] - 1e-9 && p[0] <= hi[0] + 1e-9);
                prop_assert!(p[1] >= lo[1] - 1e-9 && p[1] <= hi[1] + 1e-9);
            }
        }
    }
}
