//! Scanline polygon rasterization with the even-odd fill rule.
//!
//! A pixel is covered when its center `(px + 0.5, py + 0.5)` lies inside the
//! polygon. Crossings use the half-open rule `min(y) <= yc < max(y)` so
//! shared edges between adjacent polygons never double-fill or leave gaps,
//! and spans are half-open in x for the same reason.

/// Apply `op` to every raster cell whose pixel center is inside `polygon`
/// (even-odd rule). Out-of-bounds geometry is clipped.
pub fn fill_polygon<F: FnMut(&mut f64)>(
    raster: &mut [f64],
    width: u32,
    height: u32,
    polygon: &[[f64; 2]],
    mut op: F,
) {
    if polygon.len() < 3 {
        return;
    }
    let w = width as usize;

    let y_min = polygon.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
    let y_max = polygon
        .iter()
        .map(|p| p[1])
        .fold(f64::NEG_INFINITY, f64::max);
    let py_start = (y_min - 0.5).ceil().max(0.0) as u32;
    let py_end_excl = ((y_max - 0.5).ceil().max(0.0) as u32).min(height);

    let mut crossings: Vec<f64> = Vec::with_capacity(polygon.len());
    for py in py_start..py_end_excl {
        let yc = py as f64 + 0.5;
        crossings.clear();
        for i in 0..polygon.len() {
            let [x1, y1] = polygon[i];
            let [x2, y2] = polygon[(i + 1) % polygon.len()];
            if (y1 <= yc && y2 > yc) || (y2 <= yc && y1 > yc) {
                crossings.push(x1 + (yc - y1) * (x2 - x1) / (y2 - y1));
            }
        }
        crossings.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for pair in crossings.chunks_exact(2) {
            let px_start = (pair[0] - 0.5).ceil().max(0.0) as i64;
            let px_end_excl = (pair[1] - 0.5).ceil().max(0.0) as i64;
            let lo = px_start.min(w as i64) as usize;
            let hi = px_end_excl.min(w as i64) as usize;
            let row = py as usize * w;
            for cell in &mut raster[row + lo..row + hi] {
                op(cell);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raster_of(width: u32, height: u32, poly: &[[f64; 2]]) -> Vec<f64> {
        let mut r = vec![0.0; (width * height) as usize];
        fill_polygon(&mut r, width, height, poly, |c| *c = 1.0);
        r
    }

    #[test]
    fn unit_rect_covers_exact_pixels() {
        // [2,5) x [1,3): pixel centers 2.5..4.5 x 1.5..2.5
        let r = raster_of(8, 4, &[[2.0, 1.0], [5.0, 1.0], [5.0, 3.0], [2.0, 3.0]]);
        let covered: usize = r.iter().map(|&v| v as usize).sum();
        assert_eq!(covered, 6);
        assert_eq!(r[8 + 2], 1.0);
        assert_eq!(r[2 * 8 + 4], 1.0);
        assert_eq!(r[8 + 5], 0.0);
        assert_eq!(r[0], 0.0);
    }

    #[test]
    fn adjacent_rects_tile_without_overlap() {
        let mut r = vec![0.0; 64];
        fill_polygon(
            &mut r,
            8,
            8,
            &[[0.0, 0.0], [4.0, 0.0], [4.0, 8.0], [0.0, 8.0]],
            |c| *c += 1.0,
        );
        fill_polygon(
            &mut r,
            8,
            8,
            &[[4.0, 0.0], [8.0, 0.0], [8.0, 8.0], [4.0, 8.0]],
            |c| *c += 1.0,
        );
        assert!(
            r.iter().all(|&v| v == 1.0),
            "shared edge double-filled or gapped"
        );
    }

    #[test]
    fn degenerate_polygons_are_noops() {
        let r = raster_of(4, 4, &[[1.0, 1.0], [3.0, 3.0]]);
        assert!(r.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn out_of_bounds_clipped() {
        let r = raster_of(
            4,
            4,
            &[[-10.0, -10.0], [10.0, -10.0], [10.0, 10.0], [-10.0, 10.0]],
        );
        assert!(r.iter().all(|&v| v == 1.0));
    }

    /// Independent oracle: even-odd ray casting per pixel center.
    fn point_in_polygon(px: f64, py: f64, poly: &[[f64; 2]]) -> bool {
        let mut inside = false;
        for i in 0..poly.len() {
            let [x1, y1] = poly[i];
            let [x2, y2] = poly[(i + 1) % poly.len()];
            if (y1 <= py && y2 > py) || (y2 <= py && y1 > py) {
                let x_int = x1 + (py - y1) * (x2 - x1) / (y2 - y1);
                if x_int > px {
                    inside = !inside;
                }
            }
        }
        inside
    }

    #[test]
    fn matches_ray_casting_oracle_on_random_polygons() {
        let mut state: u64 = 0x51ab_cdef_1234_5678;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for case in 0..50 {
            let nverts = 3 + (next() * 6.0) as usize;
            let poly: Vec<[f64; 2]> = (0..nverts)
                .map(|_| [next() * 20.0, next() * 20.0])
                .collect();
            let got = raster_of(20, 20, &poly);
            for py in 0..20u32 {
                for px in 0..20u32 {
                    let want = point_in_polygon(px as f64 + 0.5, py as f64 + 0.5, &poly);
                    let have = got[(py * 20 + px) as usize] == 1.0;
                    assert_eq!(
                        have, want,
                        "case {case}: pixel ({px},{py}) disagrees with oracle for {poly:?}"
                    );
                }
            }
        }
    }
}
