//! Integer line rasterization between cell centers.

use crate::geometry::Cell;

/// Cells on the Bresenham line from `a` to `b`, both endpoints included.
///
/// The line is always rasterized from the lexicographically smaller endpoint
/// (by `x`, then `y`) and reversed when needed, so `line(a, b)` is exactly the
/// reverse of `line(b, a)`. Along the major axis each step picks the minor
/// coordinate whose center is nearest the ideal line; exact ties round away
/// from the canonical start.
pub fn bresenham(a: Cell, b: Cell) -> Vec<Cell> {
    let reversed = (a.x, a.y) > (b.x, b.y);
    let (start, end) = if reversed { (b, a) } else { (a, b) };
    let dx = end.x - start.x;
    let dy = end.y - start.y;
    let x_major = dx.abs() >= dy.abs();
    let (d_major, d_minor) = if x_major { (dx.abs(), dy.abs()) } else { (dy.abs(), dx.abs()) };
    let s_major = if x_major { dx.signum() } else { dy.signum() };
    let s_minor = if x_major { dy.signum() } else { dx.signum() };

    let mut cells = Vec::with_capacity(d_major as usize + 1);
    // err tracks 2*t*d_minor + d_major - 2*d_major*minor
    let mut err = d_major;
    let mut minor = 0;
    for t in 0..=d_major {
        let (ox, oy) = if x_major {
            (t * s_major, minor * s_minor)
        } else {
            (minor * s_minor, t * s_major)
        };
        cells.push(start.offset(ox, oy));
        err += 2 * d_minor;
        if err >= 2 * d_major {
            minor += 1;
            err -= 2 * d_major;
        }
    }
    if reversed {
        cells.reverse();
    }
    cells
}
