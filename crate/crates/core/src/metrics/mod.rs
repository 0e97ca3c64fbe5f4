//! Evaluation metrics: coverage AUC, mono-directional Chamfer distance and
//! grouped reports over episode logs.

mod report;

use crate::geometry::Cell;
use crate::scalar::Real;

pub use report::{aggregate, load_logs, LogIssue, Report, ReportRow, CSV_HEADER};

/// Mean coverage over a keyframe budget of `budget` steps; a curve shorter
/// than the budget is padded with its final value.
pub fn auc<S: Real>(curve: &[S], budget: usize) -> S {
    let Some(last) = curve.last() else {
        return S::zero();
    };
    if budget == 0 {
        return S::zero();
    }
    let sum = (0..budget).fold(S::zero(), |acc, t| acc + *curve.get(t).unwrap_or(last));
    sum / S::lit(budget as f64)
}

/// Diagonal of a `width × height` map in meters; the Chamfer value reported
/// when nothing has been captured.
pub fn map_diagonal(width: usize, height: usize, cell_size: f64) -> f64 {
    (width as f64).hypot(height as f64) * cell_size
}

/// Mean over `gt` of the distance (meters, between cell centers) to the
/// nearest cell of `captured`. Returns `empty_value` when `captured` is empty.
pub fn chamfer<S: Real>(gt: &[Cell], captured: &[Cell], cell_size: S, empty_value: S) -> S {
    if captured.is_empty() {
        return empty_value;
    }
    if gt.is_empty() {
        return S::zero();
    }
    let field = SquaredDistanceField::new(captured, gt);
    let total = gt
        .iter()
        .fold(S::zero(), |acc, g| acc + S::lit(field.get(*g).sqrt()));
    total / S::lit(gt.len() as f64) * cell_size
}

/// Exact squared Euclidean distance transform over the bounding box of the
/// seeds and queries (separable lower-envelope algorithm of Felzenszwalb and
/// Huttenlocher). Squared distances are integers, so results are exact.
struct SquaredDistanceField {
    x0: i32,
    y0: i32,
    width: usize,
    values: Vec<f64>,
}

const FAR: f64 = 1e20;

impl SquaredDistanceField {
    fn new(seeds: &[Cell], queries: &[Cell]) -> Self {
        let all = seeds.iter().chain(queries);
        let (mut x0, mut y0, mut x1, mut y1) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
        for c in all {
            x0 = x0.min(c.x);
            y0 = y0.min(c.y);
            x1 = x1.max(c.x);
            y1 = y1.max(c.y);
        }
        let width = (x1 - x0 + 1) as usize;
        let height = (y1 - y0 + 1) as usize;
        let mut values = vec![FAR; width * height];
        for s in seeds {
            values[(s.y - y0) as usize * width + (s.x - x0) as usize] = 0.0;
        }
        let mut line = Vec::new();
        for x in 0..width {
            line.clear();
            line.extend((0..height).map(|y| values[y * width + x]));
            let out = transform_1d(&line);
            for (y, v) in out.into_iter().enumerate() {
                values[y * width + x] = v;
            }
        }
        for y in 0..height {
            let row = &mut values[y * width..(y + 1) * width];
            let out = transform_1d(row);
            row.copy_from_slice(&out);
        }
        Self { x0, y0, width, values }
    }

    fn get(&self, c: Cell) -> f64 {
        self.values[(c.y - self.y0) as usize * self.width + (c.x - self.x0) as usize]
    }
}

fn transform_1d(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![FAR; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0f64; n + 1];
    let mut k = 0usize;
    let Some(first) = (0..n).find(|i| f[*i] < FAR) else {
        return out;
    };
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in first + 1..n {
        if f[q] >= FAR {
            continue;
        }
        let intersect = |p: usize| ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
        // z[0] = -inf stops the scan at the first parabola
        let mut s = intersect(v[k]);
        while s <= z[k] {
            k -= 1;
            s = intersect(v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut j = 0;
    for (q, slot) in out.iter_mut().enumerate() {
        while z[j + 1] < q as f64 {
            j += 1;
        }
        let p = v[j];
        let d = q as f64 - p as f64;
        *slot = d * d + f[p];
    }
    out
}
