//! QAM point layouts.
//!
//! Square QAM (`log2 M` even) is a `√M × √M` grid with independent per-axis Gray
//! labels. 8-QAM is a 4×2 rectangle labelled the same way. Larger odd-order
//! sizes use the cross layout: start from a `2^(k+1) × 2^k` Gray-labelled
//! rectangle and fold its outer column blocks into strips above and below the
//! central square, giving an `S × S` square with `c × c` corners removed.

use super::{gray_code, Constellation, Detector, Modulation, Scheme};
use crate::error::Result;

/// A grid site `(x, y)` with its label, before normalization.
struct Site {
    x: usize,
    y: usize,
    label: u32,
}

pub fn build_qam(m: u32) -> Result<Constellation> {
    Modulation::qam(m).validate()?;
    let n = m.trailing_zeros();
    let (width, height, sites) = match n {
        _ if n % 2 == 0 => {
            let side = 1usize << (n / 2);
            (side, side, rectangle(side, side))
        }
        3 => (4, 2, rectangle(4, 2)),
        _ => cross(n),
    };

    let mut sites = sites;
    sites.sort_by_key(|s| (s.y, s.x));
    let mut cells = vec![None; width * height];
    let mut coords = Vec::with_capacity(sites.len());
    let mut labels = Vec::with_capacity(sites.len());
    for (index, site) in sites.iter().enumerate() {
        cells[site.y * width + site.x] = Some(index as u32);
        coords.push((level(site.x, width), level(site.y, height)));
        labels.push(site.label);
    }

    Constellation::assemble(
        Scheme::Qam,
        m,
        coords,
        labels,
        0.0,
        Detector::Grid {
            width,
            height,
            spacing: 1.0,
            cells,
        },
    )
}

/// Odd integer amplitude level of grid column `x` out of `n`: `-(n-1), …, n-1`.
fn level(x: usize, n: usize) -> f64 {
    (2 * x) as f64 - (n - 1) as f64
}

/// Per-axis Gray labels: the x label occupies the high bits.
fn rectangle(width: usize, height: usize) -> Vec<Site> {
    let y_bits = height.trailing_zeros();
    (0..height)
        .flat_map(|y| {
            (0..width).map(move |x| Site {
                x,
                y,
                label: (gray_code(x as u32) << y_bits) | gray_code(y as u32),
            })
        })
        .collect()
}

fn cross(n: u32) -> (usize, usize, Vec<Site>) {
    let k = (n - 1) / 2;
    let width = 1usize << (k + 1);
    let height = 1usize << k;
    let corner = 1usize << (k - 2);
    let side = height + 2 * corner;
    let half = height / 2;

    let sites = rectangle(width, height)
        .into_iter()
        .map(|Site { x, y, label }| {
            let (x, y) = if x < corner || x >= width - corner {
                let left = x < corner;
                // Depth into the folded block; 0 is the outermost column.
                let depth = if left { x } else { width - 1 - x };
                let (row, along) = if y < half {
                    (depth, y)
                } else {
                    (side - 1 - depth, height - 1 - y)
                };
                let col = if left {
                    corner + along
                } else {
                    side - 1 - corner - along
                };
                (col, row)
            } else {
                (x - corner, y + corner)
            };
            Site { x, y, label }
        })
        .collect();
    (side, side, sites)
}
