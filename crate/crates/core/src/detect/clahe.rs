//! Contrast-limited adaptive histogram equalization.
//!
//! Per-tile histograms are clipped at `clip * uniform bin height`, the
//! excess is redistributed uniformly over all bins, each tile gets a
//! CDF-rescale lookup table, and every pixel blends the four neighboring
//! tile tables bilinearly. Clipping and redistribution are exact (real
//! valued), so tiles of different sizes produce identical tables on
//! identical content and a constant image stays constant. Tiles that do not
//! divide the image are edge-clamped (the last row/column of tiles is
//! smaller).

use crate::image::GrayImage;

struct TileGrid {
    /// Tile boundaries along one axis: tile i covers [edges[i], edges[i+1]).
    edges_x: Vec<usize>,
    edges_y: Vec<usize>,
    centers_x: Vec<f64>,
    centers_y: Vec<f64>,
}

fn tile_edges(extent: usize, tile: usize) -> Vec<usize> {
    let n = extent.div_ceil(tile);
    let mut edges: Vec<usize> = (0..n).map(|i| i * tile).collect();
    edges.push(extent);
    edges
}

impl TileGrid {
    fn new(width: usize, height: usize, tile: usize) -> Self {
        let edges_x = tile_edges(width, tile);
        let edges_y = tile_edges(height, tile);
        let centers = |edges: &[usize]| {
            edges
                .windows(2)
                .map(|w| (w[0] + w[1]) as f64 / 2.0)
                .collect::<Vec<_>>()
        };
        Self {
            centers_x: centers(&edges_x),
            centers_y: centers(&edges_y),
            edges_x,
            edges_y,
        }
    }

    fn nx(&self) -> usize {
        self.centers_x.len()
    }

    fn ny(&self) -> usize {
        self.centers_y.len()
    }
}

fn tile_lut(img: &GrayImage, x0: usize, x1: usize, y0: usize, y1: usize, clip: f64) -> [u8; 256] {
    let area = ((x1 - x0) * (y1 - y0)) as f64;
    let mut hist = [0.0f64; 256];
    for y in y0..y1 {
        for x in x0..x1 {
            hist[img.get(x, y) as usize] += 1.0;
        }
    }

    let clip_limit = clip * area / 256.0;
    let mut excess = 0.0;
    for bin in hist.iter_mut() {
        if *bin > clip_limit {
            excess += *bin - clip_limit;
            *bin = clip_limit;
        }
    }
    let share = excess / 256.0;

    let mut lut = [0u8; 256];
    let scale = 255.0 / area;
    let mut cdf = 0.0;
    for (i, bin) in hist.iter().enumerate() {
        cdf += bin + share;
        lut[i] = (cdf * scale).round().clamp(0.0, 255.0) as u8;
    }
    lut
}

/// Neighboring tile indices and the blend weight toward the second one, for
/// a pixel-center position along one axis.
#[inline]
fn blend(centers: &[f64], pos: f64) -> (usize, usize, f64) {
    if pos <= centers[0] {
        return (0, 0, 0.0);
    }
    let last = centers.len() - 1;
    if pos >= centers[last] {
        return (last, last, 0.0);
    }
    let mut i = 0;
    while centers[i + 1] < pos {
        i += 1;
    }
    let t = (pos - centers[i]) / (centers[i + 1] - centers[i]);
    (i, i + 1, t)
}

pub fn clahe(channel: &GrayImage, tile: usize, clip: f64) -> GrayImage {
    assert!(tile >= 1 && clip >= 1.0);
    let grid = TileGrid::new(channel.width, channel.height, tile);
    let mut luts = Vec::with_capacity(grid.nx() * grid.ny());
    for ty in 0..grid.ny() {
        for tx in 0..grid.nx() {
            luts.push(tile_lut(
                channel,
                grid.edges_x[tx],
                grid.edges_x[tx + 1],
                grid.edges_y[ty],
                grid.edges_y[ty + 1],
                clip,
            ));
        }
    }

    let mut out = GrayImage::new(channel.width, channel.height);
    for y in 0..channel.height {
        let (ty1, ty2, wy) = blend(&grid.centers_y, y as f64 + 0.5);
        for x in 0..channel.width {
            let (tx1, tx2, wx) = blend(&grid.centers_x, x as f64 + 0.5);
            let p = channel.get(x, y) as usize;
            let tl = luts[ty1 * grid.nx() + tx1][p] as f64;
            let tr = luts[ty1 * grid.nx() + tx2][p] as f64;
            let bl = luts[ty2 * grid.nx() + tx1][p] as f64;
            let br = luts[ty2 * grid.nx() + tx2][p] as f64;
            let top = tl * (1.0 - wx) + tr * wx;
            let bottom = bl * (1.0 - wx) + br * wx;
            let v = top * (1.0 - wy) + bottom * wy;
            out.set(x, y, v.round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}
