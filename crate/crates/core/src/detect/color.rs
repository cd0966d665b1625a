//! Color-channel extraction for line-pixel detection: CIELAB b*, HSV value
//! and HLS lightness, each delivered as an 8-bit intensity image.
//!
//! Conversions follow the standard sRGB (D65) definitions. The b* channel is
//! stored offset-neutral as 128 + b* clamped to [0, 255], so yellow raises
//! it and blue lowers it.

use crate::image::{GrayImage, Image};
use std::sync::OnceLock;

fn srgb_linear_lut() -> &'static [f64; 256] {
    static LUT: OnceLock<[f64; 256]> = OnceLock::new();
    LUT.get_or_init(|| {
        let mut lut = [0.0; 256];
        for (i, e) in lut.iter_mut().enumerate() {
            let c = i as f64 / 255.0;
            *e = if c <= 0.04045 {
                c / 12.92
            } else {
                ((c + 0.055) / 1.055).powf(2.4)
            };
        }
        lut
    })
}

/// CIELAB b* of an sRGB triple, in Lab units.
pub fn lab_b_star(rgb: [u8; 3]) -> f64 {
    let lut = srgb_linear_lut();
    let r = lut[rgb[0] as usize];
    let g = lut[rgb[1] as usize];
    let b = lut[rgb[2] as usize];
    let y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    let z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    const ZN: f64 = 1.08883;
    const DELTA3: f64 = (6.0 / 29.0) * (6.0 / 29.0) * (6.0 / 29.0);
    let f = |t: f64| {
        if t > DELTA3 {
            t.cbrt()
        } else {
            t / (3.0 * (6.0 / 29.0) * (6.0 / 29.0)) + 4.0 / 29.0
        }
    };
    200.0 * (f(y) - f(z / ZN))
}

/// (LAB b* offset-encoding, HSV value, HLS lightness) of one pixel.
#[inline]
fn channels_of(rgb: [u8; 3]) -> (u8, u8, u8) {
    let b_enc = (128.0 + lab_b_star(rgb)).round().clamp(0.0, 255.0) as u8;
    let mx = rgb[0].max(rgb[1]).max(rgb[2]);
    let mn = rgb[0].min(rgb[1]).min(rgb[2]);
    let l = (mx as u16 + mn as u16).div_ceil(2) as u8;
    (b_enc, mx, l)
}

/// Split an RGB image into the three detection channels.
pub fn extract_channels(img: &Image) -> (GrayImage, GrayImage, GrayImage) {
    let mut lab_b = GrayImage::new(img.width, img.height);
    let mut hsv_v = GrayImage::new(img.width, img.height);
    let mut hls_l = GrayImage::new(img.width, img.height);
    for i in 0..img.width * img.height {
        let rgb = [img.data[3 * i], img.data[3 * i + 1], img.data[3 * i + 2]];
        let (b, v, l) = channels_of(rgb);
        lab_b.data[i] = b;
        hsv_v.data[i] = v;
        hls_l.data[i] = l;
    }
    (lab_b, hsv_v, hls_l)
}
