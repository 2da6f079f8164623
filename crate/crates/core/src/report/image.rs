//! Plain-text graymap mosaics of 2D covariance fields.

use super::FieldCell;
use crate::error::{Error, Result};
use std::io::Write;

/// An 8-bit grayscale image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mosaic {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

const SEPARATOR_DARK: u8 = 0;
const SEPARATOR_LIGHT: u8 = 255;
const DASH: usize = 2;

/// Lays out one block per subband `(m₁, m₂)` (row `m₁`, column `m₂`), each
/// block holding the lag grid `(ℓ₁, ℓ₂)` scaled by `scale` pixels per lag.
/// Values map linearly to `[0, 255]` with 0 at mid-gray and `±max|Γ|` at the
/// extremes. Blocks are separated by one-pixel dashed lines.
pub fn mosaic(bands: usize, cells: &[FieldCell], value: impl Fn(&FieldCell) -> f64, scale: usize) -> Result<Mosaic> {
    if cells.is_empty() || scale == 0 {
        return Err(Error::InvalidParam("mosaic needs cells and a positive scale".into()));
    }
    let range = |f: fn(&FieldCell) -> i64| {
        let lo = cells.iter().map(f).min().unwrap();
        let hi = cells.iter().map(f).max().unwrap();
        (lo, (hi - lo + 1) as usize)
    };
    let (r0, rows) = range(|c| c.lag.0);
    let (c0, cols) = range(|c| c.lag.1);
    let bh = rows * scale;
    let bw = cols * scale;
    let width = bands * bw + bands - 1;
    let height = bands * bh + bands - 1;
    let peak = cells.iter().map(|c| value(c).abs()).fold(0.0, f64::max);
    let mut pixels = vec![128u8; width * height];

    for y in 0..height {
        for x in 0..width {
            let on_v = x % (bw + 1) == bw;
            let on_h = y % (bh + 1) == bh;
            if on_v || on_h {
                let t = if on_v { y } else { x };
                pixels[y * width + x] = if (t / DASH) % 2 == 0 { SEPARATOR_DARK } else { SEPARATOR_LIGHT };
            }
        }
    }
    for c in cells {
        if c.m.0 >= bands || c.m.1 >= bands {
            return Err(Error::UnknownBand { m: c.m.0.max(c.m.1), bands });
        }
        let v = value(c);
        let g = if peak > 0.0 { 127.5 + 127.5 * v / peak } else { 127.5 };
        let g = g.round().clamp(0.0, 255.0) as u8;
        let oy = c.m.0 * (bh + 1) + (c.lag.0 - r0) as usize * scale;
        let ox = c.m.1 * (bw + 1) + (c.lag.1 - c0) as usize * scale;
        for y in oy..oy + scale {
            for x in ox..ox + scale {
                pixels[y * width + x] = g;
            }
        }
    }
    Ok(Mosaic { width, height, pixels })
}

/// Writes a `P2` graymap.
pub fn write_pgm<W: Write>(img: &Mosaic, mut w: W) -> Result<()> {
    writeln!(w, "P2")?;
    writeln!(w, "{} {}", img.width, img.height)?;
    writeln!(w, "255")?;
    for row in img.pixels.chunks(img.width) {
        let line: Vec<String> = row.iter().map(|p| p.to_string()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(m: (usize, usize), lag: (i64, i64), theory: f64) -> FieldCell {
        FieldCell {
            m,
            lag,
            theory,
            mc: 0.0,
            stderr: 0.0,
        }
    }

    #[test]
    fn layout_and_scaling() {
        let mut cells = Vec::new();
        for m1 in 0..2 {
            for m2 in 0..2 {
                for l1 in 0..2 {
                    for l2 in 0..2 {
                        cells.push(cell((m1, m2), (l1, l2), 0.0));
                    }
                }
            }
        }
        cells[0].theory = 2.0;
        cells[1].theory = -1.0;
        let img = mosaic(2, &cells, |c| c.theory, 1).unwrap();
        assert_eq!((img.width, img.height), (5, 5));
        assert_eq!(img.pixels[0], 255);
        assert_eq!(img.pixels[1], 64);
        assert_eq!(img.pixels[3], 128);
        assert!(matches!(img.pixels[2], SEPARATOR_DARK | SEPARATOR_LIGHT));

        let mut buf = Vec::new();
        write_pgm(&img, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("P2"));
        assert_eq!(lines.next(), Some("5 5"));
        assert_eq!(lines.next(), Some("255"));
        assert_eq!(lines.count(), 5);
    }
}
