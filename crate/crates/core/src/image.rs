//! Binary images and PBM (P1/P4) file I/O.
//!
//! Pixel `(x, y)` is stored at `y * width + x`; row 0 is the top row. A value of
//! 1 is black (foreground), matching the PBM convention.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Default upper bound on either image side accepted by [`read_image`].
pub const DEFAULT_MAX_SIDE: usize = 8192;

/// A rectangular 0/1 pixel grid.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl std::fmt::Debug for BinaryImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BinaryImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("black", &self.count_black())
            .finish()
    }
}

impl BinaryImage {
    /// An all-white image.
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "image sides must be positive");
        BinaryImage {
            width,
            height,
            bits: vec![0; width * height],
        }
    }

    pub fn filled(width: usize, height: usize) -> Self {
        let mut img = Self::new(width, height);
        img.bits.fill(1);
        img
    }

    /// Builds an image from row-major 0/1 values. Any non-zero value is black.
    pub fn from_bits(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::MalformedImage("zero-sized image".into()));
        }
        if bits.len() != width * height {
            return Err(Error::MalformedImage(format!(
                "expected {} pixels, got {}",
                width * height,
                bits.len()
            )));
        }
        let bits = bits.into_iter().map(|b| u8::from(b != 0)).collect();
        Ok(BinaryImage {
            width,
            height,
            bits,
        })
    }

    /// Parses rows of `0`/`1` characters (other characters are ignored), one
    /// string per row. Handy for small fixtures.
    pub fn from_rows(rows: &[&str]) -> Result<Self> {
        let parsed: Vec<Vec<u8>> = rows
            .iter()
            .map(|r| {
                r.chars()
                    .filter_map(|c| match c {
                        '0' | '.' => Some(0),
                        '1' | '#' => Some(1),
                        _ => None,
                    })
                    .collect()
            })
            .collect();
        let height = parsed.len();
        let width = parsed.first().map_or(0, Vec::len);
        if parsed.iter().any(|r| r.len() != width) {
            return Err(Error::MalformedImage("ragged rows".into()));
        }
        Self::from_bits(width, height, parsed.concat())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x] != 0
    }

    /// Like [`get`](Self::get) but white outside the canvas.
    #[inline]
    pub fn get_padded(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.bits[y as usize * self.width + x as usize] != 0
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, black: bool) {
        self.bits[y * self.width + x] = u8::from(black);
    }

    pub fn count_black(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    pub fn is_blank(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.bits[y * self.width..(y + 1) * self.width]
    }

    /// Rotation by 90° clockwise.
    pub fn rotate90(&self) -> Self {
        let (w, h) = (self.width, self.height);
        let mut out = BinaryImage::new(h, w);
        for y in 0..h {
            for x in 0..w {
                // (x, y) -> (h - 1 - y, x)
                out.bits[x * h + (h - 1 - y)] = self.bits[y * w + x];
            }
        }
        out
    }

    pub fn flip_horizontal(&self) -> Self {
        let mut out = self.clone();
        for y in 0..self.height {
            out.bits[y * self.width..(y + 1) * self.width].reverse();
        }
        out
    }

    pub fn flip_vertical(&self) -> Self {
        let mut out = BinaryImage::new(self.width, self.height);
        for y in 0..self.height {
            let src = self.row(y);
            let dst = self.height - 1 - y;
            out.bits[dst * self.width..(dst + 1) * self.width].copy_from_slice(src);
        }
        out
    }

    /// Copies `self` into a larger white canvas with the given offset.
    pub fn padded(&self, left: usize, top: usize, width: usize, height: usize) -> Result<Self> {
        if left + self.width > width || top + self.height > height {
            return Err(Error::InvalidArgument(
                "padding canvas smaller than the image".into(),
            ));
        }
        let mut out = BinaryImage::new(width, height);
        for y in 0..self.height {
            let start = (y + top) * width + left;
            out.bits[start..start + self.width].copy_from_slice(self.row(y));
        }
        Ok(out)
    }

    /// True if any black pixel lies on the outermost ring of the canvas.
    pub fn touches_border(&self) -> bool {
        let (w, h) = (self.width, self.height);
        self.row(0).iter().any(|&b| b != 0)
            || self.row(h - 1).iter().any(|&b| b != 0)
            || (0..h).any(|y| self.bits[y * w] != 0 || self.bits[y * w + w - 1] != 0)
    }
}

/// PBM flavour for [`write_image`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PbmFormat {
    /// `P1`, ASCII digits.
    Plain,
    /// `P4`, packed bits.
    Raw,
}

pub fn read_image(path: impl AsRef<Path>) -> Result<BinaryImage> {
    read_image_limited(path, DEFAULT_MAX_SIDE)
}

pub fn read_image_limited(path: impl AsRef<Path>, max_side: usize) -> Result<BinaryImage> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pbm(&data, max_side)
}

pub fn write_image(img: &BinaryImage, path: impl AsRef<Path>, format: PbmFormat) -> Result<()> {
    let path = path.as_ref();
    let data = encode_pbm(img, format);
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&data).map_err(|e| Error::io(path, e))
}

pub fn encode_pbm(img: &BinaryImage, format: PbmFormat) -> Vec<u8> {
    let (w, h) = (img.width, img.height);
    match format {
        PbmFormat::Plain => {
            let mut out = format!("P1\n{w} {h}\n").into_bytes();
            for y in 0..h {
                // keep lines under the 70 character PBM recommendation
                for (i, &b) in img.row(y).iter().enumerate() {
                    if i > 0 {
                        out.push(if i % 35 == 0 { b'\n' } else { b' ' });
                    }
                    out.push(b'0' + b);
                }
                out.push(b'\n');
            }
            out
        }
        PbmFormat::Raw => {
            let mut out = format!("P4\n{w} {h}\n").into_bytes();
            let stride = w.div_ceil(8);
            out.reserve(stride * h);
            for y in 0..h {
                let row = img.row(y);
                for chunk in row.chunks(8) {
                    let mut byte = 0u8;
                    for (i, &b) in chunk.iter().enumerate() {
                        byte |= b << (7 - i);
                    }
                    out.push(byte);
                }
            }
            out
        }
    }
}

struct HeaderCursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedImage("expected a number in header".into()));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedImage("header number out of range".into()))
    }
}

pub fn decode_pbm(data: &[u8], max_side: usize) -> Result<BinaryImage> {
    if data.len() < 2 || data[0] != b'P' {
        return Err(Error::MalformedImage("missing PBM magic".into()));
    }
    let raw = match data[1] {
        b'1' => false,
        b'4' => true,
        m => {
            return Err(Error::MalformedImage(format!(
                "unsupported magic P{}",
                m as char
            )))
        }
    };
    let mut cur = HeaderCursor { data, pos: 2 };
    let width = cur.number()?;
    let height = cur.number()?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedImage("zero-sized image".into()));
    }
    if width > max_side || height > max_side {
        return Err(Error::ImageTooLarge {
            width,
            height,
            limit: max_side,
        });
    }
    let mut bits = Vec::with_capacity(width * height);
    if raw {
        // exactly one whitespace byte separates the header from the raster
        if cur.pos >= data.len() || !data[cur.pos].is_ascii_whitespace() {
            return Err(Error::MalformedImage("missing raster separator".into()));
        }
        let body = &data[cur.pos + 1..];
        let stride = width.div_ceil(8);
        if body.len() < stride * height {
            return Err(Error::MalformedImage(format!(
                "raster has {} bytes, expected {}",
                body.len(),
                stride * height
            )));
        }
        for y in 0..height {
            let row = &body[y * stride..(y + 1) * stride];
            for x in 0..width {
                bits.push((row[x / 8] >> (7 - x % 8)) & 1);
            }
        }
    } else {
        let mut pos = cur.pos;
        while bits.len() < width * height {
            if pos >= data.len() {
                return Err(Error::MalformedImage(format!(
                    "raster has {} pixels, expected {}",
                    bits.len(),
                    width * height
                )));
            }
            match data[pos] {
                b'0' => bits.push(0),
                b'1' => bits.push(1),
                b'#' => {
                    while pos < data.len() && data[pos] != b'\n' {
                        pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => {}
                c => {
                    return Err(Error::MalformedImage(format!(
                        "unexpected byte {c:#04x} in raster"
                    )))
                }
            }
            pos += 1;
        }
    }
    BinaryImage::from_bits(width, height, bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_image_round_trips_in_both_formats() {
        let img = BinaryImage::from_rows(&["10", "01"]).unwrap();
        for fmt in [PbmFormat::Plain, PbmFormat::Raw] {
            let back = decode_pbm(&encode_pbm(&img, fmt), DEFAULT_MAX_SIDE).unwrap();
            assert_eq!(back, img);
        }
    }

    #[test]
    fn plain_and_raw_encodings_agree() {
        let img = BinaryImage::from_rows(&["1011001", "0000000", "1111111"]).unwrap();
        let p1 = decode_pbm(&encode_pbm(&img, PbmFormat::Plain), 64).unwrap();
        let p4 = decode_pbm(&encode_pbm(&img, PbmFormat::Raw), 64).unwrap();
        assert_eq!(p1, p4);
    }

    #[test]
    fn header_comments_and_packed_digits() {
        let data = b"P1\n# made by hand\n3 2\n101\n010";
        let img = decode_pbm(data, 16).unwrap();
        assert_eq!(img, BinaryImage::from_rows(&["101", "010"]).unwrap());
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(matches!(
            decode_pbm(b"P2\n1 1\n0", 16),
            Err(Error::MalformedImage(_))
        ));
        assert!(matches!(
            decode_pbm(b"P1\n2 2\n1 0 1", 16),
            Err(Error::MalformedImage(_))
        ));
        assert!(matches!(
            decode_pbm(b"P4\n16 2\n\x00\x00", 16),
            Err(Error::MalformedImage(_))
        ));
        assert!(matches!(
            decode_pbm(b"P1\n20 1\n", 16),
            Err(Error::ImageTooLarge { .. })
        ));
    }

    #[test]
    fn rotation_has_order_four() {
        let img = BinaryImage::from_rows(&["110", "001"]).unwrap();
        let r = img.rotate90();
        assert_eq!((r.width(), r.height()), (2, 3));
        assert_eq!(r, BinaryImage::from_rows(&["01", "01", "10"]).unwrap());
        assert_eq!(r.rotate90().rotate90().rotate90(), img);
    }
}
