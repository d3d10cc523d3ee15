//! PGM (P2/P5) parsing and PNG decoding.

use std::io::Write;
use std::path::Path;

use super::{IngestError, RasterImage};

/// Parse a PGM file, ASCII (P2) or binary (P5). Maxval up to 255; smaller
/// maxvals are rescaled to the full 8-bit range.
pub(super) fn decode_pgm(bytes: &[u8]) -> Result<RasterImage, IngestError> {
    let mut cur = 0usize;

    let next_token = |cur: &mut usize| -> Result<Vec<u8>, IngestError> {
        // Skip whitespace and `#` comments.
        loop {
            while *cur < bytes.len() && bytes[*cur].is_ascii_whitespace() {
                *cur += 1;
            }
            if *cur < bytes.len() && bytes[*cur] == b'#' {
                while *cur < bytes.len() && bytes[*cur] != b'\n' {
                    *cur += 1;
                }
            } else {
                break;
            }
        }
        let start = *cur;
        while *cur < bytes.len() && !bytes[*cur].is_ascii_whitespace() {
            *cur += 1;
        }
        if start == *cur {
            return Err(IngestError::Format("truncated PGM header".into()));
        }
        Ok(bytes[start..*cur].to_vec())
    };

    let magic = next_token(&mut cur)?;
    let binary = match magic.as_slice() {
        b"P2" => false,
        b"P5" => true,
        _ => return Err(IngestError::Format("not a PGM file (expected P2 or P5)".into())),
    };

    let read_u32 = |cur: &mut usize| -> Result<usize, IngestError> {
        let tok = next_token(cur)?;
        std::str::from_utf8(&tok)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| IngestError::Format("bad PGM header number".into()))
    };

    let width = read_u32(&mut cur)?;
    let height = read_u32(&mut cur)?;
    let maxval = read_u32(&mut cur)?;
    if width == 0 || height == 0 {
        return Err(IngestError::Format("zero PGM dimensions".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(IngestError::Format(format!("unsupported PGM maxval {maxval}")));
    }

    let n = width * height;
    let mut pixels = Vec::with_capacity(n);
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        if cur >= bytes.len() || !bytes[cur].is_ascii_whitespace() {
            return Err(IngestError::Format("missing whitespace before PGM raster".into()));
        }
        cur += 1;
        if bytes.len() < cur + n {
            return Err(IngestError::Format("truncated PGM raster".into()));
        }
        pixels.extend_from_slice(&bytes[cur..cur + n]);
    } else {
        for _ in 0..n {
            let tok = next_token(&mut cur)?;
            let v: usize = std::str::from_utf8(&tok)
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| IngestError::Format("bad PGM sample".into()))?;
            if v > maxval {
                return Err(IngestError::Format(format!("sample {v} exceeds maxval {maxval}")));
            }
            pixels.push(v as u8);
        }
    }

    if maxval != 255 {
        for p in &mut pixels {
            *p = ((*p as f64) * 255.0 / maxval as f64).round() as u8;
        }
    }
    RasterImage::new(width, height, pixels)
}

/// Write a binary (P5) PGM file.
pub fn write_pgm(path: &Path, img: &RasterImage) -> Result<(), IngestError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(f, "P5\n{} {}\n255\n", img.width, img.height)?;
    f.write_all(&img.pixels)?;
    f.flush()?;
    Ok(())
}

/// Decode a PNG into grayscale; color images collapse via the luminance
/// weights `0.299 / 0.587 / 0.114`.
pub(super) fn decode_png(path: &Path) -> Result<RasterImage, IngestError> {
    let reader = image::ImageReader::open(path)?;
    let decoded = reader.decode().map_err(|e| IngestError::Format(e.to_string()))?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    let pixels = match decoded {
        image::DynamicImage::ImageLuma8(g) => g.into_raw(),
        other => {
            let rgb = other.to_rgb8();
            rgb.pixels()
                .map(|p| {
                    let [r, g, b] = p.0;
                    (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64).round() as u8
                })
                .collect()
        }
    };
    RasterImage::new(width, height, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::load_image;

    #[test]
    fn ascii_pgm_2x2() {
        let src = b"P2\n# tiny\n2 2\n255\n0 255\n255 0\n";
        let img = decode_pgm(src).unwrap();
        assert_eq!((img.width, img.height), (2, 2));
        assert_eq!(img.pixels, vec![0, 255, 255, 0]);
    }

    #[test]
    fn all_white_16x16() {
        let mut src = String::from("P2\n16 16\n255\n");
        for _ in 0..256 {
            src.push_str("255 ");
        }
        let img = decode_pgm(src.as_bytes()).unwrap();
        assert_eq!(img.pixels.len(), 256);
        assert!(img.pixels.iter().all(|&v| v == 255));
    }

    #[test]
    fn binary_pgm_round_trip() {
        let img = RasterImage::new(3, 2, vec![0, 10, 20, 30, 40, 250]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pgm");
        write_pgm(&path, &img).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn pgm_maxval_rescaled() {
        let src = b"P2\n2 1\n100\n0 100\n";
        let img = decode_pgm(src).unwrap();
        assert_eq!(img.pixels, vec![0, 255]);
    }

    #[test]
    fn rgb_png_luminance() {
        // A single red pixel must decode to round(0.299 * 255) = 76.
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("red.png");
        let buf = image::RgbImage::from_pixel(1, 1, image::Rgb([255, 0, 0]));
        buf.save(&path).unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!(img.pixels, vec![76]);
    }

    #[test]
    fn unknown_extension_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.bmp");
        std::fs::write(&path, b"junk").unwrap();
        assert!(matches!(load_image(&path), Err(IngestError::Format(_))));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_image(Path::new("/nonexistent/file.pgm")),
            Err(IngestError::Io(_))
        ));
    }
}
