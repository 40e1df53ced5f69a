//! Raster file formats: the PSRAS1 container and ASCII PGM import.
//!
//! PSRAS1 is a minimal multi-band container: five plain-text header
//! lines (magic `PSRAS1`, width, height, bands, pixel size) followed by
//! little-endian 32-bit float samples, band-sequential, row-major.

use std::fs;
use std::path::Path;

use psharp_core::error::{Error, Result};
use psharp_core::Raster;

pub const MAGIC: &str = "PSRAS1";

/// Serializes a raster to PSRAS1 bytes. Samples are narrowed to f32.
pub fn to_psras_bytes(raster: &Raster) -> Vec<u8> {
    let header = format!(
        "{MAGIC}\n{}\n{}\n{}\n{}\n",
        raster.width(),
        raster.height(),
        raster.bands(),
        raster.pixel_size()
    );
    let mut bytes = header.into_bytes();
    bytes.reserve(raster.samples().len() * 4);
    for &v in raster.samples() {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    bytes
}

/// Parses PSRAS1 bytes; the payload length must match the header exactly.
pub fn from_psras_bytes(bytes: &[u8]) -> Result<Raster> {
    let mut pos = 0usize;
    let mut header: Vec<&str> = Vec::with_capacity(5);
    for _ in 0..5 {
        let start = pos;
        while pos < bytes.len() && bytes[pos] != b'\n' {
            pos += 1;
        }
        if pos == bytes.len() {
            return Err(Error::Parse("truncated PSRAS1 header".into()));
        }
        header.push(
            std::str::from_utf8(&bytes[start..pos])
                .map_err(|_| Error::Parse("non-UTF8 PSRAS1 header".into()))?,
        );
        pos += 1;
    }
    if header[0] != MAGIC {
        return Err(Error::Parse(format!("bad magic, expected {MAGIC}")));
    }
    let width: usize = header[1]
        .trim()
        .parse()
        .map_err(|_| Error::Parse("bad width".into()))?;
    let height: usize = header[2]
        .trim()
        .parse()
        .map_err(|_| Error::Parse("bad height".into()))?;
    let bands: usize = header[3]
        .trim()
        .parse()
        .map_err(|_| Error::Parse("bad band count".into()))?;
    let pixel_size: f64 = header[4]
        .trim()
        .parse()
        .map_err(|_| Error::Parse("bad pixel size".into()))?;

    let payload = &bytes[pos..];
    let expected = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(bands))
        .and_then(|p| p.checked_mul(4))
        .ok_or_else(|| Error::Parse("dimensions overflow".into()))?;
    if payload.len() != expected {
        return Err(Error::Parse(format!(
            "payload length {} does not match header ({expected} bytes expected)",
            payload.len()
        )));
    }
    let samples: Vec<f64> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    Raster::new(width, height, bands, pixel_size, samples)
}

pub fn write_psras(path: &Path, raster: &Raster) -> Result<()> {
    fs::write(path, to_psras_bytes(raster))?;
    Ok(())
}

pub fn read_psras(path: &Path) -> Result<Raster> {
    from_psras_bytes(&fs::read(path)?)
}

/// Reads an ASCII (P2) PGM as a single-band raster with unit pixel size.
pub fn read_pgm(path: &Path) -> Result<Raster> {
    let text = fs::read_to_string(path)?;
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace())
        .map(str::to_owned)
        .collect::<Vec<_>>()
        .into_iter();
    let magic = tokens
        .next()
        .ok_or_else(|| Error::Parse("empty PGM".into()))?;
    if magic != "P2" {
        return Err(Error::Parse("only ASCII (P2) PGM is supported".into()));
    }
    let mut next_num = |what: &str| -> Result<usize> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad PGM {what}")))
    };
    let width = next_num("width")?;
    let height = next_num("height")?;
    let _maxval = next_num("maxval")?;
    let samples: Vec<f64> = (0..width * height)
        .map(|_| next_num("sample").map(|v| v as f64))
        .collect::<Result<_>>()?;
    Raster::single_band(width, height, samples)
}

/// Writes the first band as ASCII PGM, rounding and clamping samples to
/// the 16-bit range. Lossy for non-integer data.
pub fn write_pgm(path: &Path, raster: &Raster) -> Result<()> {
    if raster.bands() != 1 {
        return Err(Error::InvalidArgument(
            "PGM export supports single-band rasters only".into(),
        ));
    }
    let mut out = format!("P2\n{} {}\n65535\n", raster.width(), raster.height());
    for row in raster.band(0).chunks(raster.width()) {
        let line: Vec<String> = row
            .iter()
            .map(|&v| format!("{}", (v.round().clamp(0.0, 65535.0)) as u32))
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psras_roundtrip_is_bit_exact() {
        // f32-representable samples survive write -> read untouched
        let samples: Vec<f64> = (0..24).map(|i| (i as f32 * 0.5 + 1.25) as f64).collect();
        let raster = Raster::new(4, 3, 2, 0.5, samples).unwrap();
        let bytes = to_psras_bytes(&raster);
        let back = from_psras_bytes(&bytes).unwrap();
        assert_eq!(back, raster);
        // and the byte stream itself is a fixed point
        assert_eq!(to_psras_bytes(&back), bytes);
    }

    #[test]
    fn psras_rejects_corrupt_input() {
        let raster = Raster::filled(2, 2, 1, 1.0).unwrap();
        let mut bytes = to_psras_bytes(&raster);
        bytes.pop();
        assert!(from_psras_bytes(&bytes).is_err());
        bytes[0] = b'X';
        assert!(from_psras_bytes(&bytes).is_err());
    }

    #[test]
    fn pgm_import() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.pgm");
        std::fs::write(&path, "P2\n# comment\n3 2\n255\n0 10 20\n30 40 50\n").unwrap();
        let raster = read_pgm(&path).unwrap();
        assert_eq!((raster.width(), raster.height(), raster.bands()), (3, 2, 1));
        assert_eq!(raster.band(0), &[0.0, 10.0, 20.0, 30.0, 40.0, 50.0]);

        let out = dir.path().join("out.pgm");
        write_pgm(&out, &raster).unwrap();
        let again = read_pgm(&out).unwrap();
        assert_eq!(again.band(0), raster.band(0));
    }
}
