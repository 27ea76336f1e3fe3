//! The IDX container used by the MNIST files: a big-endian magic number,
//! big-endian u32 dimensions, then an unsigned-byte payload.

use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const IMAGE_SIDE: usize = 28;

fn idx_error(source_name: &str, reason: impl Into<String>) -> Error {
    Error::Idx {
        source_name: source_name.to_string(),
        reason: reason.into(),
    }
}

fn read_u32(bytes: &[u8], offset: usize, source_name: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| idx_error(source_name, "header is truncated"))
}

pub(crate) fn check_magic(bytes: &[u8], expected: u32, source_name: &str) -> Result<()> {
    let magic = read_u32(bytes, 0, source_name)?;
    if magic != expected {
        return Err(idx_error(
            source_name,
            format!("magic 0x{magic:08x}, expected 0x{expected:08x}"),
        ));
    }
    Ok(())
}

fn payload<'a>(bytes: &'a [u8], header: usize, len: usize, source_name: &str) -> Result<&'a [u8]> {
    let body = &bytes[header..];
    if body.len() != len {
        return Err(idx_error(
            source_name,
            format!("payload has {} bytes, header promises {len}", body.len()),
        ));
    }
    Ok(body)
}

/// Parses an image file into (count, row-major 28×28 pixel bytes).
pub fn parse_images(bytes: &[u8], source_name: &str) -> Result<(usize, Vec<u8>)> {
    check_magic(bytes, IMAGE_MAGIC, source_name)?;
    let count = read_u32(bytes, 4, source_name)? as usize;
    let rows = read_u32(bytes, 8, source_name)? as usize;
    let cols = read_u32(bytes, 12, source_name)? as usize;
    if rows != IMAGE_SIDE || cols != IMAGE_SIDE {
        return Err(idx_error(
            source_name,
            format!("images are {rows}x{cols}, expected {IMAGE_SIDE}x{IMAGE_SIDE}"),
        ));
    }
    let pixels = payload(bytes, 16, count * rows * cols, source_name)?;
    Ok((count, pixels.to_vec()))
}

pub fn parse_labels(bytes: &[u8], source_name: &str) -> Result<Vec<u8>> {
    check_magic(bytes, LABEL_MAGIC, source_name)?;
    let count = read_u32(bytes, 4, source_name)? as usize;
    let labels = payload(bytes, 8, count, source_name)?;
    if let Some(bad) = labels.iter().find(|&&l| l > 9) {
        return Err(idx_error(
            source_name,
            format!("label {bad} is not a digit"),
        ));
    }
    Ok(labels.to_vec())
}

pub fn encode_images(count: usize, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), count * IMAGE_SIDE * IMAGE_SIDE);
    let mut out = Vec::with_capacity(16 + pixels.len());
    for word in [
        IMAGE_MAGIC,
        count as u32,
        IMAGE_SIDE as u32,
        IMAGE_SIDE as u32,
    ] {
        out.extend_from_slice(&word.to_be_bytes());
    }
    out.extend_from_slice(pixels);
    out
}

pub fn encode_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_big_endian() {
        let bytes = encode_labels(&[3, 1]);
        assert_eq!(&bytes[..8], &[0, 0, 8, 1, 0, 0, 0, 2]);
        assert_eq!(parse_labels(&bytes, "l").unwrap(), vec![3, 1]);
    }

    #[test]
    fn wrong_magic() {
        let mut bytes = encode_labels(&[1]);
        bytes[3] = 0x02;
        assert!(matches!(parse_labels(&bytes, "l"), Err(Error::Idx { .. })));
        // an image file is not a label file
        let img = encode_images(1, &[0; 784]);
        assert!(parse_labels(&img, "l").is_err());
        assert!(parse_images(&encode_labels(&[1]), "i").is_err());
    }

    #[test]
    fn truncation_detected() {
        let img = encode_images(2, &[7; 2 * 784]);
        assert!(parse_images(&img[..img.len() - 1], "i").is_err());
        assert!(parse_images(&img[..10], "i").is_err());
        assert!(parse_labels(&[0, 0, 8], "l").is_err());
    }

    #[test]
    fn rejects_non_digit_labels() {
        assert!(parse_labels(&encode_labels(&[10]), "l").is_err());
    }
}
