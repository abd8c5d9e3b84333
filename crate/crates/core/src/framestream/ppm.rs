//! Minimal binary PPM (P6, maxval 255) reader/writer.

use super::Frame;

/// Parse a binary P6 PPM. Returns a human-readable reason on failure.
pub fn read_ppm(bytes: &[u8]) -> Result<Frame, String> {
    let mut pos = 0usize;
    let magic = take_token(bytes, &mut pos).ok_or("missing magic")?;
    if magic != b"P6" {
        return Err(format!(
            "bad magic {:?}, expected P6",
            String::from_utf8_lossy(magic)
        ));
    }
    let width: u32 = parse_int(take_token(bytes, &mut pos).ok_or("missing width")?)?;
    let height: u32 = parse_int(take_token(bytes, &mut pos).ok_or("missing height")?)?;
    let maxval: u32 = parse_int(take_token(bytes, &mut pos).ok_or("missing maxval")?)?;
    if maxval != 255 {
        return Err(format!("unsupported maxval {maxval}, expected 255"));
    }
    // exactly one whitespace byte separates the header from pixel data
    if pos >= bytes.len() {
        return Err("truncated after header".into());
    }
    pos += 1;
    let want = width as usize * height as usize * 3;
    let data = bytes
        .get(pos..pos + want)
        .ok_or_else(|| format!("pixel data truncated: need {want} bytes"))?;
    Frame::new(width, height, data.to_vec()).map_err(|e| e.to_string())
}

fn take_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    // skip whitespace and comment lines
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
    if *pos >= bytes.len() {
        return None;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    Some(&bytes[start..*pos])
}

fn parse_int(token: &[u8]) -> Result<u32, String> {
    std::str::from_utf8(token)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format!("bad integer token {:?}", String::from_utf8_lossy(token)))
}

/// Serialize a frame as binary P6.
pub fn write_ppm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend_from_slice(frame.pixels());
    out
}
