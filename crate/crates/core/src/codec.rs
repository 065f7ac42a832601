//! NPY v1.0 reading and writing for little-endian `f32`, C-order tensors.
//!
//! Only that subset is accepted; every other header is a format error that
//! names the offending field.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{element_count, LatentVector, Tensor};

const MAGIC: &[u8; 6] = b"\x93NUMPY";
const PREAMBLE: usize = 10;
const ALIGN: usize = 64;
const DESCR: &str = "<f4";

fn format_err(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Format {
        field,
        reason: reason.into(),
    }
}

/// Serializes a tensor to NPY bytes.
pub fn encode_npy(v: &Tensor) -> Result<Vec<u8>> {
    element_count(v.shape())?;
    let dims = match v.shape() {
        [d] => format!("({d},)"),
        dims => format!("({})", dims.iter().map(usize::to_string).collect::<Vec<_>>().join(", ")),
    };
    let mut header = format!("{{'descr': '{DESCR}', 'fortran_order': False, 'shape': {dims}, }}");
    let unpadded = PREAMBLE + header.len() + 1;
    header.extend(std::iter::repeat_n(' ', unpadded.next_multiple_of(ALIGN) - unpadded));
    header.push('\n');
    let header_len = u16::try_from(header.len()).map_err(|_| format_err("shape", "header exceeds 65535 bytes"))?;

    let mut out = Vec::with_capacity(PREAMBLE + header.len() + 4 * v.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&header_len.to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    for x in v.data() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    Ok(out)
}

/// Parses NPY bytes into a tensor.
pub fn decode_npy(bytes: &[u8]) -> Result<LatentVector> {
    if bytes.len() < PREAMBLE || &bytes[..6] != MAGIC {
        return Err(format_err("magic", "missing \\x93NUMPY prefix"));
    }
    if bytes[6..8] != [1, 0] {
        return Err(format_err("version", format!("unsupported {}.{}", bytes[6], bytes[7])));
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let body = PREAMBLE + header_len;
    if bytes.len() < body {
        return Err(format_err("header_len", format!("{header_len} exceeds file size")));
    }
    if !body.is_multiple_of(ALIGN) {
        return Err(format_err(
            "header_len",
            format!("header end {body} is not 64-byte aligned"),
        ));
    }
    let header = std::str::from_utf8(&bytes[PREAMBLE..body])
        .ok()
        .filter(|h| h.is_ascii())
        .ok_or_else(|| format_err("header", "not ASCII"))?;
    if !header.ends_with('\n') {
        return Err(format_err("header", "not newline-terminated"));
    }
    let shape = parse_header(header)?;
    let n = element_count(&shape).map_err(|e| format_err("shape", e.to_string()))?;

    let payload = &bytes[body..];
    if Some(payload.len()) != n.checked_mul(4) {
        return Err(format_err(
            "payload",
            format!(
                "expected {} bytes for shape {shape:?}, found {}",
                n.saturating_mul(4),
                payload.len()
            ),
        ));
    }
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(format_err("payload", format!("element {i} is not finite")));
    }
    Ok(Tensor::from_parts_unchecked(data, shape))
}

pub fn read_npy(path: impl AsRef<Path>) -> Result<LatentVector> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_npy(&bytes)
}

pub fn write_npy(v: &Tensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_npy(v)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Minimal parser for the Python dict literal numpy writes.
struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && (self.s[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn string(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let quote = *self.s.get(self.pos)?;
        if quote != b'\'' && quote != b'"' {
            return None;
        }
        let start = self.pos + 1;
        let len = self.s[start..].iter().position(|&b| b == quote)?;
        self.pos = start + len + 1;
        std::str::from_utf8(&self.s[start..start + len]).ok()
    }

    fn word(&mut self) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos] as char).is_ascii_alphanumeric() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("")
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.s.len()
    }
}

fn parse_header(header: &str) -> Result<Vec<usize>> {
    let mut c = Cursor {
        s: header.as_bytes(),
        pos: 0,
    };
    if !c.eat(b'{') {
        return Err(format_err("header", "expected '{'"));
    }
    let (mut descr, mut fortran, mut shape) = (None, None, None);
    loop {
        if c.eat(b'}') {
            break;
        }
        let key = c.string().ok_or_else(|| format_err("header", "expected quoted key"))?;
        if !c.eat(b':') {
            return Err(format_err("header", format!("expected ':' after '{key}'")));
        }
        match key {
            "descr" if descr.is_none() => {
                descr = Some(c.string().ok_or_else(|| format_err("descr", "expected string"))?);
            }
            "fortran_order" if fortran.is_none() => {
                fortran = Some(match c.word() {
                    "False" => false,
                    "True" => true,
                    other => return Err(format_err("fortran_order", format!("invalid value '{other}'"))),
                });
            }
            "shape" if shape.is_none() => shape = Some(parse_shape_tuple(&mut c)?),
            "descr" | "fortran_order" | "shape" => {
                return Err(format_err("header", format!("duplicate key '{key}'")));
            }
            other => return Err(format_err("header", format!("unknown key '{other}'"))),
        }
        if c.eat(b'}') {
            break;
        }
        if !c.eat(b',') {
            return Err(format_err("header", "expected ',' or '}'"));
        }
    }
    if !c.at_end() {
        return Err(format_err("header", "trailing characters after dict"));
    }
    match descr {
        Some(DESCR) => {}
        Some(d) => return Err(format_err("descr", format!("unsupported dtype '{d}', only '{DESCR}'"))),
        None => return Err(format_err("descr", "missing")),
    }
    match fortran {
        Some(false) => {}
        Some(true) => return Err(format_err("fortran_order", "Fortran order is not supported")),
        None => return Err(format_err("fortran_order", "missing")),
    }
    shape.ok_or_else(|| format_err("shape", "missing"))
}

fn parse_shape_tuple(c: &mut Cursor<'_>) -> Result<Vec<usize>> {
    if !c.eat(b'(') {
        return Err(format_err("shape", "expected tuple"));
    }
    let mut dims = Vec::new();
    loop {
        if c.eat(b')') {
            break;
        }
        let w = c.word();
        let d: usize = w
            .parse()
            .ok()
            .filter(|_| w.bytes().all(|b| b.is_ascii_digit()))
            .ok_or_else(|| format_err("shape", format!("invalid dimension '{w}'")))?;
        dims.push(d);
        if c.eat(b')') {
            // A one-element tuple must carry its trailing comma.
            if dims.len() == 1 {
                return Err(format_err("shape", "one-element tuple without trailing comma"));
            }
            break;
        }
        if !c.eat(b',') {
            return Err(format_err("shape", "expected ',' or ')'"));
        }
    }
    Ok(dims)
}
