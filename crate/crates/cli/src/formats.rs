//! Vector and matrix files: little-endian binary16 payloads behind a small
//! header, or plain CSV of decimal literals.
//!
//! Binary vector: `"ESOV"`, u32 version, u32 count, then `count` u16 words.
//! Binary matrix: `"ESOM"`, u32 version, u32 rows, u32 cols, then row-major
//! u16 words. All integers little-endian. CSV writes each value as the
//! shortest decimal that reads back to the same binary16 bits.

use std::path::Path;

use essop_core::{Binary16Value, Matrix16};

use crate::error::{CliError, CliResult};

pub const VECTOR_MAGIC: &[u8; 4] = b"ESOV";
pub const MATRIX_MAGIC: &[u8; 4] = b"ESOM";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Bin,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bin" => Ok(Format::Bin),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (expected bin or csv)")),
        }
    }
}

fn bad(what: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{what}: {msg}"))
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

fn words_from(payload: &[u8]) -> Vec<Binary16Value> {
    payload
        .chunks_exact(2)
        .map(|c| Binary16Value::from_bits(u16::from_le_bytes([c[0], c[1]])))
        .collect()
}

fn push_words(out: &mut Vec<u8>, values: &[Binary16Value]) {
    for v in values {
        out.extend_from_slice(&v.to_bits().to_le_bytes());
    }
}

pub fn encode_vector_bin(values: &[Binary16Value]) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 2 * values.len());
    out.extend_from_slice(VECTOR_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(values.len() as u32).to_le_bytes());
    push_words(&mut out, values);
    out
}

pub fn decode_vector_bin(bytes: &[u8]) -> CliResult<Vec<Binary16Value>> {
    if bytes.len() < 12 || &bytes[..4] != VECTOR_MAGIC {
        return Err(bad("vector file", "missing ESOV header"));
    }
    let version = read_u32(bytes, 4);
    if version != FORMAT_VERSION {
        return Err(bad("vector file", format!("unsupported version {version}")));
    }
    let count = read_u32(bytes, 8) as usize;
    let payload = &bytes[12..];
    if payload.len() != 2 * count {
        return Err(bad("vector file", format!("header says {count} values, payload has {} bytes", payload.len())));
    }
    Ok(words_from(payload))
}

pub fn encode_matrix_bin(m: &Matrix16) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 2 * m.as_slice().len());
    out.extend_from_slice(MATRIX_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(m.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u32).to_le_bytes());
    push_words(&mut out, m.as_slice());
    out
}

pub fn decode_matrix_bin(bytes: &[u8]) -> CliResult<Matrix16> {
    if bytes.len() < 16 || &bytes[..4] != MATRIX_MAGIC {
        return Err(bad("matrix file", "missing ESOM header"));
    }
    let version = read_u32(bytes, 4);
    if version != FORMAT_VERSION {
        return Err(bad("matrix file", format!("unsupported version {version}")));
    }
    let (rows, cols) = (read_u32(bytes, 8) as usize, read_u32(bytes, 12) as usize);
    let payload = &bytes[16..];
    if payload.len() != 2 * rows * cols {
        return Err(bad("matrix file", format!("{rows}x{cols} needs {} payload bytes, found {}", 2 * rows * cols, payload.len())));
    }
    Matrix16::from_vec(rows, cols, words_from(payload)).map_err(CliError::from)
}

/// Shortest decimal that reads back to the same bits (NaN payloads collapse
/// to the canonical quiet NaN).
pub fn format_value(v: Binary16Value) -> String {
    let f = v.to_f64();
    if f.is_nan() {
        "NaN".into()
    } else if f.is_infinite() {
        if f > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        // Shortest f32 text is enough for every binary16 value.
        format!("{}", f as f32)
    }
}

pub fn parse_value(s: &str) -> CliResult<Binary16Value> {
    let t = s.trim();
    let f: f64 = t.parse().map_err(|_| bad("value", format!("`{t}` is not a number")))?;
    Ok(Binary16Value::from_f64(f))
}

fn csv_fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(',').map(str::trim).filter(|f| !f.is_empty())
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

pub fn vector_to_csv(values: &[Binary16Value]) -> String {
    let mut s: String = values.iter().map(|&v| format_value(v)).collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

/// Values separated by commas and/or newlines.
pub fn vector_from_csv(text: &str) -> CliResult<Vec<Binary16Value>> {
    data_lines(text).flat_map(csv_fields).map(parse_value).collect()
}

pub fn matrix_to_csv(m: &Matrix16) -> String {
    let mut s = String::new();
    for r in 0..m.rows() {
        s.push_str(&m.row(r).iter().map(|&v| format_value(v)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

pub fn matrix_from_csv(text: &str) -> CliResult<Matrix16> {
    let rows: Vec<Vec<Binary16Value>> = data_lines(text)
        .map(|l| csv_fields(l).map(parse_value).collect())
        .collect::<CliResult<_>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(bad("matrix csv", format!("row {} has {} values, expected {cols}", i + 1, r.len())));
    }
    Matrix16::from_vec(rows.len(), cols, rows.concat()).map_err(CliError::from)
}

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| bad(&path.display().to_string(), e))
}

/// Reads either format, detected by the magic bytes.
pub fn read_vector(path: &Path) -> CliResult<Vec<Binary16Value>> {
    let bytes = read_file(path)?;
    let ctx = |e: CliError| bad(&path.display().to_string(), e);
    if bytes.starts_with(VECTOR_MAGIC) {
        return decode_vector_bin(&bytes).map_err(ctx);
    }
    let text = String::from_utf8(bytes).map_err(|_| bad(&path.display().to_string(), "neither ESOV nor UTF-8 CSV"))?;
    vector_from_csv(&text).map_err(ctx)
}

pub fn read_matrix(path: &Path) -> CliResult<Matrix16> {
    let bytes = read_file(path)?;
    let ctx = |e: CliError| bad(&path.display().to_string(), e);
    if bytes.starts_with(MATRIX_MAGIC) {
        return decode_matrix_bin(&bytes).map_err(ctx);
    }
    let text = String::from_utf8(bytes).map_err(|_| bad(&path.display().to_string(), "neither ESOM nor UTF-8 CSV"))?;
    matrix_from_csv(&text).map_err(ctx)
}

pub fn write_vector(path: &Path, values: &[Binary16Value], format: Format) -> CliResult<()> {
    let bytes = match format {
        Format::Bin => encode_vector_bin(values),
        Format::Csv => vector_to_csv(values).into_bytes(),
    };
    std::fs::write(path, bytes).map_err(|e| bad(&path.display().to_string(), e))
}

pub fn write_matrix(path: &Path, m: &Matrix16, format: Format) -> CliResult<()> {
    let bytes = match format {
        Format::Bin => encode_matrix_bin(m),
        Format::Csv => matrix_to_csv(m).into_bytes(),
    };
    std::fs::write(path, bytes).map_err(|e| bad(&path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_non_nan() -> impl Iterator<Item = Binary16Value> {
        (0..=u16::MAX).map(Binary16Value::from_bits).filter(|v| !v.is_nan())
    }

    #[test]
    fn csv_text_round_trips_every_word() {
        for v in all_non_nan() {
            let back = parse_value(&format_value(v)).unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{}", format_value(v));
        }
        assert!(parse_value(&format_value(Binary16Value::NAN)).unwrap().is_nan());
    }

    #[test]
    fn vector_bin_layout() {
        let v = [Binary16Value::ONE, Binary16Value::from_f64(-2.0)];
        let b = encode_vector_bin(&v);
        assert_eq!(b, [b'E', b'S', b'O', b'V', 1, 0, 0, 0, 2, 0, 0, 0, 0x00, 0x3C, 0x00, 0xC0]);
        assert_eq!(decode_vector_bin(&b).unwrap(), v);
        assert!(decode_vector_bin(&b[..15]).is_err());
        let mut wrong = b.clone();
        wrong[4] = 2;
        assert!(decode_vector_bin(&wrong).is_err());
    }

    #[test]
    fn matrix_bin_and_csv_round_trip() {
        let words: Vec<Binary16Value> = all_non_nan().step_by(4099).take(12).collect();
        let m = Matrix16::from_vec(3, 4, words).unwrap();
        let b = encode_matrix_bin(&m);
        assert_eq!(b.len(), 16 + 2 * 12);
        assert_eq!(decode_matrix_bin(&b).unwrap(), m);
        let back = matrix_from_csv(&matrix_to_csv(&m)).unwrap();
        assert_eq!(back.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(), m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn ragged_csv_is_rejected() {
        assert!(matrix_from_csv("1,2\n3\n").is_err());
        assert!(vector_from_csv("1,x").is_err());
        assert_eq!(vector_from_csv("# comment\n1, 2\n3\n").unwrap().len(), 3);
    }

    #[test]
    fn files_detect_format() {
        let dir = tempfile::tempdir().unwrap();
        let v = vec![Binary16Value::from_f64(0.3), Binary16Value::NEG_ZERO];
        for (name, fmt) in [("v.bin", Format::Bin), ("v.csv", Format::Csv)] {
            let p = dir.path().join(name);
            write_vector(&p, &v, fmt).unwrap();
            let back = read_vector(&p).unwrap();
            assert_eq!(back.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), vec![v[0].to_bits(), 0x8000]);
        }
        assert!(read_vector(&dir.path().join("missing")).is_err());
    }

    proptest::proptest! {
        #[test]
        fn vector_round_trip(bits in proptest::collection::vec(0u16..0x7C00, 0..40), neg in proptest::collection::vec(proptest::bool::ANY, 40)) {
            let v: Vec<Binary16Value> = bits.iter().zip(&neg).map(|(&b, &n)| Binary16Value::from_bits(b | ((n as u16) << 15))).collect();
            proptest::prop_assert_eq!(&decode_vector_bin(&encode_vector_bin(&v)).unwrap(), &v);
            let csv: Vec<u16> = vector_from_csv(&vector_to_csv(&v)).unwrap().iter().map(|x| x.to_bits()).collect();
            proptest::prop_assert_eq!(csv, v.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        }
    }
}
