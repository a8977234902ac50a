//! Portable artifacts: little-endian binary arrays, PGM previews and CSV
//! profiles. Every file is written to a temporary sibling and renamed.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexField2D, Grid2D, RealField2D};
use crate::measure::FrameStack;

pub const COMPLEX_MAGIC: &[u8; 4] = b"BPF1";
pub const REAL_MAGIC: &[u8; 4] = b"BPR1";
pub const FRAMES_MAGIC: &[u8; 4] = b"BPB1";

/// Floor of the log preview, relative to the maximum.
pub const LOG_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct RealArray {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexArray {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<Complex64>,
}

impl RealArray {
    pub fn into_field(self, grid: Grid2D) -> Result<RealField2D> {
        check_square(self.rows, self.cols, &grid)?;
        RealField2D::new(grid, self.values)
    }
}

impl ComplexArray {
    pub fn into_field(self, grid: Grid2D) -> Result<ComplexField2D> {
        check_square(self.rows, self.cols, &grid)?;
        ComplexField2D::new(grid, self.values)
    }
}

fn check_square(rows: usize, cols: usize, grid: &Grid2D) -> Result<()> {
    if rows != grid.n() || cols != grid.n() {
        return Err(Error::Format(format!(
            "array is {rows}x{cols}, grid expects {0}x{0}",
            grid.n()
        )));
    }
    Ok(())
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn dim(v: usize) -> Result<[u8; 4]> {
    u32::try_from(v)
        .map(u32::to_le_bytes)
        .map_err(|_| Error::Format(format!("dimension {v} does not fit in u32")))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8], magic: &[u8; 4]) -> Result<Self> {
        if bytes.len() < 4 || &bytes[..4] != magic {
            return Err(Error::Format(format!(
                "expected magic {}",
                String::from_utf8_lossy(magic)
            )));
        }
        Ok(Self { bytes, pos: 4 })
    }

    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < k {
            return Err(Error::Format("truncated file".into()));
        }
        let s = &self.bytes[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Format("trailing bytes after payload".into()));
        }
        Ok(())
    }
}

pub fn encode_real(rows: usize, cols: usize, values: &[f64]) -> Result<Vec<u8>> {
    if values.len() != rows * cols {
        return Err(Error::InvalidArgument("value count does not match shape".into()));
    }
    let mut out = Vec::with_capacity(12 + 8 * values.len());
    out.extend_from_slice(REAL_MAGIC);
    out.extend_from_slice(&dim(rows)?);
    out.extend_from_slice(&dim(cols)?);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_real(bytes: &[u8]) -> Result<RealArray> {
    let mut r = Reader::new(bytes, REAL_MAGIC)?;
    let rows = r.u32()?;
    let cols = r.u32()?;
    let values = (0..rows * cols).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    r.finish()?;
    Ok(RealArray { rows, cols, values })
}

pub fn encode_complex(rows: usize, cols: usize, values: &[Complex64]) -> Result<Vec<u8>> {
    if values.len() != rows * cols {
        return Err(Error::InvalidArgument("value count does not match shape".into()));
    }
    let mut out = Vec::with_capacity(12 + 16 * values.len());
    out.extend_from_slice(COMPLEX_MAGIC);
    out.extend_from_slice(&dim(rows)?);
    out.extend_from_slice(&dim(cols)?);
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_complex(bytes: &[u8]) -> Result<ComplexArray> {
    let mut r = Reader::new(bytes, COMPLEX_MAGIC)?;
    let rows = r.u32()?;
    let cols = r.u32()?;
    let values = (0..rows * cols)
        .map(|_| Ok(Complex64::new(r.f64()?, r.f64()?)))
        .collect::<Result<Vec<_>>>()?;
    r.finish()?;
    Ok(ComplexArray { rows, cols, values })
}

pub fn encode_frames(stack: &FrameStack) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(16 + stack.bits().len());
    out.extend_from_slice(FRAMES_MAGIC);
    out.extend_from_slice(&dim(stack.frames())?);
    out.extend_from_slice(&dim(stack.rows())?);
    out.extend_from_slice(&dim(stack.cols())?);
    out.extend_from_slice(stack.bits());
    Ok(out)
}

/// The seed is not part of the binary format; it travels in the sidecar.
pub fn decode_frames(bytes: &[u8], seed: u64) -> Result<FrameStack> {
    let mut r = Reader::new(bytes, FRAMES_MAGIC)?;
    let frames = r.u32()?;
    let rows = r.u32()?;
    let cols = r.u32()?;
    let bits = r.take(frames * rows * cols.div_ceil(8))?.to_vec();
    r.finish()?;
    FrameStack::from_bits(frames, rows, cols, seed, bits)
}

pub fn dump_real(field: &RealField2D, path: &Path) -> Result<()> {
    let n = field.grid().n();
    write_atomic(path, &encode_real(n, n, field.values())?)
}

pub fn dump_complex(field: &ComplexField2D, path: &Path) -> Result<()> {
    let n = field.grid().n();
    write_atomic(path, &encode_complex(n, n, field.values())?)
}

pub fn dump_frames(stack: &FrameStack, path: &Path) -> Result<()> {
    write_atomic(path, &encode_frames(stack)?)
}

pub fn load_real(path: &Path) -> Result<RealArray> {
    decode_real(&fs::read(path)?)
}

pub fn load_complex(path: &Path) -> Result<ComplexArray> {
    decode_complex(&fs::read(path)?)
}

pub fn load_frames(path: &Path, seed: u64) -> Result<FrameStack> {
    decode_frames(&fs::read(path)?, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreviewScale {
    Linear,
    Log,
}

/// 8-bit P5 image, min-max scaled. A constant field renders mid-gray; an
/// all-zero field renders black and logs a warning.
pub fn render_preview(rows: usize, cols: usize, values: &[f64], scale: PreviewScale) -> Result<Vec<u8>> {
    if values.len() != rows * cols {
        return Err(Error::InvalidArgument("value count does not match shape".into()));
    }
    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidArgument("preview needs a finite non-negative field".into()));
    }
    let max = values.iter().copied().fold(0.0f64, f64::max);
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    if max == 0.0 {
        log::warn!("preview of an all-zero field is uniformly black");
        out.resize(out.len() + values.len(), 0);
        return Ok(out);
    }
    let mapped: Vec<f64> = match scale {
        PreviewScale::Linear => values.to_vec(),
        PreviewScale::Log => values.iter().map(|v| v.max(LOG_FLOOR * max).log10()).collect(),
    };
    let lo = mapped.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = mapped.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        out.resize(out.len() + values.len(), 128);
        return Ok(out);
    }
    out.extend(mapped.iter().map(|v| ((v - lo) / (hi - lo) * 255.0).round() as u8));
    Ok(out)
}

pub fn write_preview(field: &RealField2D, path: &Path, scale: PreviewScale) -> Result<()> {
    let n = field.grid().n();
    write_atomic(path, &render_preview(n, n, field.values(), scale)?)
}

/// `radius,value` rows in shortest round-trip decimal form.
pub fn profile_csv(radius: &[f64], value: &[f64]) -> Result<String> {
    if radius.len() != value.len() {
        return Err(Error::InvalidArgument("profile columns differ in length".into()));
    }
    let mut s = String::from("radius,value\n");
    for (r, v) in radius.iter().zip(value) {
        s.push_str(&format!("{r:?},{v:?}\n"));
    }
    Ok(s)
}

pub fn write_profile_csv(radius: &[f64], value: &[f64], path: &Path) -> Result<()> {
    write_atomic(path, profile_csv(radius, value)?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Domain};
    use proptest::prelude::*;

    fn pixels(img: &[u8]) -> &[u8] {
        // header is three newline-terminated lines
        let mut seen = 0;
        let start = img
            .iter()
            .position(|b| {
                seen += (*b == b'\n') as usize;
                seen == 3
            })
            .unwrap();
        &img[start + 1..]
    }

    #[test]
    fn header_layout() {
        let b = encode_real(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(&b[..4], b"BPR1");
        assert_eq!(&b[4..8], &[2, 0, 0, 0]);
        assert_eq!(&b[8..12], &[3, 0, 0, 0]);
        assert_eq!(&b[12..20], &1.0f64.to_le_bytes());
        assert_eq!(b.len(), 12 + 48);
    }

    #[test]
    fn corrupted_magic_and_truncation() {
        let mut b = encode_complex(1, 1, &[Complex64::new(1.0, 2.0)]).unwrap();
        assert!(matches!(decode_complex(&b[..b.len() - 1]), Err(Error::Format(_))));
        b[0] = b'X';
        assert!(matches!(decode_complex(&b), Err(Error::Format(_))));
        assert!(matches!(decode_real(b"BPR"), Err(Error::Format(_))));
        let r = encode_real(1, 1, &[0.5]).unwrap();
        assert!(matches!(decode_complex(&r), Err(Error::Format(_))));
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = make_grid(8, 1e-4, Domain::Position).unwrap();
        let f = ComplexField2D::from_fn(g, |x, y| Complex64::new(x * 1e3, -y / 3.0));
        let p = dir.path().join("f.bpf");
        dump_complex(&f, &p).unwrap();
        let back = load_complex(&p).unwrap().into_field(g).unwrap();
        assert_eq!(back, f);
        assert!(load_complex(&p).unwrap().into_field(make_grid(16, 1e-4, Domain::Position).unwrap()).is_err());
        let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }

    #[test]
    fn frames_round_trip() {
        let bits: Vec<u8> = (0..3 * 5 * 2).map(|i| (i * 37 % 256) as u8).collect();
        let s = FrameStack::from_bits(3, 5, 10, 9, bits).unwrap();
        let back = decode_frames(&encode_frames(&s).unwrap(), 9).unwrap();
        assert_eq!(back, s);
        let mut b = encode_frames(&s).unwrap();
        b.pop();
        assert!(decode_frames(&b, 9).is_err());
    }

    #[test]
    fn constant_field_is_mid_gray() {
        for scale in [PreviewScale::Linear, PreviewScale::Log] {
            let img = render_preview(4, 4, &[3.0; 16], scale).unwrap();
            assert!(img.starts_with(b"P5\n4 4\n255\n"));
            assert!(pixels(&img).iter().all(|p| *p == 128));
        }
        let black = render_preview(2, 2, &[0.0; 4], PreviewScale::Log).unwrap();
        assert!(pixels(&black).iter().all(|p| *p == 0));
        assert!(render_preview(2, 2, &[0.0, -1.0, 0.0, 0.0], PreviewScale::Linear).is_err());
    }

    #[test]
    fn log_scale_lifts_weak_values() {
        let v = [1.0, 1e-3, 1e-9, 0.5];
        let lin = render_preview(1, 4, &v, PreviewScale::Linear).unwrap();
        let log = render_preview(1, 4, &v, PreviewScale::Log).unwrap();
        assert_eq!(pixels(&lin), &[255, 0, 0, 127]);
        // 1e-3 sits halfway between the floor and the maximum in decades
        assert_eq!(pixels(&log), &[255, 128, 0, 242]);
    }

    #[test]
    fn csv_layout() {
        let s = profile_csv(&[0.0, 1.5], &[1e-20, 2.0]).unwrap();
        assert_eq!(s, "radius,value\n0.0,1e-20\n1.5,2.0\n");
        for line in s.lines().skip(1) {
            for x in line.split(',') {
                x.parse::<f64>().unwrap();
            }
        }
    }

    proptest! {
        #[test]
        fn real_bytes_round_trip(values in proptest::collection::vec(any::<f64>(), 6)) {
            let b = encode_real(2, 3, &values).unwrap();
            let back = decode_real(&b).unwrap();
            prop_assert_eq!(back.rows, 2);
            for (a, c) in values.iter().zip(&back.values) {
                prop_assert_eq!(a.to_bits(), c.to_bits());
            }
        }
    }
}
