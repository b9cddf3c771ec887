//! Binary tensor files (`.rebf`).
//!
//! Layout, all integers little-endian:
//!
//! | field   | size          | value                          |
//! |---------|---------------|--------------------------------|
//! | magic   | 4 bytes       | `REBF`                         |
//! | version | u32           | 1                              |
//! | dtype   | u8            | 0 = f32 little-endian          |
//! | ndim    | u8            | 1..=4                          |
//! | dims    | ndim x u32    | outermost first                |
//! | payload | 4 x numel     | row-major f32 values           |
//!
//! A reader consumes exactly one record, so several tensors can be
//! concatenated in one stream (bank files do this).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"REBF";
pub const FORMAT_VERSION: u32 = 1;
pub const DTYPE_F32: u8 = 0;
pub const MAX_NDIM: usize = 4;

const STREAM: &str = "<stream>";

/// Size in bytes of a header with `ndim` dimensions.
pub const fn header_len(ndim: usize) -> usize {
    4 + 4 + 1 + 1 + 4 * ndim
}

/// Parsed file header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorFileHeader {
    pub version: u32,
    pub dtype: u8,
    pub dims: Vec<usize>,
}

impl TensorFileHeader {
    pub fn numel(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn encoded_len(&self) -> usize {
        header_len(self.dims.len())
    }

    fn write_to<W: Write>(&self, sink: &mut W) -> std::io::Result<()> {
        sink.write_all(&MAGIC)?;
        sink.write_all(&self.version.to_le_bytes())?;
        sink.write_all(&[self.dtype, self.dims.len() as u8])?;
        for &d in &self.dims {
            sink.write_all(&(d as u32).to_le_bytes())?;
        }
        Ok(())
    }

    fn read_from<R: Read>(source: &mut R) -> Result<Self> {
        let mut fixed = [0u8; 10];
        read_exact_or(source, &mut fixed, "header")?;
        if fixed[..4] != MAGIC {
            return Err(Error::Format(format!(
                "bad magic: expected {:?}, found {:?}",
                String::from_utf8_lossy(&MAGIC),
                String::from_utf8_lossy(&fixed[..4])
            )));
        }
        let version = u32::from_le_bytes(fixed[4..8].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported version {version}, expected {FORMAT_VERSION}"
            )));
        }
        let dtype = fixed[8];
        if dtype != DTYPE_F32 {
            return Err(Error::Format(format!("unsupported dtype code {dtype}")));
        }
        let ndim = fixed[9] as usize;
        if ndim == 0 || ndim > MAX_NDIM {
            return Err(Error::Format(format!("ndim {ndim} outside 1..={MAX_NDIM}")));
        }
        let mut raw = vec![0u8; 4 * ndim];
        read_exact_or(source, &mut raw, "dims")?;
        let dims = raw
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as usize)
            .collect();
        Ok(Self {
            version,
            dtype,
            dims,
        })
    }
}

fn read_exact_or<R: Read>(source: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    source.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Format(format!("truncated {what}"))
        } else {
            Error::io(STREAM, e)
        }
    })
}

/// A tensor of any rank supported by the file format.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTensor {
    dims: Vec<usize>,
    data: Vec<f32>,
}

impl RawTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        if dims.is_empty() || dims.len() > MAX_NDIM {
            return Err(Error::Dimension(format!(
                "rank {} outside 1..={MAX_NDIM}",
                dims.len()
            )));
        }
        if dims.iter().any(|&d| d == 0 || d > u32::MAX as usize) {
            return Err(Error::Dimension(format!("invalid dims {dims:?}")));
        }
        let numel: usize = dims.iter().product();
        if data.len() != numel {
            return Err(Error::Length {
                expected: numel,
                actual: data.len(),
                unit: "elements",
            });
        }
        check_finite(&data)?;
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_parts(self) -> (Vec<usize>, Vec<f32>) {
        (self.dims, self.data)
    }

    pub fn header(&self) -> TensorFileHeader {
        TensorFileHeader {
            version: FORMAT_VERSION,
            dtype: DTYPE_F32,
            dims: self.dims.clone(),
        }
    }
}

fn check_finite(data: &[f32]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::Data(format!("non-finite value at element {i}"))),
        None => Ok(()),
    }
}

/// Writes one tensor record.
pub fn write_raw<W: Write>(t: &RawTensor, sink: &mut W) -> Result<()> {
    let io = |e| Error::io(STREAM, e);
    t.header().write_to(sink).map_err(io)?;
    let mut bytes = Vec::with_capacity(4 * t.data.len());
    for v in &t.data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    sink.write_all(&bytes).map_err(io)
}

/// Reads one tensor record, consuming exactly its bytes.
pub fn read_raw<R: Read>(source: &mut R) -> Result<RawTensor> {
    let header = TensorFileHeader::read_from(source)?;
    let numel = header.numel();
    let mut bytes = Vec::with_capacity(4 * numel);
    source
        .take(4 * numel as u64)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(STREAM, e))?;
    if bytes.len() != 4 * numel {
        return Err(Error::Length {
            expected: numel,
            actual: bytes.len() / 4,
            unit: "payload elements",
        });
    }
    let data: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    check_finite(&data)?;
    Ok(RawTensor {
        dims: header.dims,
        data,
    })
}

/// A `channels x height x width` activation block, channel-outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl FeatureTensor {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        let raw = RawTensor::new(vec![channels, height, width], data)?;
        let (_, data) = raw.into_parts();
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    /// A tensor filled with one value.
    pub fn filled(channels: usize, height: usize, width: usize, value: f32) -> Result<Self> {
        Self::new(channels, height, width, vec![value; channels * height * width])
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn index(&self, c: usize, h: usize, w: usize) -> usize {
        (c * self.height + h) * self.width + w
    }

    pub fn get(&self, c: usize, h: usize, w: usize) -> f32 {
        self.data[self.index(c, h, w)]
    }

    /// One channel plane, `height x width` row-major.
    pub fn plane(&self, c: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }
}

impl TryFrom<RawTensor> for FeatureTensor {
    type Error = Error;

    fn try_from(raw: RawTensor) -> Result<Self> {
        match *raw.dims() {
            [c, h, w] => Ok(Self {
                channels: c,
                height: h,
                width: w,
                data: raw.into_parts().1,
            }),
            ref dims => Err(Error::Dimension(format!(
                "expected a 3-d feature tensor, found dims {dims:?}"
            ))),
        }
    }
}

impl From<&FeatureTensor> for RawTensor {
    fn from(t: &FeatureTensor) -> Self {
        RawTensor {
            dims: vec![t.channels, t.height, t.width],
            data: t.data.clone(),
        }
    }
}

pub fn write_tensor<W: Write>(t: &FeatureTensor, sink: &mut W) -> Result<()> {
    write_raw(&RawTensor::from(t), sink)
}

pub fn read_tensor<R: Read>(source: &mut R) -> Result<FeatureTensor> {
    read_raw(source)?.try_into()
}

/// Attaches `path` to stream-level I/O errors.
pub(crate) fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn write_raw_file(t: &RawTensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut sink = BufWriter::new(file);
    with_path(path, write_raw(t, &mut sink))?;
    sink.flush().map_err(|e| Error::io(path, e))
}

pub fn read_raw_file(path: impl AsRef<Path>) -> Result<RawTensor> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    with_path(path, read_raw(&mut BufReader::new(file)))
}

pub fn write_tensor_file(t: &FeatureTensor, path: impl AsRef<Path>) -> Result<()> {
    write_raw_file(&RawTensor::from(t), path)
}

pub fn read_tensor_file(path: impl AsRef<Path>) -> Result<FeatureTensor> {
    read_raw_file(path)?.try_into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn encode(t: &FeatureTensor) -> Vec<u8> {
        let mut buf = Vec::new();
        write_tensor(t, &mut buf).unwrap();
        buf
    }

    #[test]
    fn smallest_tensor_layout() {
        let t = FeatureTensor::filled(1, 1, 1, 0.0).unwrap();
        let bytes = encode(&t);
        assert_eq!(header_len(3), 22);
        assert_eq!(bytes.len(), 22 + 4);
        assert_eq!(&bytes[..4], b"REBF");
        assert_eq!(&bytes[4..8], &1u32.to_le_bytes());
        assert_eq!(bytes[8], 0);
        assert_eq!(bytes[9], 3);
        assert_eq!(&bytes[22..], &0f32.to_le_bytes());
    }

    #[test]
    fn sequential_values_keep_row_major_order() {
        let (c, h, w) = (2, 3, 4);
        let t = FeatureTensor::new(c, h, w, (0..24).map(|v| v as f32).collect()).unwrap();
        let back = read_tensor(&mut encode(&t).as_slice()).unwrap();
        // scalar loop oracle for the c*H*W + h*W + w layout
        let mut expected = 0.0f32;
        for ci in 0..c {
            for hi in 0..h {
                for wi in 0..w {
                    assert_eq!(back.get(ci, hi, wi), expected);
                    expected += 1.0;
                }
            }
        }
        assert_eq!(back.get(1, 2, 3), 23.0);
    }

    #[test]
    fn corrupted_magic_is_a_format_error() {
        let t = FeatureTensor::filled(1, 2, 2, 1.0).unwrap();
        let mut bytes = encode(&t);
        bytes[0] = b'X';
        let err = read_tensor(&mut bytes.as_slice()).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
        assert!(err.to_string().contains("REBF"), "{err}");
    }

    #[test]
    fn short_payload_reports_expected_and_actual() {
        let t = FeatureTensor::filled(1, 2, 2, 1.0).unwrap();
        let mut bytes = encode(&t);
        bytes.truncate(bytes.len() - 4);
        match read_tensor(&mut bytes.as_slice()).unwrap_err() {
            Error::Length {
                expected, actual, ..
            } => assert_eq!((expected, actual), (4, 3)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn non_finite_payload_is_a_data_error() {
        let t = FeatureTensor::filled(1, 1, 2, 1.0).unwrap();
        let mut bytes = encode(&t);
        let n = bytes.len();
        bytes[n - 4..].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(
            read_tensor(&mut bytes.as_slice()),
            Err(Error::Data(_))
        ));
        assert!(matches!(
            FeatureTensor::new(1, 1, 1, vec![f32::INFINITY]),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn bad_rank_and_version_rejected() {
        let t = FeatureTensor::filled(1, 1, 1, 0.0).unwrap();
        let mut bytes = encode(&t);
        bytes[4] = 2;
        assert!(matches!(
            read_tensor(&mut bytes.as_slice()),
            Err(Error::Format(_))
        ));
        let mut bytes = encode(&t);
        bytes[9] = 5;
        assert!(matches!(
            read_tensor(&mut bytes.as_slice()),
            Err(Error::Format(_))
        ));
        assert!(RawTensor::new(vec![1, 1, 1, 1, 1], vec![0.0]).is_err());
    }

    #[test]
    fn consecutive_records_in_one_stream() {
        let a = RawTensor::new(vec![2, 3], (0..6).map(|v| v as f32).collect()).unwrap();
        let b = RawTensor::new(vec![2], vec![7.5, -1.0]).unwrap();
        let mut buf = Vec::new();
        write_raw(&a, &mut buf).unwrap();
        write_raw(&b, &mut buf).unwrap();
        let mut src = buf.as_slice();
        assert_eq!(read_raw(&mut src).unwrap(), a);
        assert_eq!(read_raw(&mut src).unwrap(), b);
        assert!(src.is_empty());
    }

    #[test]
    fn rank_mismatch_on_feature_tensor() {
        let raw = RawTensor::new(vec![4], vec![0.0; 4]).unwrap();
        assert!(matches!(
            FeatureTensor::try_from(raw),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn file_errors_carry_the_path() {
        let err = read_tensor_file("/nonexistent/dir/x.rebf").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/x.rebf"));
    }

    proptest! {
        #[test]
        fn write_read_is_bit_exact(
            dims in proptest::collection::vec(1usize..5, 1..=4),
            seed in any::<u64>(),
        ) {
            let numel: usize = dims.iter().product();
            let mut state = seed;
            let data: Vec<f32> = (0..numel)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let v = f32::from_bits((state >> 32) as u32);
                    if v.is_finite() { v } else { 0.5 }
                })
                .collect();
            let t = RawTensor::new(dims, data).unwrap();
            let mut buf = Vec::new();
            write_raw(&t, &mut buf).unwrap();
            prop_assert_eq!(buf.len(), header_len(t.dims().len()) + 4 * numel);
            let back = read_raw(&mut buf.as_slice()).unwrap();
            let a: Vec<u32> = t.data().iter().map(|v| v.to_bits()).collect();
            let b: Vec<u32> = back.data().iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(a, b);
            prop_assert_eq!(back.dims(), t.dims());
            let mut again = Vec::new();
            write_raw(&back, &mut again).unwrap();
            prop_assert_eq!(again, buf);
        }
    }
}
