use std::fs::File;
use std::io::{BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use super::{io_error, DataError};

/// Duration in seconds from the `fmt ` byte rate and the `data` chunk size.
/// No samples are decoded.
pub fn read_wav_duration(path: &Path) -> Result<f64, DataError> {
    let file = File::open(path).map_err(io_error(path))?;
    wav_duration_from_reader(BufReader::new(file), path)
}

pub fn wav_duration_from_reader<R: Read + Seek>(mut r: R, path: &Path) -> Result<f64, DataError> {
    let err = |e| io_error(PathBuf::from(path))(e);
    let mut riff = [0u8; 12];
    if r.read_exact(&mut riff).is_err() || &riff[0..4] != b"RIFF" || &riff[8..12] != b"WAVE" {
        return Err(DataError::NotRiff(path.into()));
    }

    let mut byte_rate = None;
    let mut data_len = None;
    let mut header = [0u8; 8];
    while byte_rate.is_none() || data_len.is_none() {
        if r.read_exact(&mut header).is_err() {
            break;
        }
        let size = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes"));
        let padded = i64::from(size) + i64::from(size & 1);
        match &header[0..4] {
            b"fmt " => {
                if size < 16 {
                    return Err(DataError::MissingChunk {
                        path: path.into(),
                        chunk: "fmt ",
                    });
                }
                let mut fmt = [0u8; 16];
                r.read_exact(&mut fmt).map_err(err)?;
                byte_rate = Some(u32::from_le_bytes(fmt[8..12].try_into().expect("4 bytes")));
                r.seek(SeekFrom::Current(padded - 16)).map_err(err)?;
            }
            b"data" => {
                data_len = Some(size);
                r.seek(SeekFrom::Current(padded)).map_err(err)?;
            }
            _ => {
                r.seek(SeekFrom::Current(padded)).map_err(err)?;
            }
        }
    }

    let byte_rate = byte_rate.ok_or(DataError::MissingChunk {
        path: path.into(),
        chunk: "fmt ",
    })?;
    let data_len = data_len.ok_or(DataError::MissingChunk {
        path: path.into(),
        chunk: "data",
    })?;
    if byte_rate == 0 {
        return Err(DataError::ZeroByteRate(path.into()));
    }
    Ok(f64::from(data_len) / f64::from(byte_rate))
}

/// Writes a silent PCM file of the given shape. `duration` is rounded down
/// to whole sample frames.
pub fn write_wav_stub(
    path: &Path,
    duration: f64,
    sample_rate: u32,
    channels: u16,
    bits_per_sample: u16,
) -> Result<(), DataError> {
    let block_align = u32::from(channels) * u32::from(bits_per_sample / 8);
    let frames = (duration * f64::from(sample_rate)).floor() as u32;
    let data_len = frames * block_align;
    let silence = if bits_per_sample == 8 { 0x80 } else { 0x00 };

    let mut buf = Vec::with_capacity(44 + data_len as usize);
    buf.extend_from_slice(b"RIFF");
    buf.extend_from_slice(&(36 + data_len).to_le_bytes());
    buf.extend_from_slice(b"WAVEfmt ");
    buf.extend_from_slice(&16u32.to_le_bytes());
    buf.extend_from_slice(&1u16.to_le_bytes());
    buf.extend_from_slice(&channels.to_le_bytes());
    buf.extend_from_slice(&sample_rate.to_le_bytes());
    buf.extend_from_slice(&(sample_rate * block_align).to_le_bytes());
    buf.extend_from_slice(&(block_align as u16).to_le_bytes());
    buf.extend_from_slice(&bits_per_sample.to_le_bytes());
    buf.extend_from_slice(b"data");
    buf.extend_from_slice(&data_len.to_le_bytes());
    buf.resize(44 + data_len as usize, silence);

    let mut f = File::create(path).map_err(io_error(path))?;
    f.write_all(&buf).map_err(io_error(path))
}
