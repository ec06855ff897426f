//! Minimal RIFF/WAVE reader and writer.
//!
//! Supports the containers the cohort actually produces: PCM 16-bit,
//! PCM 24-bit, and IEEE float 32-bit, any channel count. Multi-channel
//! data is averaged to mono and integer PCM is scaled to [-1, 1].

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// Reads a WAV file into a mono buffer.
///
/// Integer PCM is scaled by `1 / 2^(bits-1)`; channels are averaged.
/// The `source_id` is the file stem.
pub fn read_wav(path: &Path) -> Result<AudioBuffer> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let source_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "unknown".into());
    decode_wav(&bytes, source_id)
}

/// Decodes a WAV byte stream. Separated from file I/O for testing.
pub fn decode_wav(bytes: &[u8], source_id: String) -> Result<AudioBuffer> {
    if bytes.len() < 12 {
        return Err(Error::Parse("file shorter than RIFF header".into()));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(Error::Parse(format!(
            "bad magic {:?}, expected RIFF",
            String::from_utf8_lossy(&bytes[0..4])
        )));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(Error::Parse("RIFF form type is not WAVE".into()));
    }

    let mut fmt: Option<FmtChunk> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start.checked_add(size).filter(|&e| e <= bytes.len());
        match id {
            b"fmt " => {
                let end = body_end.ok_or_else(|| Error::Parse("fmt chunk truncated".into()))?;
                fmt = Some(FmtChunk::parse(&bytes[body_start..end])?);
            }
            b"data" => {
                let end = body_end.ok_or_else(|| Error::Parse("data chunk truncated".into()))?;
                data = Some(&bytes[body_start..end]);
            }
            _ => {
                if body_end.is_none() {
                    break; // ignore a trailing malformed ancillary chunk
                }
            }
        }
        // chunks are word-aligned
        pos = body_start + size + (size & 1);
    }

    let fmt = fmt.ok_or_else(|| Error::Parse("missing fmt chunk".into()))?;
    let data = data.ok_or_else(|| Error::Parse("missing data chunk".into()))?;
    if data.is_empty() {
        return Err(Error::EmptyAudio("data chunk has zero length".into()));
    }

    let channels = fmt.channels as usize;
    let bytes_per_sample = (fmt.bits_per_sample / 8) as usize;
    let frame_size = channels * bytes_per_sample;
    if frame_size == 0 {
        return Err(Error::Parse("zero-sized sample frame".into()));
    }
    let n_frames = data.len() / frame_size;
    if n_frames == 0 {
        return Err(Error::EmptyAudio("data chunk shorter than one frame".into()));
    }

    let mut samples = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let mut acc = 0.0f64;
        for c in 0..channels {
            let off = f * frame_size + c * bytes_per_sample;
            let raw = &data[off..off + bytes_per_sample];
            acc += match (fmt.format, fmt.bits_per_sample) {
                (FORMAT_PCM, 16) => {
                    i16::from_le_bytes([raw[0], raw[1]]) as f64 / 32768.0
                }
                (FORMAT_PCM, 24) => {
                    let v = ((raw[2] as i32) << 24 | (raw[1] as i32) << 16 | (raw[0] as i32) << 8)
                        >> 8;
                    v as f64 / 8_388_608.0
                }
                (FORMAT_IEEE_FLOAT, 32) => {
                    f32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]) as f64
                }
                _ => unreachable!("validated in FmtChunk::parse"),
            };
        }
        let s = acc / channels as f64;
        samples.push(if s.is_finite() { s } else { 0.0 });
    }

    AudioBuffer::new(samples, fmt.sample_rate, source_id)
}

struct FmtChunk {
    format: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

impl FmtChunk {
    fn parse(body: &[u8]) -> Result<Self> {
        if body.len() < 16 {
            return Err(Error::Parse("fmt chunk shorter than 16 bytes".into()));
        }
        let mut format = u16::from_le_bytes([body[0], body[1]]);
        let channels = u16::from_le_bytes([body[2], body[3]]);
        let sample_rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
        let bits_per_sample = u16::from_le_bytes([body[14], body[15]]);
        if format == FORMAT_EXTENSIBLE {
            // sub-format GUID starts with the ordinary format tag
            if body.len() >= 26 {
                format = u16::from_le_bytes([body[24], body[25]]);
            } else {
                return Err(Error::Parse("extensible fmt chunk truncated".into()));
            }
        }
        if channels == 0 {
            return Err(Error::Parse("zero channels".into()));
        }
        if sample_rate == 0 {
            return Err(Error::Parse("zero sample rate".into()));
        }
        match (format, bits_per_sample) {
            (FORMAT_PCM, 16) | (FORMAT_PCM, 24) | (FORMAT_IEEE_FLOAT, 32) => Ok(Self {
                format,
                channels,
                sample_rate,
                bits_per_sample,
            }),
            _ => Err(Error::UnsupportedFormat(format!(
                "format tag {format}, {bits_per_sample} bits"
            ))),
        }
    }
}

/// Writes a buffer as IEEE float-32 WAV.
pub fn write_wav_f32(path: &Path, buf: &AudioBuffer) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let n = buf.samples.len() as u32;
    write_header(&mut w, FORMAT_IEEE_FLOAT, 32, buf.sample_rate, n * 4)?;
    for &s in &buf.samples {
        w.write_all(&(s as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a buffer as PCM 16-bit WAV, clamping to [-1, 1].
pub fn write_wav_i16(path: &Path, buf: &AudioBuffer) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let n = buf.samples.len() as u32;
    write_header(&mut w, FORMAT_PCM, 16, buf.sample_rate, n * 2)?;
    for &s in &buf.samples {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn write_header<W: Write>(
    w: &mut W,
    format: u16,
    bits: u16,
    rate: u32,
    data_len: u32,
) -> Result<()> {
    let byte_rate = rate * (bits as u32 / 8);
    let block_align = bits / 8;
    w.write_all(b"RIFF")?;
    w.write_all(&(36 + data_len).to_le_bytes())?;
    w.write_all(b"WAVE")?;
    w.write_all(b"fmt ")?;
    w.write_all(&16u32.to_le_bytes())?;
    w.write_all(&format.to_le_bytes())?;
    w.write_all(&1u16.to_le_bytes())?; // mono
    w.write_all(&rate.to_le_bytes())?;
    w.write_all(&byte_rate.to_le_bytes())?;
    w.write_all(&block_align.to_le_bytes())?;
    w.write_all(&bits.to_le_bytes())?;
    w.write_all(b"data")?;
    w.write_all(&data_len.to_le_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(freq: f64, rate: u32, seconds: f64) -> Vec<f64> {
        let n = (seconds * rate as f64).round() as usize;
        (0..n)
            .map(|i| (2.0 * PI * freq * i as f64 / rate as f64).sin() * 0.8)
            .collect()
    }

    #[test]
    fn silence_roundtrip_pcm16() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("silence.wav");
        let buf = AudioBuffer::new(vec![0.0; 16_000], 16_000, "silence").unwrap();
        write_wav_i16(&path, &buf).unwrap();
        let read = read_wav(&path).unwrap();
        assert_eq!(read.sample_rate, 16_000);
        assert_eq!(read.samples.len(), 16_000);
        assert!(read.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn float32_sine_roundtrip_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sine.wav");
        let samples = sine(440.0, 16_000, 1.0);
        let buf = AudioBuffer::new(samples.clone(), 16_000, "sine").unwrap();
        write_wav_f32(&path, &buf).unwrap();
        let read = read_wav(&path).unwrap();
        // one f32 quantization step around |s| <= 1
        let step = f32::EPSILON as f64;
        for (a, b) in samples.iter().zip(&read.samples) {
            assert!((a - b).abs() <= step, "{a} vs {b}");
        }
    }

    #[test]
    fn pcm16_roundtrip_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sine16.wav");
        let samples = sine(220.0, 8_000, 0.5);
        let buf = AudioBuffer::new(samples.clone(), 8_000, "sine16").unwrap();
        write_wav_i16(&path, &buf).unwrap();
        let read = read_wav(&path).unwrap();
        assert_eq!(read.sample_rate, 8_000);
        for (a, b) in samples.iter().zip(&read.samples) {
            assert!((a - b).abs() <= 1.0 / 32768.0);
        }
    }

    #[test]
    fn pcm24_decodes_with_scaling() {
        // hand-build a mono PCM24 file holding the two extreme codes and zero
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"RIFF");
        bytes.extend_from_slice(&(36u32 + 9).to_le_bytes());
        bytes.extend_from_slice(b"WAVE");
        bytes.extend_from_slice(b"fmt ");
        bytes.extend_from_slice(&16u32.to_le_bytes());
        bytes.extend_from_slice(&FORMAT_PCM.to_le_bytes());
        bytes.extend_from_slice(&1u16.to_le_bytes());
        bytes.extend_from_slice(&16_000u32.to_le_bytes());
        bytes.extend_from_slice(&48_000u32.to_le_bytes());
        bytes.extend_from_slice(&3u16.to_le_bytes());
        bytes.extend_from_slice(&24u16.to_le_bytes());
        bytes.extend_from_slice(b"data");
        bytes.extend_from_slice(&9u32.to_le_bytes());
        bytes.extend_from_slice(&[0xFF, 0xFF, 0x7F]); // +8388607
        bytes.extend_from_slice(&[0x00, 0x00, 0x80]); // -8388608
        bytes.extend_from_slice(&[0x00, 0x00, 0x00]); // 0
        let buf = decode_wav(&bytes, "p24".into()).unwrap();
        assert_eq!(buf.samples.len(), 3);
        assert!((buf.samples[0] - (8_388_607.0 / 8_388_608.0)).abs() < 1e-12);
        assert!((buf.samples[1] + 1.0).abs() < 1e-12);
        assert_eq!(buf.samples[2], 0.0);
    }

    #[test]
    fn rifx_magic_is_parse_error() {
        let mut bytes = b"RIFX".to_vec();
        bytes.extend_from_slice(&[0u8; 40]);
        assert!(matches!(
            decode_wav(&bytes, "x".into()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn empty_data_chunk_is_empty_audio() {
        let mut bytes = Vec::new();
        let mut cur = std::io::Cursor::new(&mut bytes);
        write_header(&mut cur, FORMAT_PCM, 16, 16_000, 0).unwrap();
        assert!(matches!(
            decode_wav(&bytes, "x".into()),
            Err(Error::EmptyAudio(_))
        ));
    }

    #[test]
    fn unsupported_codec_is_rejected() {
        // 8-bit PCM header with a bit of data
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"RIFF");
        bytes.extend_from_slice(&(36u32 + 4).to_le_bytes());
        bytes.extend_from_slice(b"WAVE");
        bytes.extend_from_slice(b"fmt ");
        bytes.extend_from_slice(&16u32.to_le_bytes());
        bytes.extend_from_slice(&FORMAT_PCM.to_le_bytes());
        bytes.extend_from_slice(&1u16.to_le_bytes());
        bytes.extend_from_slice(&16_000u32.to_le_bytes());
        bytes.extend_from_slice(&16_000u32.to_le_bytes());
        bytes.extend_from_slice(&1u16.to_le_bytes());
        bytes.extend_from_slice(&8u16.to_le_bytes());
        bytes.extend_from_slice(b"data");
        bytes.extend_from_slice(&4u32.to_le_bytes());
        bytes.extend_from_slice(&[0u8; 4]);
        assert!(matches!(
            decode_wav(&bytes, "x".into()),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn stereo_averages_to_mono() {
        // hand-build a 2-channel PCM16 file: L = 0.5, R = -0.5 -> mono 0
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"RIFF");
        bytes.extend_from_slice(&(36u32 + 8).to_le_bytes());
        bytes.extend_from_slice(b"WAVE");
        bytes.extend_from_slice(b"fmt ");
        bytes.extend_from_slice(&16u32.to_le_bytes());
        bytes.extend_from_slice(&FORMAT_PCM.to_le_bytes());
        bytes.extend_from_slice(&2u16.to_le_bytes());
        bytes.extend_from_slice(&16_000u32.to_le_bytes());
        bytes.extend_from_slice(&64_000u32.to_le_bytes());
        bytes.extend_from_slice(&4u16.to_le_bytes());
        bytes.extend_from_slice(&16u16.to_le_bytes());
        bytes.extend_from_slice(b"data");
        bytes.extend_from_slice(&8u32.to_le_bytes());
        for _ in 0..2 {
            bytes.extend_from_slice(&16384i16.to_le_bytes());
            bytes.extend_from_slice(&(-16384i16).to_le_bytes());
        }
        let buf = decode_wav(&bytes, "stereo".into()).unwrap();
        assert_eq!(buf.samples.len(), 2);
        assert!(buf.samples.iter().all(|&s| s.abs() < 1e-12));
    }
}
