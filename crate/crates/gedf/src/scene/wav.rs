//! Minimal RIFF/WAVE reader and writer: IEEE float32 out, float32 or PCM16 in.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scene::MultiChannelAudio;

/// Writes interleaved 32-bit float WAV (format tag 3).
pub fn write_wav_f32(path: &Path, audio: &MultiChannelAudio) -> Result<()> {
    let channels = audio.samples.nrows() as u16;
    let frames = audio.samples.ncols();
    let byte_rate = audio.sample_rate * u32::from(channels) * 4;
    let block_align = channels * 4;
    let data_size = (frames * channels as usize * 4) as u32;

    let mut buf = Vec::with_capacity(58 + data_size as usize);
    buf.extend_from_slice(b"RIFF");
    buf.extend_from_slice(&(38 + data_size).to_le_bytes());
    buf.extend_from_slice(b"WAVE");

    buf.extend_from_slice(b"fmt ");
    buf.extend_from_slice(&18u32.to_le_bytes());
    buf.extend_from_slice(&3u16.to_le_bytes()); // IEEE float
    buf.extend_from_slice(&channels.to_le_bytes());
    buf.extend_from_slice(&audio.sample_rate.to_le_bytes());
    buf.extend_from_slice(&byte_rate.to_le_bytes());
    buf.extend_from_slice(&block_align.to_le_bytes());
    buf.extend_from_slice(&32u16.to_le_bytes()); // bits per sample
    buf.extend_from_slice(&0u16.to_le_bytes()); // cbSize

    buf.extend_from_slice(b"data");
    buf.extend_from_slice(&data_size.to_le_bytes());
    for i in 0..frames {
        for c in 0..channels as usize {
            buf.extend_from_slice(&(audio.samples[[c, i]] as f32).to_le_bytes());
        }
    }

    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&buf).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn chunk_err(path: &Path, message: &str) -> Error {
    Error::Parse {
        what: "wav".into(),
        path: path.to_path_buf(),
        line: 0,
        message: message.into(),
    }
}

/// Reads a 4-channel WAV file (float32 or PCM16).
pub fn read_wav(path: &Path) -> Result<MultiChannelAudio> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(chunk_err(path, "not a RIFF/WAVE file"));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // (tag, channels, rate, bits)
    let mut data: Option<&[u8]> = None;
    let mut off = 12usize;
    while off + 8 <= bytes.len() {
        let id = &bytes[off..off + 4];
        let size = u32::from_le_bytes(bytes[off + 4..off + 8].try_into().unwrap()) as usize;
        let body_end = (off + 8 + size).min(bytes.len());
        let body = &bytes[off + 8..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(chunk_err(path, "fmt chunk too short"));
                }
                let tag = u16::from_le_bytes(body[0..2].try_into().unwrap());
                let channels = u16::from_le_bytes(body[2..4].try_into().unwrap());
                let rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
                let bits = u16::from_le_bytes(body[14..16].try_into().unwrap());
                fmt = Some((tag, channels, rate, bits));
            }
            b"data" => data = Some(body),
            _ => {}
        }
        off += 8 + size + (size & 1);
    }

    let (tag, channels, rate, bits) = fmt.ok_or_else(|| chunk_err(path, "missing fmt chunk"))?;
    let data = data.ok_or_else(|| chunk_err(path, "missing data chunk"))?;
    let channels = channels as usize;
    if channels == 0 {
        return Err(chunk_err(path, "zero channels"));
    }

    let samples: Vec<f64> = match (tag, bits) {
        (3, 32) => data
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
            .collect(),
        (1, 16) => data
            .chunks_exact(2)
            .map(|b| i16::from_le_bytes(b.try_into().unwrap()) as f64 / 32768.0)
            .collect(),
        _ => {
            return Err(chunk_err(
                path,
                &format!("unsupported format: tag {tag}, {bits} bits"),
            ))
        }
    };

    let frames = samples.len() / channels;
    if frames == 0 {
        return Err(chunk_err(path, "empty data chunk"));
    }
    let mut out = Array2::<f64>::zeros((channels, frames));
    for i in 0..frames {
        for c in 0..channels {
            out[[c, i]] = samples[i * channels + c].clamp(-1.0, 1.0);
        }
    }
    MultiChannelAudio::new(out, rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float32_round_trip() {
        let mut samples = Array2::<f64>::zeros((4, 64));
        for c in 0..4 {
            for i in 0..64 {
                samples[[c, i]] = ((i + c * 13) as f64 * 0.11).sin() * 0.5;
            }
        }
        let audio = MultiChannelAudio::new(samples, 16_000).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.wav");
        write_wav_f32(&path, &audio).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.sample_rate, 16_000);
        assert_eq!(back.samples.dim(), (4, 64));
        for (a, b) in audio.samples.iter().zip(back.samples.iter()) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn pcm16_is_accepted() {
        // Hand-built minimal PCM16 file, 4 channels, 2 frames.
        let mut buf = Vec::new();
        buf.extend_from_slice(b"RIFF");
        buf.extend_from_slice(&(36u32 + 16).to_le_bytes());
        buf.extend_from_slice(b"WAVE");
        buf.extend_from_slice(b"fmt ");
        buf.extend_from_slice(&16u32.to_le_bytes());
        buf.extend_from_slice(&1u16.to_le_bytes());
        buf.extend_from_slice(&4u16.to_le_bytes());
        buf.extend_from_slice(&16000u32.to_le_bytes());
        buf.extend_from_slice(&(16000u32 * 8).to_le_bytes());
        buf.extend_from_slice(&8u16.to_le_bytes());
        buf.extend_from_slice(&16u16.to_le_bytes());
        buf.extend_from_slice(b"data");
        buf.extend_from_slice(&16u32.to_le_bytes());
        for v in [0i16, 16384, -16384, 32767, -32768, 1, 2, 3] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pcm.wav");
        fs::write(&path, &buf).unwrap();
        let audio = read_wav(&path).unwrap();
        assert_eq!(audio.samples.dim(), (4, 2));
        assert!((audio.samples[[1, 0]] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn missing_file_reports_path() {
        let err = read_wav(Path::new("/nonexistent/x.wav")).unwrap_err();
        assert!(err.to_string().contains("x.wav"));
    }
}
