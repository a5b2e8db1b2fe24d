use std::io::{self, Write};

const FORMAT_IEEE_FLOAT: u16 = 3;

/// Writes interleaved `f32` samples as a RIFF/WAVE file: IEEE float
/// format, little-endian, 44-byte header, no `fact` chunk.
pub fn write_wav_f32<W: Write>(mut w: W, sample_rate: u32, channels: u16, samples: &[f32]) -> io::Result<()> {
    let data_len = (samples.len() * 4) as u32;
    let block_align = channels * 4;
    w.write_all(b"RIFF")?;
    w.write_all(&(36 + data_len).to_le_bytes())?;
    w.write_all(b"WAVE")?;
    w.write_all(b"fmt ")?;
    w.write_all(&16u32.to_le_bytes())?;
    w.write_all(&FORMAT_IEEE_FLOAT.to_le_bytes())?;
    w.write_all(&channels.to_le_bytes())?;
    w.write_all(&sample_rate.to_le_bytes())?;
    w.write_all(&(sample_rate * block_align as u32).to_le_bytes())?;
    w.write_all(&block_align.to_le_bytes())?;
    w.write_all(&32u16.to_le_bytes())?;
    w.write_all(b"data")?;
    w.write_all(&data_len.to_le_bytes())?;
    let mut buf = Vec::with_capacity(samples.len() * 4);
    for s in samples {
        buf.extend_from_slice(&s.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let mut out = Vec::new();
        write_wav_f32(&mut out, 44100, 2, &[0.5, -0.5]).unwrap();
        assert_eq!(out.len(), 44 + 8);
        assert_eq!(&out[0..4], b"RIFF");
        assert_eq!(u32::from_le_bytes(out[4..8].try_into().unwrap()), 44);
        assert_eq!(u16::from_le_bytes(out[20..22].try_into().unwrap()), 3);
        assert_eq!(u16::from_le_bytes(out[22..24].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(out[24..28].try_into().unwrap()), 44100);
        assert_eq!(u32::from_le_bytes(out[28..32].try_into().unwrap()), 44100 * 8);
        assert_eq!(u16::from_le_bytes(out[32..34].try_into().unwrap()), 8);
        assert_eq!(u16::from_le_bytes(out[34..36].try_into().unwrap()), 32);
        assert_eq!(&out[36..40], b"data");
        assert_eq!(f32::from_le_bytes(out[44..48].try_into().unwrap()), 0.5);
    }

    #[test]
    fn hound_reads_it() {
        let mut out = Vec::new();
        let samples = [0.0f32, 0.25, -1.0, 1.0, 1e-30, -0.125];
        write_wav_f32(&mut out, 8000, 3, &samples).unwrap();
        let mut r = hound::WavReader::new(std::io::Cursor::new(out)).unwrap();
        let spec = r.spec();
        assert_eq!((spec.channels, spec.sample_rate, spec.bits_per_sample), (3, 8000, 32));
        assert_eq!(spec.sample_format, hound::SampleFormat::Float);
        let got: Vec<f32> = r.samples::<f32>().map(Result::unwrap).collect();
        assert_eq!(got, samples);
    }
}
