//! Mono WAV reading and writing (16/24-bit PCM, 32-bit float).

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use rirdenoise_core::Signal;

use crate::CliError;

/// Sample encoding of a WAV file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavFormat {
    Int16,
    Int24,
    Float32,
}

impl WavFormat {
    fn spec(self, sample_rate: u32) -> WavSpec {
        let (bits_per_sample, sample_format) = match self {
            Self::Int16 => (16, SampleFormat::Int),
            Self::Int24 => (24, SampleFormat::Int),
            Self::Float32 => (32, SampleFormat::Float),
        };
        WavSpec { channels: 1, sample_rate, bits_per_sample, sample_format }
    }

    /// Size of one quantisation step on the `[-1, 1)` scale.
    pub fn lsb(self) -> f64 {
        match self {
            Self::Int16 => 1.0 / 32768.0,
            Self::Int24 => 1.0 / 8_388_608.0,
            Self::Float32 => f32::EPSILON as f64,
        }
    }
}

pub fn read_wav(path: &Path) -> Result<(Signal, WavFormat), CliError> {
    let mut reader = WavReader::open(path).map_err(|e| CliError::input(path, e))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(CliError::input(
            path,
            format!("mono required, file has {} channels; extract one channel first", spec.channels),
        ));
    }
    let (format, samples): (WavFormat, Vec<f64>) = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => (
            WavFormat::Int16,
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / 32768.0))
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::input(path, e))?,
        ),
        (SampleFormat::Int, 24) => (
            WavFormat::Int24,
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / 8_388_608.0))
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::input(path, e))?,
        ),
        (SampleFormat::Float, 32) => (
            WavFormat::Float32,
            reader
                .samples::<f32>()
                .map(|s| s.map(f64::from))
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::input(path, e))?,
        ),
        (fmt, bits) => {
            return Err(CliError::input(path, format!("unsupported sample format {fmt:?} with {bits} bits")));
        }
    };
    let signal = Signal::new(samples, spec.sample_rate as f64).map_err(|e| CliError::input(path, e))?;
    Ok((signal, format))
}

pub fn write_wav(path: &Path, signal: &Signal, format: WavFormat) -> Result<(), CliError> {
    let rate = signal.sample_rate();
    if rate.fract() != 0.0 || rate < 1.0 || rate > u32::MAX as f64 {
        return Err(CliError::output(path, format!("sample rate {rate} is not a WAV-compatible integer")));
    }
    let mut writer = WavWriter::create(path, format.spec(rate as u32)).map_err(|e| CliError::output(path, e))?;
    let result = match format {
        WavFormat::Int16 => signal.samples().iter().try_for_each(|v| writer.write_sample(quantize(*v, 32768.0) as i16)),
        WavFormat::Int24 => signal.samples().iter().try_for_each(|v| writer.write_sample(quantize(*v, 8_388_608.0))),
        WavFormat::Float32 => signal.samples().iter().try_for_each(|v| writer.write_sample(*v as f32)),
    };
    result.and_then(|_| writer.finalize()).map_err(|e| CliError::output(path, e))
}

fn quantize(v: f64, scale: f64) -> i32 {
    (v * scale).round().clamp(-scale, scale - 1.0) as i32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_each_format() {
        let dir = tempfile::tempdir().unwrap();
        let samples: Vec<f64> = (0..500).map(|n| 0.9 * (0.01 * n as f64).sin()).collect();
        let sig = Signal::new(samples, 44100.0).unwrap();
        for format in [WavFormat::Int16, WavFormat::Int24, WavFormat::Float32] {
            let path = dir.path().join(format!("{format:?}.wav"));
            write_wav(&path, &sig, format).unwrap();
            let (back, f) = read_wav(&path).unwrap();
            assert_eq!(f, format);
            assert_eq!(back.sample_rate(), 44100.0);
            for (a, b) in back.samples().iter().zip(sig.samples()) {
                assert!((a - b).abs() <= format.lsb());
            }
        }
    }

    #[test]
    fn clipping_saturates() {
        assert_eq!(quantize(1.5, 32768.0), 32767);
        assert_eq!(quantize(-1.5, 32768.0), -32768);
    }
}
