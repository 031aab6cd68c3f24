use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{RawRecording, DEFAULT_CHANNELS, NUM_BULBS};
use crate::error::{Error, Result};

fn header(n_channels: usize) -> String {
    let mut cols: Vec<String> = (1..=n_channels).map(|i| format!("ch{i}")).collect();
    cols.push("trigger".into());
    cols.push("t".into());
    cols.join(",")
}

/// Write a recording as CSV. Floats use the shortest representation that
/// parses back to the same `f64`, so save/load is bit-exact.
pub fn write_recording<W: Write>(rec: &RawRecording, mut out: W) -> Result<()> {
    writeln!(out, "{}", header(rec.n_channels()))?;
    let mut line = String::new();
    for i in 0..rec.n_samples() {
        line.clear();
        for ch in rec.channels() {
            line.push_str(&ch[i].to_string());
            line.push(',');
        }
        line.push_str(&rec.trigger()[i].to_string());
        line.push(',');
        line.push_str(&rec.timestamps()[i].to_string());
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_recording(rec: &RawRecording, path: impl AsRef<Path>) -> Result<()> {
    write_recording(rec, BufWriter::new(File::create(path)?))
}

/// Parse a recording with exactly `n_channels` channel columns. The sample
/// rate is inferred from the time column.
pub fn read_recording<R: BufRead>(reader: R, n_channels: usize) -> Result<RawRecording> {
    let width = n_channels + 2;
    let mut lines = reader.lines();
    let head = lines.next().transpose()?.ok_or(Error::Format {
        line: 1,
        message: "empty file".into(),
    })?;
    let expected = header(n_channels);
    if head.trim() != expected {
        return Err(Error::Format {
            line: 1,
            message: format!("expected header `{expected}`, found `{}`", head.trim()),
        });
    }

    let mut channels = vec![Vec::new(); n_channels];
    let mut trigger = Vec::new();
    let mut timestamps = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != width {
            return Err(Error::Format {
                line: line_no,
                message: format!("expected {width} columns, found {}", fields.len()),
            });
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::Format {
                line: line_no,
                message: format!("cannot parse `{s}` as a number"),
            })
        };
        for (ch, field) in channels.iter_mut().zip(&fields) {
            ch.push(parse(field)?);
        }
        let code: i64 = fields[n_channels].parse().map_err(|_| Error::Format {
            line: line_no,
            message: format!("trigger `{}` is not an integer", fields[n_channels]),
        })?;
        if !(0..=NUM_BULBS as i64).contains(&code) {
            return Err(Error::Integrity(format!(
                "unknown trigger code {code} at line {line_no}"
            )));
        }
        trigger.push(code as u8);
        timestamps.push(parse(fields[n_channels + 1])?);
    }

    if timestamps.len() < 2 {
        return Err(Error::Format {
            line: timestamps.len() + 1,
            message: "need at least two samples to infer the sample rate".into(),
        });
    }
    if let Some(i) = timestamps.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::Integrity(format!(
            "timestamps not strictly increasing at line {}",
            i + 3
        )));
    }
    let span = timestamps[timestamps.len() - 1] - timestamps[0];
    let fs = (timestamps.len() - 1) as f64 / span;
    // Text timestamps carry rounding noise; snap to micro-hertz.
    let fs = (fs * 1e6).round() / 1e6;
    RawRecording::new(fs, channels, trigger, timestamps)
}

pub fn load_recording(path: impl AsRef<Path>) -> Result<RawRecording> {
    load_recording_with(path, DEFAULT_CHANNELS)
}

pub fn load_recording_with(path: impl AsRef<Path>, n_channels: usize) -> Result<RawRecording> {
    read_recording(BufReader::new(File::open(path)?), n_channels)
}

/// Ground-truth sidecar: a JSON array of intended bulb IDs.
pub fn save_ground_truth(bulbs: &[u8], path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut out, bulbs)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let bulbs: Vec<u8> = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    if let Some(b) = bulbs.iter().find(|&&b| b == 0 || b as usize > NUM_BULBS) {
        return Err(Error::Integrity(format!("ground truth holds invalid bulb {b}")));
    }
    Ok(bulbs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_recording(n: usize, seed: u64) -> RawRecording {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let channels = (0..DEFAULT_CHANNELS)
            .map(|_| (0..n).map(|_| rng.random_range(-80.0..80.0)).collect())
            .collect();
        let trigger = (0..n).map(|_| rng.random_range(0..=4u8)).collect();
        RawRecording::with_uniform_time(500.0, channels, trigger).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let rec = random_recording(5000, 7);
        let mut buf = Vec::new();
        write_recording(&rec, &mut buf).unwrap();
        let back = read_recording(buf.as_slice(), DEFAULT_CHANNELS).unwrap();
        assert_eq!(back.n_samples(), 5000);
        assert_eq!(back.sample_rate(), 500.0);
        for (a, b) in rec.channels().iter().zip(back.channels()) {
            assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        assert_eq!(rec.trigger(), back.trigger());
        assert!(rec
            .timestamps()
            .iter()
            .zip(back.timestamps())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn nine_columns_is_format_error() {
        let text = "ch1,ch2,ch3,ch4,ch5,ch6,ch7,trigger,t\n0,0,0,0,0,0,0,0,0\n";
        assert!(matches!(
            read_recording(text.as_bytes(), DEFAULT_CHANNELS),
            Err(Error::Format { line: 1, .. })
        ));
        let mut text = header(8);
        text.push_str("\n0,0,0,0,0,0,0,0,0,0\n0,0,0,0,0,0,0,0,0.002\n");
        match read_recording(text.as_bytes(), DEFAULT_CHANNELS) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn non_monotone_time_and_bad_trigger_are_integrity_errors() {
        let mut text = header(1);
        text.push_str("\n0,0,0\n0,0,0.002\n0,0,0.001\n");
        assert!(matches!(
            read_recording(text.as_bytes(), 1),
            Err(Error::Integrity(_))
        ));
        let mut text = header(1);
        text.push_str("\n0,0,0\n0,7,0.002\n");
        assert!(matches!(
            read_recording(text.as_bytes(), 1),
            Err(Error::Integrity(_))
        ));
    }
}
