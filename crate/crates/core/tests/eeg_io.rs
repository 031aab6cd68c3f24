use bciarm_core::eeg_io::*;
use bciarm_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_recording(seed: u64, n_channels: usize, n: usize) -> RawRecording {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let channels = (0..n_channels)
        .map(|_| (0..n).map(|_| rng.random_range(-80.0..80.0)).collect())
        .collect();
    let trigger = (0..n).map(|_| rng.random_range(0..=4u8)).collect();
    RawRecording::with_uniform_time(500.0, channels, trigger).unwrap()
}

#[test]
fn ten_column_file_loads_with_inferred_rate() {
    let rec = random_recording(1, 8, 5000);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rec.csv");
    save_recording(&rec, &path).unwrap();
    let back = load_recording(&path).unwrap();
    assert_eq!(back.n_samples(), 5000);
    assert_eq!(back.n_channels(), 8);
    assert_eq!(back.sample_rate(), 500.0);
}

#[test]
fn save_load_is_bit_exact() {
    let rec = random_recording(2, 8, 700);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rec.csv");
    save_recording(&rec, &path).unwrap();
    let back = load_recording(&path).unwrap();
    for (a, b) in rec.channels().iter().zip(back.channels()) {
        assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    assert_eq!(back.trigger(), rec.trigger());
    assert!(rec
        .timestamps()
        .iter()
        .zip(back.timestamps())
        .all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn nine_columns_is_a_format_error() {
    let rec = random_recording(3, 7, 20);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rec.csv");
    save_recording(&rec, &path).unwrap();
    assert!(matches!(load_recording(&path), Err(Error::Format { line: 1, .. })));

    let mut text = String::from("ch1,ch2,ch3,ch4,ch5,ch6,ch7,ch8,trigger,t\n");
    text.push_str("0,0,0,0,0,0,0,0,0,0\n");
    text.push_str("0,0,0,0,0,0,0,0,0.002\n");
    assert!(matches!(
        read_recording(text.as_bytes(), 8),
        Err(Error::Format { line: 3, .. })
    ));
}

#[test]
fn loader_integrity_errors() {
    let head = "ch1,trigger,t\n";
    let backwards = format!("{head}0,0,0.004\n0,0,0.002\n0,0,0.006\n");
    assert!(matches!(read_recording(backwards.as_bytes(), 1), Err(Error::Integrity(_))));
    let bad_code = format!("{head}0,7,0\n0,0,0.002\n");
    assert!(matches!(read_recording(bad_code.as_bytes(), 1), Err(Error::Integrity(_))));
}

#[test]
fn ground_truth_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("truth.json");
    save_ground_truth(&[1, 3, 2, 4], &path).unwrap();
    assert_eq!(load_ground_truth(&path).unwrap(), vec![1, 3, 2, 4]);
    std::fs::write(&path, "[1, 5]").unwrap();
    assert!(matches!(load_ground_truth(&path), Err(Error::Integrity(_))));
}

#[test]
fn ten_decisions_give_two_hundred_triggers() {
    let cfg = SyntheticSubjectConfig {
        intended_bulbs: vec![1, 2, 3, 4, 1, 2, 3, 4, 1, 2],
        ..Default::default()
    };
    let s = synth_session(&cfg, 500.0).unwrap();
    assert_eq!(s.recording.trigger().iter().filter(|&&c| c != 0).count(), 200);
    let events = segment_rounds(&s.recording).unwrap();
    assert_eq!(events, s.events);
    assert_eq!(events.last().unwrap().round_index + 1, 50);
    assert_eq!(decision_blocks(&events, 5).unwrap().len(), 10);
}

#[test]
fn synth_is_deterministic_and_seed_sensitive() {
    let cfg = SyntheticSubjectConfig::default();
    let a = synth_session(&cfg, 500.0).unwrap();
    let b = synth_session(&cfg, 500.0).unwrap();
    assert_eq!(a.recording, b.recording);
    let c = synth_session(&SyntheticSubjectConfig { rng_seed: 2, ..cfg }, 500.0).unwrap();
    assert_ne!(a.recording, c.recording);
}

#[test]
fn sample_rate_below_sixty_is_config_error() {
    assert!(matches!(
        synth_session(&SyntheticSubjectConfig::default(), 50.0),
        Err(Error::Config(_))
    ));
}

#[test]
fn onsets_within_round_are_one_soa_apart() {
    for fs in [500.0, 256.0, 1000.0] {
        let s = synth_session(&SyntheticSubjectConfig::default(), fs).unwrap();
        let soa = SOA_MS * 1e-3 * fs;
        for round in s.events.chunks(NUM_BULBS) {
            for w in round.windows(2) {
                let gap = (w[1].onset_sample - w[0].onset_sample) as f64;
                assert!((gap - soa).abs() <= 1.0, "fs {fs}: gap {gap} vs {soa}");
            }
        }
    }
}

fn noiseless() -> SyntheticSubjectConfig {
    SyntheticSubjectConfig {
        noise_std: 0.0,
        ..Default::default()
    }
}

#[test]
fn noiseless_target_peaks_at_latency() {
    let cfg = noiseless();
    let s = synth_session(&cfg, 500.0).unwrap();
    let ch = s.recording.channel(cfg.responsive_channels[0]);
    for block in s.events.chunks(cfg.rounds_per_decision * NUM_BULBS).zip(&s.intended) {
        let (events, &intended) = block;
        let ev = events.iter().find(|e| e.bulb == intended).unwrap();
        let window = &ch[ev.onset_sample..ev.onset_sample + 300];
        let peak = window
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!((peak as i64 - 150).abs() <= 1, "peak at sample {peak}");
    }
}

#[test]
fn noiseless_difference_wave_is_the_template() {
    let cfg = noiseless();
    let s = synth_session(&cfg, 500.0).unwrap();
    let fs = 500.0;
    let sigma = cfg.p300_width / 2.355;
    let rec = &s.recording;
    let targets: Vec<usize> = s
        .events
        .iter()
        .filter(|e| s.intended[e.round_index / cfg.rounds_per_decision] == e.bulb)
        .map(|e| e.onset_sample)
        .collect();
    for &ch in &cfg.responsive_channels {
        let x = rec.channel(ch);
        for k in 0..300 {
            // Independent bookkeeping: the value at `on + k` is the sum of all
            // bumps whose onset precedes it.
            let all: f64 = targets
                .iter()
                .filter(|&&t| t <= targets[0] + k)
                .map(|&t| {
                    let d = (targets[0] + k - t) as f64 * 1e3 / fs - cfg.p300_latency;
                    if d.abs() > 4.0 * sigma {
                        0.0
                    } else {
                        cfg.p300_amplitude * (-0.5 * (d / sigma).powi(2)).exp()
                    }
                })
                .sum();
            assert!((x[targets[0] + k] - all).abs() < 1e-9, "ch {ch} sample {k}");
        }
    }
    for ch in (0..cfg.n_channels).filter(|c| !cfg.responsive_channels.contains(c)) {
        assert!(rec.channel(ch).iter().all(|&v| v == 0.0));
    }
}

#[test]
fn segment_rounds_rejects_repeats() {
    let mut trigger = vec![0u8; 400];
    trigger[10] = 1;
    trigger[135] = 1;
    let rec = RawRecording::with_uniform_time(500.0, vec![vec![0.0; 400]], trigger).unwrap();
    assert!(matches!(segment_rounds(&rec), Err(Error::Protocol { round: 0, .. })));
}
