use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{Frontend, Models};
use crate::decoder::DecisionRecord;
use crate::error::{Error, Result};

pub const FRONTEND_FILE: &str = "frontend.json";
pub const PCA_FILE: &str = "pca.json";
pub const CLASSIFIER_FILE: &str = "classifier.json";

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let file = File::open(path)
        .map_err(|e| Error::Integrity(format!("cannot open {}: {e}", path.display())))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

pub fn save_models(models: &Models, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    write_json(&models.frontend, dir.join(FRONTEND_FILE))?;
    write_json(&models.pca, dir.join(PCA_FILE))?;
    write_json(&models.classifier, dir.join(CLASSIFIER_FILE))
}

pub fn load_models(dir: impl AsRef<Path>) -> Result<Models> {
    let dir = dir.as_ref();
    let frontend: Frontend = read_json(dir.join(FRONTEND_FILE))?;
    let pca = read_json(dir.join(PCA_FILE))?;
    let classifier = read_json(dir.join(CLASSIFIER_FILE))?;
    Ok(Models {
        frontend,
        pca,
        classifier,
    })
}

/// One JSON object per line.
pub fn write_decision_log<W: Write>(records: &[DecisionRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_decision_log<R: BufRead>(input: R) -> Result<Vec<DecisionRecord>> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line).map_err(|e| Error::Format {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(records)
}
