//! CSV persistence for feature matrices.
//!
//! Schema: `id,label,gender,age,environment,country` followed by the
//! feature columns. Missing values are empty cells; feature values are
//! written with 17 significant digits so the round trip is lossless. The
//! loader accepts any numeric feature columns after the metadata block, so
//! externally produced embedding columns evaluate like native features.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::dataset::{Environment, FeatureMatrix, Gender, Label, RecordMeta};
use crate::error::{Error, Result};

const META_COLUMNS: [&str; 6] = ["id", "label", "gender", "age", "environment", "country"];

pub fn save_csv(m: &FeatureMatrix, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_csv(m, &mut w)
}

pub fn write_csv<W: Write>(m: &FeatureMatrix, w: &mut W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header: Vec<String> = META_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(m.feature_names.iter().cloned());
    wtr.write_record(&header)
        .map_err(|e| Error::Schema(e.to_string()))?;
    for (row, meta) in m.rows.iter().zip(&m.meta) {
        let mut record: Vec<String> = vec![
            meta.id.clone(),
            meta.label.as_str().to_string(),
            meta.gender.as_str().to_string(),
            format!("{}", meta.age),
            meta.environment.as_str().to_string(),
            meta.country.clone(),
        ];
        for v in row {
            record.push(match v {
                Some(x) => format!("{x:.16e}"),
                None => String::new(),
            });
        }
        wtr.write_record(&record)
            .map_err(|e| Error::Schema(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn load_csv(path: &Path) -> Result<FeatureMatrix> {
    let file = File::open(path)?;
    load_csv_reader(file)
}

pub fn load_csv_reader<R: Read>(r: R) -> Result<FeatureMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    if header.len() < META_COLUMNS.len() {
        return Err(Error::Schema(format!(
            "header has {} columns, need at least {}",
            header.len(),
            META_COLUMNS.len()
        )));
    }
    for (i, want) in META_COLUMNS.iter().enumerate() {
        if &header[i] != *want {
            return Err(Error::Schema(format!(
                "column {i} is {:?}, expected {want:?}",
                &header[i]
            )));
        }
    }
    let feature_names: Vec<String> = header
        .iter()
        .skip(META_COLUMNS.len())
        .map(|s| s.to_string())
        .collect();

    let mut rows = Vec::new();
    let mut meta = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        if record.len() != header.len() {
            return Err(Error::Schema(format!(
                "row {line} has {} cells, expected {}",
                record.len(),
                header.len()
            )));
        }
        let age: f64 = record[3]
            .parse()
            .map_err(|_| Error::Parse(format!("row {line}: bad age {:?}", &record[3])))?;
        meta.push(RecordMeta::new(
            record[0].to_string(),
            Label::parse(&record[1])?,
            Gender::parse(&record[2])?,
            age,
            Environment::parse(&record[4])?,
            record[5].to_string(),
        ));
        let mut row = Vec::with_capacity(feature_names.len());
        for cell in record.iter().skip(META_COLUMNS.len()) {
            if cell.is_empty() {
                row.push(None);
            } else {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {line}: bad value {cell:?}")))?;
                row.push(Some(v));
            }
        }
        rows.push(row);
    }

    FeatureMatrix::new(feature_names, rows, meta)
}
