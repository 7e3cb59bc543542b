use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::eval::{CaseSpec, GridResult};
use crate::learners::Algorithm;
use crate::{Error, Result};

pub const CSV_HEADER: &str = "adc_bits,snr_db,train_frames,algorithm,seed,ber,selection_accuracy,frames_evaluated,acq_drops,train_seconds,predict_us_mean";

/// Results table, one row per case in the given order.
pub fn results_csv(results: &[GridResult]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in results {
        let c = &r.case;
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.adc_bits,
            c.snr_db,
            c.train_frames,
            c.algorithm,
            c.seed,
            r.ber,
            r.selection_accuracy,
            r.frames_evaluated,
            r.acq_drops,
            r.train_seconds,
            r.predict_us_mean
        )
        .expect("writing to a String");
    }
    s
}

/// Parses a table written by [`results_csv`].
pub fn parse_results_csv(text: &str) -> Result<Vec<GridResult>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::InvalidConfig("results CSV header does not match".into()));
    }
    let bad = |line: &str| Error::InvalidConfig(format!("malformed results row {line:?}"));
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 11 {
                return Err(bad(line));
            }
            let num = |i: usize| f[i].parse::<f64>().map_err(|_| bad(line));
            let int = |i: usize| f[i].parse::<u64>().map_err(|_| bad(line));
            Ok(GridResult {
                case: CaseSpec {
                    adc_bits: int(0)? as u32,
                    snr_db: num(1)?,
                    train_frames: int(2)? as usize,
                    algorithm: f[3].parse()?,
                    seed: int(4)?,
                },
                ber: num(5)?,
                selection_accuracy: num(6)?,
                frames_evaluated: int(7)? as usize,
                acq_drops: int(8)? as usize,
                train_seconds: num(9)?,
                predict_us_mean: num(10)?,
            })
        })
        .collect()
}

/// BER against SNR for one resolution and algorithm: one row per SNR in
/// ascending order, one BER column per training size.
pub fn series_table(results: &[GridResult], adc_bits: u32, algorithm: Algorithm) -> String {
    let rows: Vec<&GridResult> =
        results.iter().filter(|r| r.case.adc_bits == adc_bits && r.case.algorithm == algorithm).collect();
    let sizes: BTreeSet<usize> = rows.iter().map(|r| r.case.train_frames).collect();
    let mut snrs: Vec<f64> = rows.iter().map(|r| r.case.snr_db).collect();
    snrs.sort_by(f64::total_cmp);
    snrs.dedup();

    let mut s = String::from("# snr_db");
    for n in &sizes {
        write!(s, " ber_{n}").expect("writing to a String");
    }
    s.push('\n');
    for snr in snrs {
        write!(s, "{snr}").expect("writing to a String");
        for n in &sizes {
            let ber = rows
                .iter()
                .find(|r| r.case.snr_db == snr && r.case.train_frames == *n)
                .map_or(f64::NAN, |r| r.ber);
            write!(s, " {ber}").expect("writing to a String");
        }
        s.push('\n');
    }
    s
}

/// Writes `results.csv` and one `ber_<bits>bit_<ALGORITHM>.dat` series per
/// resolution and algorithm into `dir`. Returns the written paths.
pub fn report(results: &[GridResult], dir: &Path) -> Result<Vec<PathBuf>> {
    if results.is_empty() {
        return Err(Error::NothingToReport);
    }
    fs::create_dir_all(dir)?;
    let csv = dir.join("results.csv");
    fs::write(&csv, results_csv(results))?;
    let mut written = vec![csv];
    let pairs: BTreeSet<(u32, Algorithm)> = results.iter().map(|r| (r.case.adc_bits, r.case.algorithm)).collect();
    for (bits, alg) in pairs {
        let path = dir.join(format!("ber_{bits}bit_{alg}.dat"));
        fs::write(&path, series_table(results, bits, alg))?;
        written.push(path);
    }
    Ok(written)
}
