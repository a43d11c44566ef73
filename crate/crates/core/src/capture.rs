//! Oscilloscope capture import.
//!
//! Accepts CSV with a header row and `time_s,current_A` columns (the
//! simulator's own `t_s,i_L_A` export is accepted too). Extra columns are
//! ignored.

use std::path::Path;

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, ramp_square_integral};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Capture {
    pub time: Vec<f64>,
    pub current: Vec<f64>,
}

fn column(headers: &csv::StringRecord, names: &[&str]) -> Result<usize> {
    headers
        .iter()
        .position(|h| names.contains(&h.trim()))
        .ok_or_else(|| Error::Format(format!("missing column `{}`", names[0])))
}

pub fn parse_capture<R: std::io::Read>(reader: R) -> Result<Capture> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Format(e.to_string()))?
        .clone();
    let ti = column(&headers, &["time_s", "t_s"])?;
    let ci = column(&headers, &["current_A", "i_L_A"])?;
    let mut cap = Capture::default();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        let field = |i: usize| -> Result<f64> {
            let raw = rec.get(i).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Format(format!("row {}: bad number `{raw}`", row + 2)))
        };
        let (t, i) = (field(ti)?, field(ci)?);
        if let Some(&prev) = cap.time.last() {
            if !(t > prev) {
                return Err(Error::Format(format!(
                    "row {}: time is not increasing",
                    row + 2
                )));
            }
        }
        cap.time.push(t);
        cap.current.push(i);
    }
    if cap.time.len() < 2 {
        return Err(Error::Format("capture needs at least 2 rows".into()));
    }
    Ok(cap)
}

pub fn import_capture(path: &Path) -> Result<Capture> {
    parse_capture(std::fs::File::open(path)?)
}

/// RMS over the capture window, integrating the square of the linear
/// interpolant between samples exactly.
pub fn rms_of_samples(capture: &Capture) -> Result<f64> {
    let (t, i) = (&capture.time, &capture.current);
    if t.len() < 2 || t.len() != i.len() {
        return Err(Error::Format("capture needs at least 2 rows".into()));
    }
    let window = t[t.len() - 1] - t[0];
    let energy = compensated_sum(
        t.windows(2)
            .zip(i.windows(2))
            .map(|(tw, iw)| ramp_square_integral(iw[0], iw[1], tw[1] - tw[0])),
    );
    Ok((energy / window).sqrt())
}
