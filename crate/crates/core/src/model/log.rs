use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::report::fmt_num;

/// Measurement column of the mote log
/// (`date time epoch moteid temperature humidity light voltage`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogField {
    Temperature,
    Humidity,
    Light,
    Voltage,
}

impl LogField {
    fn column(self) -> usize {
        match self {
            LogField::Temperature => 4,
            LogField::Humidity => 5,
            LogField::Light => 6,
            LogField::Voltage => 7,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogField::Temperature => "temperature",
            LogField::Humidity => "humidity",
            LogField::Light => "light",
            LogField::Voltage => "voltage",
        }
    }
}

impl std::str::FromStr for LogField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "temperature" => Ok(LogField::Temperature),
            "humidity" => Ok(LogField::Humidity),
            "light" => Ok(LogField::Light),
            "voltage" => Ok(LogField::Voltage),
            other => Err(Error::Parameter(format!("unknown log field '{other}'"))),
        }
    }
}

/// Time-ordered readings of one sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSeries {
    pub sensor_id: u32,
    pub values: Vec<f64>,
    pub epochs: Option<Vec<u64>>,
}

#[derive(Debug, Clone)]
pub struct IngestReport {
    pub series: BTreeMap<u32, SensorSeries>,
    /// Malformed or incomplete lines that were dropped.
    pub skipped: usize,
}

const LOG_COLUMNS: usize = 8;

/// Parses a whitespace-separated mote log. An empty `sensor_ids` selects
/// every sensor present; otherwise each requested id must appear.
pub fn ingest_sensor_log<R: BufRead>(
    reader: R,
    sensor_ids: &[u32],
    field: LogField,
) -> Result<IngestReport> {
    let wanted: BTreeSet<u32> = sensor_ids.iter().copied().collect();
    let mut rows: BTreeMap<u32, Vec<(u64, f64)>> = BTreeMap::new();
    let mut skipped = 0;

    for line in reader.lines() {
        let line = line.map_err(|e| Error::Input(format!("unreadable log stream: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        let parsed = (cols.len() == LOG_COLUMNS)
            .then(|| {
                let epoch = cols[2].parse::<u64>().ok()?;
                let mote = cols[3].parse::<u32>().ok()?;
                let value = cols[field.column()].parse::<f64>().ok()?;
                value.is_finite().then_some((epoch, mote, value))
            })
            .flatten();
        match parsed {
            Some((epoch, mote, value)) => {
                if wanted.is_empty() || wanted.contains(&mote) {
                    rows.entry(mote).or_default().push((epoch, value));
                }
            }
            None => skipped += 1,
        }
    }

    if let Some(missing) = wanted.iter().find(|id| !rows.contains_key(id)) {
        return Err(Error::MissingSensor(*missing));
    }

    let series = rows
        .into_iter()
        .map(|(id, mut pts)| {
            pts.sort_by_key(|p| p.0);
            let series = SensorSeries {
                sensor_id: id,
                values: pts.iter().map(|p| p.1).collect(),
                epochs: Some(pts.iter().map(|p| p.0).collect()),
            };
            (id, series)
        })
        .collect();
    Ok(IngestReport { series, skipped })
}

/// Non-overlapping length-`n` frames; the trailing remainder is dropped.
pub fn windowize(series: &SensorSeries, n: usize) -> Result<Vec<DVector<f64>>> {
    if n == 0 {
        return Err(Error::Parameter("window length must be at least 1".into()));
    }
    Ok(series
        .values
        .chunks_exact(n)
        .map(DVector::from_column_slice)
        .collect())
}

/// Restricts every series to the epochs present in all of them. Series
/// without epochs are truncated to the shortest length instead.
pub fn align_series(series: &[SensorSeries]) -> Result<Vec<SensorSeries>> {
    if series.is_empty() {
        return Err(Error::Parameter("no sensor series to align".into()));
    }
    if series.iter().any(|s| s.epochs.is_none()) {
        let len = series.iter().map(|s| s.values.len()).min().unwrap_or(0);
        return Ok(series
            .iter()
            .map(|s| SensorSeries {
                sensor_id: s.sensor_id,
                values: s.values[..len].to_vec(),
                epochs: None,
            })
            .collect());
    }

    let mut common: BTreeSet<u64> = series[0].epochs.iter().flatten().copied().collect();
    for s in &series[1..] {
        let these: BTreeSet<u64> = s.epochs.iter().flatten().copied().collect();
        common = common.intersection(&these).copied().collect();
    }
    Ok(series
        .iter()
        .map(|s| {
            let mut seen = BTreeSet::new();
            let mut values = Vec::new();
            let mut epochs = Vec::new();
            let eps = s.epochs.as_deref().unwrap_or_default();
            for (&e, &v) in eps.iter().zip(&s.values) {
                // first reading wins when a mote reports an epoch twice
                if common.contains(&e) && seen.insert(e) {
                    epochs.push(e);
                    values.push(v);
                }
            }
            SensorSeries {
                sensor_id: s.sensor_id,
                values,
                epochs: Some(epochs),
            }
        })
        .collect())
}

/// Writes frames as CSV: `sensor_id,frame,s0,...,s{n-1}`.
pub fn write_frames_csv<W: Write>(
    mut out: W,
    n: usize,
    frames: &[(u32, Vec<DVector<f64>>)],
) -> std::io::Result<()> {
    let mut header = String::from("sensor_id,frame");
    for i in 0..n {
        header.push_str(&format!(",s{i}"));
    }
    writeln!(out, "{header}")?;
    for (id, list) in frames {
        for (t, frame) in list.iter().enumerate() {
            let mut row = format!("{id},{t}");
            for v in frame.iter() {
                row.push(',');
                row.push_str(&fmt_num(*v));
            }
            writeln!(out, "{row}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const RECORD: &str = "2004-03-31 03:38:15.757 2 2 19.98 37.09 45.08 2.69";

    fn series(n: usize) -> SensorSeries {
        SensorSeries {
            sensor_id: 1,
            values: (0..n).map(|i| i as f64).collect(),
            epochs: None,
        }
    }

    #[test]
    fn parses_published_record_layout() {
        let r = ingest_sensor_log(RECORD.as_bytes(), &[2], LogField::Temperature).unwrap();
        assert_eq!(r.series[&2].values, vec![19.98]);
        assert_eq!(r.series[&2].epochs, Some(vec![2]));
        assert_eq!(r.skipped, 0);
        let h = ingest_sensor_log(RECORD.as_bytes(), &[2], LogField::Humidity).unwrap();
        assert_eq!(h.series[&2].values, vec![37.09]);
    }

    #[test]
    fn empty_stream_reports_missing_sensor() {
        let err = ingest_sensor_log("".as_bytes(), &[2], LogField::Temperature).unwrap_err();
        assert_eq!(err, Error::MissingSensor(2));
    }

    #[test]
    fn malformed_lines_are_counted_and_skipped() {
        let mut text = String::new();
        for e in 0..10 {
            text.push_str(&format!("2004-03-31 03:38:15.757 {} 2 {}.5 37.0 45.0 2.69\n", 10 - e, e));
            if e == 4 {
                text.push_str("2004-03-31 03:38:15.757 3 2 19.98\n");
            }
        }
        let r = ingest_sensor_log(text.as_bytes(), &[2], LogField::Temperature).unwrap();
        let s = &r.series[&2];
        assert_eq!(s.values.len(), 10);
        assert_eq!(r.skipped, 1);
        // sorted by epoch
        assert_eq!(s.epochs.as_ref().unwrap()[0], 1);
        assert_eq!(s.values[0], 9.5);
    }

    #[test]
    fn non_numeric_field_is_malformed() {
        let text = "2004-03-31 03:38:15.757 2 2 abc 37.09 45.08 2.69\n";
        let r = ingest_sensor_log(text.as_bytes(), &[], LogField::Temperature).unwrap();
        assert_eq!(r.skipped, 1);
        assert!(r.series.is_empty());
    }

    #[test]
    fn windowize_counts() {
        assert_eq!(windowize(&series(1030), 512).unwrap().len(), 2);
        assert_eq!(windowize(&series(511), 512).unwrap().len(), 0);
        let one = windowize(&series(512), 512).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].as_slice(), series(512).values.as_slice());
        assert!(windowize(&series(4), 0).is_err());
    }

    #[test]
    fn alignment_keeps_shared_epochs() {
        let a = SensorSeries {
            sensor_id: 1,
            values: vec![1.0, 2.0, 3.0, 4.0],
            epochs: Some(vec![1, 2, 3, 4]),
        };
        let b = SensorSeries {
            sensor_id: 2,
            values: vec![20.0, 40.0, 50.0],
            epochs: Some(vec![2, 4, 5]),
        };
        let out = align_series(&[a, b]).unwrap();
        assert_eq!(out[0].values, vec![2.0, 4.0]);
        assert_eq!(out[1].values, vec![20.0, 40.0]);
    }

    #[test]
    fn frames_csv_layout() {
        let frames = vec![(3u32, vec![DVector::from_vec(vec![1.0, 0.25])])];
        let mut buf = Vec::new();
        write_frames_csv(&mut buf, 2, &frames).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "sensor_id,frame,s0,s1\n3,0,1,0.25\n");
    }
}
