use std::io::{BufRead, BufReader, Read, Write};

use indexmap::IndexMap;

use crate::{Error, Result};

/// First line of every trajectory CSV.
pub const CSV_VERSION_LINE: &str = "# cqed trajectory v1";

/// Named series sharing one time axis.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTable {
    times: Vec<f64>,
    columns: IndexMap<String, Vec<f64>>,
}

impl SeriesTable {
    pub fn new(times: Vec<f64>, columns: IndexMap<String, Vec<f64>>) -> Result<Self> {
        for (name, col) in &columns {
            if col.len() != times.len() {
                return Err(Error::param(
                    "series",
                    format!("column `{name}` has {} values for {} times", col.len(), times.len()),
                ));
            }
        }
        Ok(SeriesTable { times, columns })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn columns(&self) -> &IndexMap<String, Vec<f64>> {
        &self.columns
    }

    pub fn series(&self, name: &str) -> Result<&[f64]> {
        self.columns
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownObservable(name.to_string()))
    }

    /// Version comment, `time_ns,<columns>` header, then one row per time in
    /// shortest round-trip scientific notation.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_VERSION_LINE}")?;
        let mut out = csv::Writer::from_writer(w);
        let mut header = Vec::with_capacity(self.columns.len() + 1);
        header.push("time_ns");
        header.extend(self.columns.keys().map(String::as_str));
        out.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for (k, t) in self.times.iter().enumerate() {
            record.clear();
            record.push(format!("{t:e}"));
            record.extend(self.columns.values().map(|c| format!("{:e}", c[k])));
            out.write_record(&record)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = BufReader::new(r);
        let mut first = String::new();
        reader.read_line(&mut first)?;
        if first.trim_end() != CSV_VERSION_LINE {
            return Err(Error::InvalidParameter {
                name: "csv",
                reason: format!("expected `{CSV_VERSION_LINE}`, found `{}`", first.trim_end()),
            });
        }
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("time_ns") {
            return Err(Error::param("csv", "first column must be time_ns"));
        }
        let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
        let mut times = Vec::new();
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::param("csv", format!("bad number `{s}`: {e}")))
            };
            times.push(parse(&rec[0])?);
            for (c, field) in cols.iter_mut().zip(rec.iter().skip(1)) {
                c.push(parse(field)?);
            }
        }
        SeriesTable::new(times, names.into_iter().zip(cols).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let mut cols = IndexMap::new();
        cols.insert("a".to_string(), vec![0.1, 1.0 / 3.0, -2.5e-17]);
        cols.insert("b".to_string(), vec![0.0, 1.0, f64::MIN_POSITIVE]);
        let table = SeriesTable::new(vec![0.0, 1e-5, 2e-5], cols).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# cqed trajectory v1\ntime_ns,a,b\n0e0,"));
        assert_eq!(SeriesTable::read_csv(buf.as_slice()).unwrap(), table);
    }

    #[test]
    fn length_mismatch_rejected() {
        let mut cols = IndexMap::new();
        cols.insert("a".to_string(), vec![0.1]);
        assert!(SeriesTable::new(vec![0.0, 1.0], cols).is_err());
    }
}
