use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{Dataset, Provenance};
use crate::error::{Error, Result};

/// Sidecar path holding a dataset's provenance: `<path>.meta.json`.
pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Writes `x0,...,x{d-1},y` rows using the shortest round-trip decimal form.
/// Provenance, when present, goes to the `.meta.json` sidecar.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file));
    let csv_err = |e: csv::Error| Error::io(path, e.into());
    let mut header: Vec<String> = (0..ds.dim()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    w.write_record(&header).map_err(csv_err)?;
    let mut row: Vec<String> = Vec::with_capacity(ds.dim() + 1);
    for (x, y) in ds.iter() {
        row.clear();
        row.extend(x.iter().map(|v| format!("{v:?}")));
        row.push(format!("{y:?}"));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    if let Some(p) = &ds.provenance {
        let meta = meta_path(path);
        let mut f = BufWriter::new(File::create(&meta).map_err(|e| Error::io(&meta, e))?);
        serde_json::to_writer_pretty(&mut f, p)?;
        f.write_all(b"\n").map_err(|e| Error::io(&meta, e))?;
    }
    Ok(())
}

/// Reads a dataset written by [`write_csv`]; the header must have `d + 1` columns.
pub fn read_csv(path: impl AsRef<Path>, d: usize) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header = r.headers().map_err(|e| Error::Parse {
        line: 1,
        reason: e.to_string(),
    })?;
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::Parse {
            line: 1,
            reason: "missing header row".into(),
        });
    }
    if header.len() != d + 1 {
        return Err(Error::DimensionMismatch {
            expected: d + 1,
            found: header.len(),
        });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line,
                reason: format!("column {j}: `{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    reason: format!("column {j}: non-finite value"),
                });
            }
            if j < d {
                xs.push(v);
            } else {
                ys.push(v);
            }
        }
    }
    let mut ds = Dataset::new(d, xs, ys)?;
    let meta = meta_path(path);
    if meta.exists() {
        let f = File::open(&meta).map_err(|e| Error::io(&meta, e))?;
        let p: Provenance = serde_json::from_reader(f)?;
        ds.provenance = Some(p);
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate, LabelModel, MarginalSpec};
    use crate::numerics::Rng;
    use proptest::prelude::*;

    #[test]
    fn width_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        std::fs::write(&p, "x0,x1,y\n1,2,3\n").unwrap();
        assert!(matches!(read_csv(&p, 4), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        std::fs::write(&p, "").unwrap();
        assert!(matches!(read_csv(&p, 2), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn bad_number_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.csv");
        std::fs::write(&p, "x0,y\n1,2\n3,oops\n").unwrap();
        match read_csv(&p, 1) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn provenance_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        let (ds, _) = generate(&MarginalSpec::gaussian(2), &LabelModel::clean(), &[0.6, 0.0], 50, &mut Rng::new(1)).unwrap();
        write_csv(&ds, &p).unwrap();
        assert!(meta_path(&p).exists());
        let back = read_csv(&p, 2).unwrap();
        assert_eq!(back, ds);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("x0,x1,y\n"));
        assert!(!text.contains('\r'));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip_is_bit_exact(
            rows in prop::collection::vec((prop::collection::vec(-1e6f64..1e6, 3), -1e3f64..1e3), 1..40)
        ) {
            let samples: Vec<(Vec<f64>, f64)> = rows;
            let ds = Dataset::from_samples(3, &samples).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("r.csv");
            write_csv(&ds, &p).unwrap();
            let back = read_csv(&p, 3).unwrap();
            for (a, b) in ds.features().iter().zip(back.features()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            for (a, b) in ds.labels().iter().zip(back.labels()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
