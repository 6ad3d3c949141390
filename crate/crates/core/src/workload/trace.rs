//! Plain-text trace files: one `cycle,src,dst,n_flits` record per line,
//! blank lines and lines starting with `#` ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use log::warn;

use super::TraceRecord;
use crate::{Error, Result};

pub fn parse_trace(text: &str, n: usize, origin: &Path) -> Result<Vec<TraceRecord>> {
    let err = |line: usize, msg: String| Error::TraceParse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(err(
                lineno,
                format!(
                    "expected 4 fields (cycle,src,dst,n_flits), found {}",
                    fields.len()
                ),
            ));
        }
        let num = |i: usize, name: &str| {
            fields[i]
                .parse::<u64>()
                .map_err(|e| err(lineno, format!("bad {name} {:?}: {e}", fields[i])))
        };
        let cycle = num(0, "cycle")?;
        let src = num(1, "src")? as usize;
        let dst = num(2, "dst")? as usize;
        let n_flits = num(3, "n_flits")? as usize;
        for (name, node) in [("src", src), ("dst", dst)] {
            if node >= n {
                return Err(err(
                    lineno,
                    format!("{name} {node} out of range for N = {n}"),
                ));
            }
        }
        if n_flits == 0 {
            return Err(err(lineno, "n_flits must be at least 1".into()));
        }
        out.push(TraceRecord {
            cycle,
            src,
            dst,
            n_flits,
        });
    }
    if !out.windows(2).all(|w| w[0].cycle <= w[1].cycle) {
        warn!("{}: records not sorted by cycle; sorting", origin.display());
        out.sort_by_key(|r| r.cycle);
    }
    Ok(out)
}

pub fn load_trace(path: &Path, n: usize) -> Result<Vec<TraceRecord>> {
    let text = fs::read_to_string(path)?;
    parse_trace(&text, n, path)
}

pub fn write_trace(records: &[TraceRecord]) -> String {
    let mut s = String::with_capacity(records.len() * 12);
    for r in records {
        let _ = writeln!(s, "{},{},{},{}", r.cycle, r.src, r.dst, r.n_flits);
    }
    s
}

pub fn save_trace(path: &Path, records: &[TraceRecord]) -> Result<()> {
    fs::write(path, write_trace(records))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<TraceRecord>> {
        parse_trace(text, 32, Path::new("t.trace"))
    }

    #[test]
    fn single_record() {
        assert_eq!(
            parse("0,15,3,2").unwrap(),
            vec![TraceRecord {
                cycle: 0,
                src: 15,
                dst: 3,
                n_flits: 2
            }]
        );
    }

    #[test]
    fn empty_and_comments() {
        assert!(parse("").unwrap().is_empty());
        assert_eq!(parse("# header\n\n 4, 1, 2, 3 \n").unwrap().len(), 1);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse("0,1,2,2\n1,2,x,2\n").unwrap_err();
        assert_eq!(e.to_string().split(':').nth(1), Some("2"));
        let e = parse("0,1,2\n").unwrap_err();
        assert!(matches!(e, Error::TraceParse { line: 1, .. }));
        let e = parse("# c\n0,40,2,2\n").unwrap_err();
        assert!(matches!(e, Error::TraceParse { line: 2, .. }));
        assert!(e.to_string().contains("out of range"));
        assert!(parse("0,1,2,0").is_err());
    }

    #[test]
    fn unsorted_input_is_sorted() {
        let recs = parse("5,0,1,2\n1,2,3,2\n5,4,4,1\n").unwrap();
        let cycles: Vec<_> = recs.iter().map(|r| r.cycle).collect();
        assert_eq!(cycles, vec![1, 5, 5]);
        assert_eq!(recs[1].src, 0);
    }
}
