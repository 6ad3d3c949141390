use std::fmt::Write as _;

use super::TraceRecord;

/// Per-node message counts as source and as destination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub src: Vec<u64>,
    pub dst: Vec<u64>,
}

impl Histogram {
    pub fn from_records(records: &[TraceRecord], n: usize) -> Self {
        let mut h = Self {
            src: vec![0; n],
            dst: vec![0; n],
        };
        for r in records {
            h.src[r.src] += 1;
            h.dst[r.dst] += 1;
        }
        h
    }

    pub fn total(&self) -> u64 {
        self.src.iter().sum()
    }

    /// Nodes sharing the maximum source count.
    pub fn top_sources(&self) -> Vec<usize> {
        argmax(&self.src)
    }

    pub fn top_destinations(&self) -> Vec<usize> {
        argmax(&self.dst)
    }

    /// CSV with header `node,src_count,dst_count`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("node,src_count,dst_count\n");
        for (node, (a, b)) in self.src.iter().zip(&self.dst).enumerate() {
            let _ = writeln!(s, "{node},{a},{b}");
        }
        s
    }
}

fn argmax(counts: &[u64]) -> Vec<usize> {
    let max = counts.iter().copied().max().unwrap_or(0);
    counts
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c == max)
        .map(|(i, _)| i)
        .collect()
}
