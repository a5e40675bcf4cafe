//! Published iteration parameters, embedded as a CSV data file and parsed
//! once. Keys are `(example, method, size)` where `size` is `m` for the grid
//! examples and `n` for example 4.

use std::sync::OnceLock;

use scsplit::solver::MethodKind;

const RAW: &str = include_str!("../data/paper_alpha.csv");

#[derive(Debug, Clone)]
pub struct AlphaRow {
    pub example: u8,
    pub method: MethodKind,
    pub size: usize,
    pub alpha: f64,
    /// Published iteration count, for reference output only.
    pub paper_iterations: usize,
}

pub fn rows() -> &'static [AlphaRow] {
    static ROWS: OnceLock<Vec<AlphaRow>> = OnceLock::new();
    ROWS.get_or_init(|| {
        let mut out = Vec::new();
        for line in RAW.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("example,") {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f.len(), 5, "bad alpha table row: {line}");
            out.push(AlphaRow {
                example: f[0].parse().expect("example id"),
                method: f[1].parse().expect("method"),
                size: f[2].parse().expect("size"),
                alpha: f[3].parse().expect("alpha"),
                paper_iterations: f[4].parse().expect("iterations"),
            });
        }
        out
    })
}

pub fn lookup(example: u8, method: MethodKind, size: usize) -> Option<&'static AlphaRow> {
    rows()
        .iter()
        .find(|r| r.example == example && r.method == method && r.size == size)
}
