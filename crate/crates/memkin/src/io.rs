//! Artifact encodings: VKF1 field dumps and CSV tables.
//!
//! Numbers are written in Rust's shortest round-trip form, so every table
//! parses back to the exact in-memory values.

use std::path::Path;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::VelocityGrid;
use crate::norms::MomentsRecord;

pub const VKF1_MAGIC: &[u8; 4] = b"VKF1";

pub const MOMENTS_COLUMNS: [&str; 8] = ["t", "mass", "p1", "p2", "p3", "energy", "entropy", "l2_lambda_norm"];

fn format_err(what: &'static str, detail: impl Into<String>) -> Error {
    Error::Format { what, detail: detail.into() }
}

/// Magic, three `u32` dimensions, the values third-axis-fastest and the
/// half-width, all little-endian.
pub fn encode_vkf1(field: &ScalarField) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(4 + 12 + 8 * g.len() + 8);
    out.extend_from_slice(VKF1_MAGIC);
    for _ in 0..3 {
        out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    }
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&g.half_width().to_le_bytes());
    out
}

pub fn decode_vkf1(bytes: &[u8]) -> Result<ScalarField> {
    if bytes.len() < 16 || &bytes[..4] != VKF1_MAGIC {
        return Err(format_err("VKF1 field", "missing VKF1 magic"));
    }
    let dim = |k: usize| u32::from_le_bytes(bytes[4 + 4 * k..8 + 4 * k].try_into().unwrap()) as usize;
    let dims = [dim(0), dim(1), dim(2)];
    if dims[0] != dims[1] || dims[1] != dims[2] {
        return Err(format_err("VKF1 field", format!("only cubic grids are supported, got dims {dims:?}")));
    }
    let len = dims[0].checked_pow(3).ok_or_else(|| format_err("VKF1 field", "dimension overflow"))?;
    let expected = 16 + 8 * len + 8;
    if bytes.len() != expected {
        return Err(format_err("VKF1 field", format!("expected {expected} bytes for n = {}, got {}", dims[0], bytes.len())));
    }
    let read = |off: usize| f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    let values: Vec<f64> = (0..len).map(|i| read(16 + 8 * i)).collect();
    let grid = VelocityGrid::new(dims[0], read(16 + 8 * len))?;
    ScalarField::from_values(grid, values)
}

pub fn read_vkf1(path: &Path) -> Result<ScalarField> {
    decode_vkf1(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}

/// A CSV table of floats with named columns.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl NumericTable {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|x| format!("{x:?}"))).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = csv::Reader::from_reader(bytes);
        let columns: Vec<String> = r.headers().map_err(|e| format_err("CSV table", e.to_string()))?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (k, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| format_err("CSV table", e.to_string()))?;
            let row = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| format_err("CSV table", format!("row {k}: {s:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != columns.len() {
                return Err(format_err("CSV table", format!("row {k} has {} fields, header has {}", row.len(), columns.len())));
            }
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::decode(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
    }
}

pub fn moments_table(times: &[f64], moments: &[MomentsRecord]) -> NumericTable {
    let mut t = NumericTable::new(&MOMENTS_COLUMNS);
    for (time, m) in times.iter().zip(moments) {
        t.push(vec![*time, m.mass, m.momentum[0], m.momentum[1], m.momentum[2], m.energy, m.entropy, m.l2_lambda_norm]);
    }
    t
}

pub fn moments_from_table(table: &NumericTable) -> Result<(Vec<f64>, Vec<MomentsRecord>)> {
    if table.columns != MOMENTS_COLUMNS {
        return Err(format_err("moments CSV", format!("unexpected columns {:?}", table.columns)));
    }
    Ok(table
        .rows
        .iter()
        .map(|r| (r[0], MomentsRecord { mass: r[1], momentum: [r[2], r[3], r[4]], energy: r[5], entropy: r[6], l2_lambda_norm: r[7] }))
        .unzip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sample, Maxwellian};
    use crate::norms::moments;
    use proptest::prelude::*;

    #[test]
    fn vkf1_layout() {
        let g = VelocityGrid::new(8, 4.0).unwrap();
        let f = sample(&g, |v| v[0] + 10.0 * v[1] + 100.0 * v[2]).unwrap();
        let bytes = encode_vkf1(&f);
        assert_eq!(&bytes[..4], b"VKF1");
        assert_eq!(bytes.len(), 16 + 8 * 512 + 8);
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 8);
        // third axis fastest
        let second = f64::from_le_bytes(bytes[24..32].try_into().unwrap());
        let first = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
        assert!((second - first - 100.0 * g.dv()).abs() < 1e-12);
        assert_eq!(f64::from_le_bytes(bytes[bytes.len() - 8..].try_into().unwrap()), 4.0);
        assert_eq!(decode_vkf1(&bytes).unwrap(), f);
    }

    #[test]
    fn vkf1_rejects_damage() {
        let g = VelocityGrid::new(8, 4.0).unwrap();
        let bytes = encode_vkf1(&Maxwellian::default().sample(&g));
        assert!(decode_vkf1(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_vkf1(&bad).is_err());
        let mut skew = bytes;
        skew[8] = 9;
        assert!(decode_vkf1(&skew).is_err());
    }

    #[test]
    fn moments_round_trip() {
        let g = VelocityGrid::new(8, 4.0).unwrap();
        let f = Maxwellian::new(1.3, 0.7).unwrap().sample(&g);
        let m = moments(&f);
        let times = vec![0.0, 0.025, 1.0 / 3.0];
        let table = moments_table(&times, &[m, m, m]);
        let back = NumericTable::decode(&table.encode()).unwrap();
        assert_eq!(back, table);
        let (t2, m2) = moments_from_table(&back).unwrap();
        assert_eq!(t2, times);
        assert_eq!(m2, vec![m; 3]);
        assert_eq!(String::from_utf8(table.encode()).unwrap().lines().next().unwrap(), "t,mass,p1,p2,p3,energy,entropy,l2_lambda_norm");
    }

    #[test]
    fn table_rejects_garbage() {
        assert!(NumericTable::decode(b"a,b\n1,x\n").is_err());
        assert!(moments_from_table(&NumericTable::new(&["t"])).is_err());
    }

    proptest! {
        #[test]
        fn tables_round_trip_exactly(rows in prop::collection::vec(prop::array::uniform3(prop::num::f64::ANY), 0..20)) {
            let mut t = NumericTable::new(&["a", "b", "c"]);
            for r in &rows {
                t.push(r.to_vec());
            }
            let back = NumericTable::decode(&t.encode()).unwrap();
            prop_assert_eq!(back.rows.len(), rows.len());
            for (x, y) in back.rows.iter().flatten().zip(t.rows.iter().flatten()) {
                prop_assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
            }
        }
    }
}
