//! File schemas shared by the CLI and the reports.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::coeff::CoeffPoly;
use crate::error::{Error, Result};
use crate::operator::OddOperator;
use crate::window::Window;

/// Integer-indexed table, serialized as a JSON object keyed by the decimal
/// index in numeric order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndexTable(pub BTreeMap<i64, CoeffPoly>);

impl Serialize for IndexTable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (i, v) in &self.0 {
            map.serialize_entry(&i.to_string(), v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for IndexTable {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, CoeffPoly>::deserialize(d)?;
        let mut out = BTreeMap::new();
        for (key, v) in raw {
            let i: i64 = key
                .trim()
                .parse()
                .map_err(|_| D::Error::custom(format!("table key {key:?} is not an integer")))?;
            if out.insert(i, v).is_some() {
                return Err(D::Error::custom(format!("duplicate table key {i}")));
            }
        }
        Ok(IndexTable(out))
    }
}

/// `{"k": int, "window": [lo, hi], "f": {...}, "g": {...}}`. Missing keys
/// inside the window are zero; keys outside the window are rejected at
/// load.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorFile {
    pub k: i64,
    pub window: Window,
    #[serde(default)]
    pub f: IndexTable,
    #[serde(default)]
    pub g: IndexTable,
}

impl OperatorFile {
    pub fn from_operator(op: &OddOperator) -> Self {
        OperatorFile {
            k: op.k(),
            window: op.window(),
            f: IndexTable(op.f_table().clone()),
            g: IndexTable(op.g_table().clone()),
        }
    }

    pub fn to_operator(&self) -> Result<OddOperator> {
        OddOperator::from_tables(self.k, self.window, self.f.0.clone(), self.g.0.clone())
    }

    pub fn parse(text: &str) -> Result<OddOperator> {
        let file: OperatorFile =
            serde_json::from_str(text).map_err(|e| Error::Load(e.to_string()))?;
        file.to_operator()
    }

    pub fn load(path: &Path) -> Result<OddOperator> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Load(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}
