//! District/season records, CSV ingestion and zero replacement.

use std::collections::HashSet;
use std::fmt;

use crate::{Error, Result, Scalar};

/// Number of input variables per district: {area, production} x three seasons.
pub const VARIABLE_COUNT: usize = 6;

/// Constant substituted for cells recorded as exactly zero.
pub const ZERO_REPLACEMENT: f64 = 0.01;

/// Header row of the district CSV format.
pub const CSV_HEADER: [&str; VARIABLE_COUNT + 1] = [
    "district",
    "kuruvai_area_ha",
    "kuruvai_production_t",
    "samba_area_ha",
    "samba_production_t",
    "kodai_area_ha",
    "kodai_production_t",
];

/// The six variables, in the fixed order used by every array in this crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variable {
    KuruvaiArea,
    KuruvaiProduction,
    SambaArea,
    SambaProduction,
    KodaiArea,
    KodaiProduction,
}

impl Variable {
    pub const ALL: [Variable; VARIABLE_COUNT] = [
        Variable::KuruvaiArea,
        Variable::KuruvaiProduction,
        Variable::SambaArea,
        Variable::SambaProduction,
        Variable::KodaiArea,
        Variable::KodaiProduction,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Column name in the CSV formats.
    pub fn column(self) -> &'static str {
        CSV_HEADER[self.index() + 1]
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

/// One district's raw values: hectares for areas, tonnes for production.
#[derive(Clone, Debug, PartialEq)]
pub struct DistrictRecord<T> {
    pub name: String,
    pub values: [T; VARIABLE_COUNT],
}

impl<T: Scalar> DistrictRecord<T> {
    pub fn new(name: impl Into<String>, values: [T; VARIABLE_COUNT]) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }

    pub fn get(&self, v: Variable) -> T {
        self.values[v.index()]
    }

    pub fn kuruvai_area(&self) -> T {
        self.get(Variable::KuruvaiArea)
    }

    pub fn kuruvai_production(&self) -> T {
        self.get(Variable::KuruvaiProduction)
    }

    pub fn samba_area(&self) -> T {
        self.get(Variable::SambaArea)
    }

    pub fn samba_production(&self) -> T {
        self.get(Variable::SambaProduction)
    }

    pub fn kodai_area(&self) -> T {
        self.get(Variable::KodaiArea)
    }

    pub fn kodai_production(&self) -> T {
        self.get(Variable::KodaiProduction)
    }

    pub fn zero_cells(&self) -> usize {
        self.values.iter().filter(|v| **v == T::zero()).count()
    }

    /// Number of cells holding the replacement constant (missing data after
    /// preprocessing).
    pub fn replacement_cells(&self) -> usize {
        let marker = T::lit(ZERO_REPLACEMENT);
        self.values.iter().filter(|v| **v == marker).count()
    }

    /// Fails when any cell is exactly zero; such a record would divide by zero in
    /// the relative-error step.
    pub fn ensure_no_zero(&self) -> Result<()> {
        if let Some(v) = Variable::ALL.iter().find(|v| self.get(**v) == T::zero()) {
            return Err(Error::Precondition(format!(
                "district {:?} has a zero {} cell; run preprocessing first",
                self.name, v
            )));
        }
        Ok(())
    }
}

/// An ordered collection of district records.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    pub label: String,
    pub records: Vec<DistrictRecord<T>>,
    pub preprocessed: bool,
}

impl<T: Scalar> Dataset<T> {
    /// Builds an unpreprocessed dataset, rejecting duplicate names and
    /// negative or non-finite cells.
    pub fn new(label: impl Into<String>, records: Vec<DistrictRecord<T>>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, r) in records.iter().enumerate() {
            let line = i as u64 + 2;
            for (j, v) in r.values.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line,
                        column: j + 2,
                        value: v.to_string(),
                    });
                }
                if *v < T::zero() {
                    return Err(Error::Negative {
                        line,
                        column: j + 2,
                        value: v.to_string(),
                    });
                }
            }
            if !seen.insert(r.name.as_str()) {
                return Err(Error::DuplicateDistrict {
                    line,
                    name: r.name.clone(),
                });
            }
        }
        Ok(Self {
            label: label.into(),
            records,
            preprocessed: false,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.records.iter().map(|r| r.name.clone()).collect()
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.records.iter().position(|r| r.name == name)
    }

    pub fn zero_cells(&self) -> usize {
        self.records.iter().map(DistrictRecord::zero_cells).sum()
    }

    /// Replaces every cell exactly equal to zero with [`ZERO_REPLACEMENT`].
    /// Idempotent: already-preprocessed input comes back unchanged.
    pub fn preprocess(&self) -> Self {
        let marker = T::lit(ZERO_REPLACEMENT);
        let records = self
            .records
            .iter()
            .map(|r| DistrictRecord {
                name: r.name.clone(),
                values: r.values.map(|v| if v == T::zero() { marker } else { v }),
            })
            .collect();
        Self {
            label: self.label.clone(),
            records,
            preprocessed: true,
        }
    }

    /// Fails unless the dataset is flagged preprocessed and holds no zero cell.
    pub fn ensure_preprocessed(&self) -> Result<()> {
        if !self.preprocessed {
            return Err(Error::Precondition(format!(
                "dataset {:?} has not been preprocessed",
                self.label
            )));
        }
        self.records
            .iter()
            .try_for_each(DistrictRecord::ensure_no_zero)
    }

    /// Serializes to the district CSV format. Values are printed with the
    /// shortest representation that parses back to the same bits.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        for r in &self.records {
            let mut row = Vec::with_capacity(VARIABLE_COUNT + 1);
            row.push(r.name.clone());
            row.extend(r.values.iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        Ok(finish_csv(w))
    }
}

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory csv flush cannot fail");
    String::from_utf8(bytes).expect("csv writer emits utf-8 for utf-8 input")
}

/// Parses a district CSV document: one header row and seven columns per row
/// (name plus six non-negative numbers). Row order is preserved.
pub fn parse_csv<T: Scalar>(text: &str, label: impl Into<String>) -> Result<Dataset<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut rows = reader.records();
    let header = match rows.next() {
        Some(h) => h?,
        None => return Err(Error::MissingHeader),
    };
    if header.len() != CSV_HEADER.len() {
        return Err(Error::Structure {
            line: line_of(&header),
            expected: CSV_HEADER.len(),
            found: header.len(),
        });
    }

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for row in rows {
        let row = row?;
        let line = line_of(&row);
        if row.len() != CSV_HEADER.len() {
            return Err(Error::Structure {
                line,
                expected: CSV_HEADER.len(),
                found: row.len(),
            });
        }
        let name = &row[0];
        if name.is_empty() {
            return Err(Error::EmptyCell { line, column: 1 });
        }
        let mut values = [T::zero(); VARIABLE_COUNT];
        for (j, slot) in values.iter_mut().enumerate() {
            let column = j + 2;
            let cell = &row[j + 1];
            if cell.is_empty() {
                return Err(Error::EmptyCell { line, column });
            }
            let v: T = cell
                .parse()
                .ok()
                .filter(|v: &T| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line,
                    column,
                    value: cell.to_string(),
                })?;
            if v < T::zero() {
                return Err(Error::Negative {
                    line,
                    column,
                    value: cell.to_string(),
                });
            }
            *slot = v;
        }
        if !seen.insert(name.to_string()) {
            return Err(Error::DuplicateDistrict {
                line,
                name: name.to_string(),
            });
        }
        records.push(DistrictRecord::new(name, values));
    }

    Ok(Dataset {
        label: label.into(),
        records,
        preprocessed: false,
    })
}

fn line_of(row: &csv::StringRecord) -> u64 {
    row.position().map_or(0, |p| p.line())
}
