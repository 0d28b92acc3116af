//! Annual records, dataset ingestion, price deflation and the linear EROEI model.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of records: central differences need an interior point plus both endpoints.
pub const MIN_RECORDS: usize = 4;

/// A `(year, value)` series.
pub type YearSeries = Vec<(i32, f64)>;

/// One year of the sampled state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnualRecord {
    pub year: i32,
    /// World oil production, Mt.
    pub production: f64,
    /// Yearly mean price, constant 2014 US$ per barrel.
    pub price: f64,
    /// World population, persons.
    pub population: Option<f64>,
    /// Energy return on energy invested (dimensionless).
    pub eroei: Option<f64>,
}

impl AnnualRecord {
    pub fn new(year: i32, production: f64, price: f64) -> Result<Self> {
        let record = AnnualRecord {
            year,
            production,
            price,
            population: None,
            eroei: None,
        };
        record.validate(0)?;
        Ok(record)
    }

    pub fn with_population(mut self, population: f64) -> Result<Self> {
        self.population = Some(population);
        self.validate(0)?;
        Ok(self)
    }

    pub fn with_eroei(mut self, eroei: f64) -> Result<Self> {
        self.eroei = Some(eroei);
        self.validate(0)?;
        Ok(self)
    }

    fn validate(&self, row: usize) -> Result<()> {
        let positive = |field, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(Error::OutOfRange {
                    row,
                    field,
                    requirement: "finite and > 0",
                    value,
                })
            }
        };
        positive("production", self.production)?;
        positive("price", self.price)?;
        if let Some(p) = self.population {
            positive("population", p)?;
        }
        if let Some(e) = self.eroei {
            if !(e.is_finite() && e >= 1.0) {
                return Err(Error::OutOfRange {
                    row,
                    field: "eroei",
                    requirement: "finite and >= 1",
                    value: e,
                });
            }
        }
        Ok(())
    }
}

/// Contiguous yearly records, sorted by year.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    records: Vec<AnnualRecord>,
    source_label: String,
}

impl Dataset {
    /// Sorts by year and checks every dataset invariant.
    pub fn new(mut records: Vec<AnnualRecord>, source_label: impl Into<String>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Empty);
        }
        for (i, r) in records.iter().enumerate() {
            r.validate(i + 1)?;
        }
        records.sort_by_key(|r| r.year);
        for pair in records.windows(2) {
            if pair[0].year == pair[1].year {
                return Err(Error::DuplicateYear(pair[0].year));
            }
        }
        let missing: Vec<i32> = records
            .windows(2)
            .flat_map(|pair| (pair[0].year + 1)..pair[1].year)
            .collect();
        if !missing.is_empty() {
            return Err(Error::YearGap { missing });
        }
        if records.len() < MIN_RECORDS {
            return Err(Error::TooFewRecords {
                found: records.len(),
                required: MIN_RECORDS,
            });
        }
        Ok(Dataset {
            records,
            source_label: source_label.into(),
        })
    }

    pub fn records(&self) -> &[AnnualRecord] {
        &self.records
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn first_year(&self) -> i32 {
        self.records[0].year
    }

    pub fn last_year(&self) -> i32 {
        self.records[self.records.len() - 1].year
    }

    pub fn years(&self) -> Vec<i32> {
        self.records.iter().map(|r| r.year).collect()
    }

    pub fn contains_year(&self, year: i32) -> bool {
        self.get(year).is_some()
    }

    pub fn get(&self, year: i32) -> Option<&AnnualRecord> {
        let offset = year.checked_sub(self.first_year())?;
        usize::try_from(offset)
            .ok()
            .and_then(|i| self.records.get(i))
    }

    pub fn production_series(&self) -> YearSeries {
        self.records.iter().map(|r| (r.year, r.production)).collect()
    }

    pub fn price_series(&self) -> YearSeries {
        self.records.iter().map(|r| (r.year, r.price)).collect()
    }

    /// Attaches population figures; every dataset year must be covered.
    pub fn join_population(&self, population: &[(i32, f64)]) -> Result<Dataset> {
        let lookup: BTreeMap<i32, f64> = population.iter().copied().collect();
        let records = self
            .records
            .iter()
            .map(|r| {
                let p = lookup.get(&r.year).copied().ok_or(Error::MissingYear {
                    what: "population",
                    year: r.year,
                })?;
                r.with_population(p)
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(records, self.source_label.clone())
    }
}

/// How the price column is to be interpreted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PriceMode {
    /// Price column is already in constant base-year dollars.
    Real,
    /// Price column is nominal and must be deflated with the given index column.
    Nominal { deflator: String, base_year: i32 },
}

/// Header names for each field of the CSV input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub year: String,
    pub production: String,
    pub price: String,
    pub population: Option<String>,
    pub eroei: Option<String>,
    pub price_mode: PriceMode,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            year: "year".into(),
            production: "production_mt".into(),
            price: "price_usd2014".into(),
            population: None,
            eroei: None,
            price_mode: PriceMode::Real,
        }
    }
}

struct Table {
    headers: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.iter().map(str::to_owned).collect();
        let rows = rdr.records().collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Table { headers, rows })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))
    }

    // Row numbers are 1-based data rows (the header is row 0).
    fn number(&self, row: usize, col: usize) -> Result<f64> {
        let cell = self.rows[row].get(col).unwrap_or("");
        cell.parse::<f64>().map_err(|_| Error::Parse {
            row: row + 1,
            column: self.headers[col].clone(),
            value: cell.to_owned(),
        })
    }

    fn year(&self, row: usize, col: usize) -> Result<i32> {
        let cell = self.rows[row].get(col).unwrap_or("");
        cell.parse::<i32>().map_err(|_| Error::Parse {
            row: row + 1,
            column: self.headers[col].clone(),
            value: cell.to_owned(),
        })
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

/// Reads a dataset from a CSV file.
pub fn load_dataset(path: impl AsRef<Path>, columns: &ColumnMap) -> Result<Dataset> {
    let path = path.as_ref();
    parse_dataset(open(path)?, columns, path.display().to_string())
}

/// Reads a dataset from any CSV source.
pub fn parse_dataset(
    reader: impl Read,
    columns: &ColumnMap,
    source_label: impl Into<String>,
) -> Result<Dataset> {
    let table = Table::read(reader)?;
    let year_col = table.column(&columns.year)?;
    let prod_col = table.column(&columns.production)?;
    let price_col = table.column(&columns.price)?;
    let pop_col = columns
        .population
        .as_deref()
        .map(|c| table.column(c))
        .transpose()?;
    let eroei_col = columns.eroei.as_deref().map(|c| table.column(c)).transpose()?;
    let deflator_col = match &columns.price_mode {
        PriceMode::Real => None,
        PriceMode::Nominal { deflator, base_year } => Some((table.column(deflator)?, *base_year)),
    };
    if table.rows.is_empty() {
        return Err(Error::Empty);
    }

    let mut records = Vec::with_capacity(table.rows.len());
    let mut nominal = Vec::new();
    let mut index = Vec::new();
    for row in 0..table.rows.len() {
        let year = table.year(row, year_col)?;
        let price = table.number(row, price_col)?;
        let record = AnnualRecord {
            year,
            production: table.number(row, prod_col)?,
            price,
            population: pop_col.map(|c| table.number(row, c)).transpose()?,
            eroei: eroei_col.map(|c| table.number(row, c)).transpose()?,
        };
        record.validate(row + 1)?;
        if let Some((col, _)) = deflator_col {
            nominal.push((year, price));
            index.push((year, table.number(row, col)?));
        }
        records.push(record);
    }

    if let Some((_, base_year)) = deflator_col {
        let real: BTreeMap<i32, f64> = deflate_prices(&nominal, &index, base_year)?
            .into_iter()
            .collect();
        for r in &mut records {
            r.price = real[&r.year];
        }
    }
    Dataset::new(records, source_label)
}

/// Reads a two-column `(year, value)` series from a CSV file.
pub fn load_series(path: impl AsRef<Path>, year_column: &str, value_column: &str) -> Result<YearSeries> {
    parse_series(open(path.as_ref())?, year_column, value_column)
}

pub fn parse_series(reader: impl Read, year_column: &str, value_column: &str) -> Result<YearSeries> {
    let table = Table::read(reader)?;
    let yc = table.column(year_column)?;
    let vc = table.column(value_column)?;
    (0..table.rows.len())
        .map(|row| Ok((table.year(row, yc)?, table.number(row, vc)?)))
        .collect()
}

/// Converts nominal prices to constant base-year dollars:
/// `real(y) = nominal(y) · index(base) / index(y)`.
pub fn deflate_prices(nominal: &[(i32, f64)], deflator: &[(i32, f64)], base_year: i32) -> Result<YearSeries> {
    let index: BTreeMap<i32, f64> = deflator.iter().copied().collect();
    let base = *index.get(&base_year).ok_or(Error::MissingYear {
        what: "deflator index",
        year: base_year,
    })?;
    nominal
        .iter()
        .map(|&(year, price)| {
            let idx = *index.get(&year).ok_or(Error::MissingYear {
                what: "deflator index",
                year,
            })?;
            if !(idx.is_finite() && idx > 0.0) {
                return Err(Error::OutOfRange {
                    row: 0,
                    field: "deflator index",
                    requirement: "finite and > 0",
                    value: idx,
                });
            }
            // Renormalised index: base year maps to exactly 1.
            let ratio = if year == base_year { 1.0 } else { base / idx };
            Ok((year, price * ratio))
        })
        .collect()
}

/// Production per person, in tonnes per person.
pub fn per_capita(dataset: &Dataset) -> Result<YearSeries> {
    dataset
        .records()
        .iter()
        .map(|r| {
            let pop = r.population.ok_or(Error::MissingYear {
                what: "population",
                year: r.year,
            })?;
            Ok((r.year, r.production * 1e6 / pop))
        })
        .collect()
}

/// Divides every value by the value at `reference_year`.
pub fn nondimensionalize(series: &[(i32, f64)], reference_year: i32) -> Result<YearSeries> {
    let reference = series
        .iter()
        .find(|(y, _)| *y == reference_year)
        .map(|(_, v)| *v)
        .ok_or(Error::MissingYear {
            what: "reference value",
            year: reference_year,
        })?;
    if reference == 0.0 || !reference.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "reference value at {reference_year} is {reference}"
        )));
    }
    Ok(series.iter().map(|&(y, v)| (y, v / reference)).collect())
}

/// EROEI varying linearly in time through two anchor points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EroeiModel {
    year_start: i32,
    e_start: f64,
    year_end: i32,
    e_end: f64,
}

/// Value of the EROEI model at a point in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EroeiValue {
    pub value: f64,
    /// `true` when the query year lies outside the anchor interval.
    pub extrapolated: bool,
}

impl EroeiModel {
    pub const DEFAULT_E_START: f64 = 30.0;
    pub const DEFAULT_E_END: f64 = 15.0;

    pub fn new(year_start: i32, e_start: f64, year_end: i32, e_end: f64) -> Result<Self> {
        if year_end <= year_start {
            return Err(Error::InvalidModel(format!(
                "year_end ({year_end}) must be after year_start ({year_start})"
            )));
        }
        if !(e_start.is_finite() && e_start > 0.0 && e_end.is_finite() && e_end > 0.0) {
            return Err(Error::InvalidModel(format!(
                "anchor values must be positive, got {e_start} and {e_end}"
            )));
        }
        Ok(EroeiModel {
            year_start,
            e_start,
            year_end,
            e_end,
        })
    }

    /// Default linear decline (first year, 30) -> (last year, 15). This is a
    /// configurable assumption, not measured data.
    pub fn default_for(dataset: &Dataset) -> Self {
        EroeiModel {
            year_start: dataset.first_year(),
            e_start: Self::DEFAULT_E_START,
            year_end: dataset.last_year(),
            e_end: Self::DEFAULT_E_END,
        }
    }

    pub fn year_start(&self) -> i32 {
        self.year_start
    }
    pub fn e_start(&self) -> f64 {
        self.e_start
    }
    pub fn year_end(&self) -> i32 {
        self.year_end
    }
    pub fn e_end(&self) -> f64 {
        self.e_end
    }

    /// Change of EROEI per year.
    pub fn slope(&self) -> f64 {
        (self.e_end - self.e_start) / f64::from(self.year_end - self.year_start)
    }

    pub fn is_decreasing(&self) -> bool {
        self.e_end < self.e_start
    }

    pub fn at(&self, year: f64) -> EroeiValue {
        let span = f64::from(self.year_end - self.year_start);
        let frac = (year - f64::from(self.year_start)) / span;
        EroeiValue {
            value: self.e_start + frac * (self.e_end - self.e_start),
            extrapolated: year < f64::from(self.year_start) || year > f64::from(self.year_end),
        }
    }

    /// Inverse of [`EroeiModel::at`]; `None` for a constant model.
    pub fn year_for(&self, eroei: f64) -> Option<f64> {
        if self.e_end == self.e_start {
            return None;
        }
        let span = f64::from(self.year_end - self.year_start);
        Some(f64::from(self.year_start) + span * (self.e_start - eroei) / (self.e_start - self.e_end))
    }
}

pub fn eroei_at(model: &EroeiModel, year: f64) -> EroeiValue {
    model.at(year)
}

/// Where the EROEI used by an analysis comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EroeiSource {
    Model(EroeiModel),
    /// The dataset's own `eroei` column.
    PerYear,
}

impl EroeiSource {
    pub fn eroei(&self, dataset: &Dataset, year: i32) -> Result<f64> {
        match self {
            EroeiSource::Model(m) => Ok(m.at(f64::from(year)).value),
            EroeiSource::PerYear => dataset
                .get(year)
                .and_then(|r| r.eroei)
                .ok_or(Error::MissingField { field: "eroei", year }),
        }
    }
}

/// The datasets shipped with the repository.
pub mod bundled {
    use super::*;

    pub const OIL_CSV: &str = include_str!("../../../data/oil_1965_2014.csv");
    pub const POPULATION_CSV: &str = include_str!("../../../data/world_population.csv");
    pub const OIL_LABEL: &str = "world oil production (Mt) and crude price (2014 US$/bbl), 1965-2014";

    /// Production/price joined with world population.
    pub fn dataset() -> Dataset {
        let oil = parse_dataset(OIL_CSV.as_bytes(), &ColumnMap::default(), OIL_LABEL)
            .expect("bundled oil data is valid");
        let pop = population();
        oil.join_population(&pop).expect("bundled population covers every year")
    }

    pub fn population() -> YearSeries {
        parse_series(POPULATION_CSV.as_bytes(), "year", "population").expect("bundled population is valid")
    }

    pub fn nominal_columns() -> ColumnMap {
        ColumnMap {
            price: "price_nominal_usd".into(),
            price_mode: PriceMode::Nominal {
                deflator: "cpi_us".into(),
                base_year: 2014,
            },
            ..ColumnMap::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn csv(rows: &str) -> String {
        format!("year,production_mt,price_usd2014\n{rows}")
    }

    #[test]
    fn parses_and_sorts() {
        let ds = parse_dataset(
            csv("1999,3490,25.5\n1998,3420,17.1\n2000,3600,39\n2001,3610,32\n").as_bytes(),
            &ColumnMap::default(),
            "t",
        )
        .unwrap();
        assert_eq!(ds.years(), vec![1998, 1999, 2000, 2001]);
        assert_eq!(ds.get(1998).unwrap().production, 3420.0);
        assert_eq!(ds.get(1998).unwrap().price, 17.1);
    }

    #[test]
    fn empty_file_rejected() {
        let err = parse_dataset(csv("").as_bytes(), &ColumnMap::default(), "t").unwrap_err();
        assert!(matches!(err, Error::Empty));
        let err = parse_dataset("".as_bytes(), &ColumnMap::default(), "t").unwrap_err();
        assert!(matches!(err, Error::MissingColumn(_)));
    }

    #[test]
    fn gap_reported() {
        let err = parse_dataset(
            csv("1965,1,1\n1966,1,1\n1968,1,1\n1969,1,1\n").as_bytes(),
            &ColumnMap::default(),
            "t",
        )
        .unwrap_err();
        match err {
            Error::YearGap { missing } => assert_eq!(missing, vec![1967]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_column_named() {
        let cols = ColumnMap {
            population: Some("pop".into()),
            ..ColumnMap::default()
        };
        let err = parse_dataset(csv("1965,1,1\n").as_bytes(), &cols, "t").unwrap_err();
        assert!(matches!(err, Error::MissingColumn(c) if c == "pop"));
    }

    #[test]
    fn non_positive_value_reports_row() {
        let err = parse_dataset(
            csv("1965,1,1\n1966,0,1\n1967,1,1\n1968,1,1\n").as_bytes(),
            &ColumnMap::default(),
            "t",
        )
        .unwrap_err();
        assert!(matches!(err, Error::OutOfRange { row: 2, field: "production", .. }));
    }

    #[test]
    fn duplicate_and_short_datasets_rejected() {
        let err = parse_dataset(csv("1965,1,1\n1965,1,1\n1966,1,1\n1967,1,1\n").as_bytes(), &ColumnMap::default(), "t")
            .unwrap_err();
        assert!(matches!(err, Error::DuplicateYear(1965)));
        let err = parse_dataset(csv("1965,1,1\n1966,1,1\n").as_bytes(), &ColumnMap::default(), "t").unwrap_err();
        assert!(matches!(err, Error::TooFewRecords { found: 2, .. }));
    }

    #[test]
    fn eroei_below_one_rejected() {
        assert!(AnnualRecord::new(2000, 1.0, 1.0).unwrap().with_eroei(0.5).is_err());
        assert!(AnnualRecord::new(2000, 1.0, 1.0).unwrap().with_population(0.0).is_err());
    }

    #[test]
    fn deflation_examples() {
        let out = deflate_prices(&[(2000, 50.0), (2014, 90.0)], &[(2000, 0.8), (2014, 1.0)], 2014).unwrap();
        assert_eq!(out, vec![(2000, 62.5), (2014, 90.0)]);
        // Index not normalised to 1 in the base year.
        let out = deflate_prices(&[(2000, 50.0)], &[(2000, 80.0), (2014, 100.0)], 2014).unwrap();
        assert!((out[0].1 - 62.5).abs() < 1e-12);
        let err = deflate_prices(&[(1999, 1.0)], &[(2014, 1.0)], 2014).unwrap_err();
        assert!(matches!(err, Error::MissingYear { year: 1999, .. }));
    }

    #[test]
    fn per_capita_arithmetic() {
        let r = AnnualRecord::new(2000, 4000.0, 30.0).unwrap().with_population(7.0e9).unwrap();
        let recs: Vec<_> = (0..4).map(|i| AnnualRecord { year: 2000 + i, ..r }).collect();
        let ds = Dataset::new(recs, "t").unwrap();
        let pc = per_capita(&ds).unwrap();
        assert!((pc[0].1 - 0.571_428_571_4).abs() < 1e-9);
    }

    #[test]
    fn per_capita_requires_population() {
        let recs: Vec<_> = (0..4).map(|i| AnnualRecord::new(2000 + i, 1.0, 1.0).unwrap()).collect();
        let ds = Dataset::new(recs, "t").unwrap();
        assert!(matches!(per_capita(&ds), Err(Error::MissingYear { year: 2000, .. })));
    }

    #[test]
    fn nondimensionalize_examples() {
        let s = vec![(1, 10.0), (2, 20.0), (3, 5.0)];
        let n: Vec<f64> = nondimensionalize(&s, 1).unwrap().into_iter().map(|p| p.1).collect();
        assert_eq!(n, vec![1.0, 2.0, 0.5]);
        let c = vec![(1, 7.0), (2, 7.0)];
        assert!(nondimensionalize(&c, 2).unwrap().iter().all(|p| p.1 == 1.0));
        assert!(nondimensionalize(&s, 9).is_err());
    }

    #[test]
    fn eroei_examples() {
        let m = EroeiModel::new(1965, 30.0, 2014, 15.0).unwrap();
        assert_eq!(m.at(1965.0).value, 30.0);
        assert!(!m.at(1965.0).extrapolated);
        assert!((m.at(1989.5).value - 22.5).abs() < 1e-12);
        let v = m.at(2034.0);
        // 30 - 15 * 69/49
        assert!((v.value - 8.877_551_020_408_163).abs() < 1e-12);
        assert!(v.extrapolated);
        assert!(EroeiModel::new(2000, 1.0, 2000, 1.0).is_err());
        assert!(EroeiModel::new(2000, 0.0, 2001, 1.0).is_err());
    }

    #[test]
    fn bundled_data_shape() {
        let ds = bundled::dataset();
        assert_eq!(ds.len(), 50);
        assert_eq!((ds.first_year(), ds.last_year()), (1965, 2014));
        assert_eq!(ds.get(1998).unwrap().production, 3557.3);
        assert!(ds.records().iter().all(|r| r.population.is_some()));
    }

    #[test]
    fn bundled_nominal_path_matches_real_column() {
        let real = bundled::dataset();
        let nominal = parse_dataset(bundled::OIL_CSV.as_bytes(), &bundled::nominal_columns(), "n").unwrap();
        // Hand check for 1998: 12.72 * 236.736 / 163.0 = 18.4743...
        let p1998 = nominal.get(1998).unwrap().price;
        assert!((p1998 - 12.72 * 236.736 / 163.0).abs() < 1e-12);
        for (a, b) in real.records().iter().zip(nominal.records()) {
            // the real column is rounded to cents
            assert!((a.price - b.price).abs() <= 0.005 + 1e-9, "{}: {} vs {}", a.year, a.price, b.price);
        }
    }

    #[test]
    fn bundled_nondimensional_production() {
        let ds = bundled::dataset();
        let n = nondimensionalize(&ds.production_series(), 1965).unwrap();
        assert_eq!(n.last().unwrap().1, 4220.6 / 1567.3);
    }

    proptest! {
        #[test]
        fn deflation_idempotent_on_normalised_series(
            prices in prop::collection::vec(0.1f64..500.0, 5),
            idx in prop::collection::vec(0.2f64..3.0, 4),
        ) {
            let years: Vec<i32> = (2010..2015).collect();
            let nominal: Vec<_> = years.iter().copied().zip(prices).collect();
            let mut index: Vec<_> = years[..4].iter().copied().zip(idx).collect();
            index.push((2014, 1.0));
            let once = deflate_prices(&nominal, &index, 2014).unwrap();
            let unit: Vec<_> = years.iter().map(|&y| (y, 1.0)).collect();
            let twice = deflate_prices(&once, &unit, 2014).unwrap();
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a.1 - b.1).abs() <= 1e-12 * a.1.abs());
            }
        }

        #[test]
        fn nondimensional_reference_is_one(values in prop::collection::vec(1e-6f64..1e6, 1..30), pick in 0usize..30) {
            let series: Vec<_> = values.iter().enumerate().map(|(i, v)| (1900 + i as i32, *v)).collect();
            let year = 1900 + (pick % series.len()) as i32;
            let out = nondimensionalize(&series, year).unwrap();
            prop_assert_eq!(out[(year - 1900) as usize].1, 1.0);
        }

        #[test]
        fn per_capita_scale_invariant(prod in 1.0f64..1e4, pop in 1e6f64..1e10, scale in 1e-3f64..1e3) {
            let build = |p: f64, q: f64| {
                let recs: Vec<_> = (0..4)
                    .map(|i| AnnualRecord::new(2000 + i, p, 1.0).unwrap().with_population(q).unwrap())
                    .collect();
                per_capita(&Dataset::new(recs, "t").unwrap()).unwrap()[0].1
            };
            let a = build(prod, pop);
            let b = build(prod * scale, pop * scale);
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }

        #[test]
        fn eroei_is_affine(e0 in 1.0f64..50.0, e1 in 1.0f64..50.0, a in 1900.0f64..2100.0, b in 1900.0f64..2100.0) {
            let m = EroeiModel::new(1965, e0, 2014, e1).unwrap();
            let mid = m.at((a + b) / 2.0).value;
            let avg = (m.at(a).value + m.at(b).value) / 2.0;
            prop_assert!((mid - avg).abs() <= 1e-12 * avg.abs().max(1.0));
        }
    }
}
