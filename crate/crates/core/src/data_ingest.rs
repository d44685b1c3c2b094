//! Exogenous inputs: daily token price and Fear & Greed Index, plus the
//! reference concentration series used for calibration and validation.
//!
//! Market CSV: `date,price_usd,fgi` (one row per calendar day).
//! Reference CSV: `t,gini[,one_minus_nse][,whale_share][,n_holders]`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::{ParamError, RandomSource};

/// Simulation day index.
pub type Day = u32;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing required column `{0}`")]
    MissingColumn(&'static str),
    #[error("row {row}, column `{column}`: {message}")]
    Field {
        row: u64,
        column: &'static str,
        message: String,
    },
    #[error("row {row}: {missing} consecutive days missing after {after}")]
    Gap {
        row: u64,
        after: NaiveDate,
        missing: i64,
    },
    #[error("row {row}, column `{column}`: not strictly after the previous row")]
    NotIncreasing { row: u64, column: &'static str },
    #[error("no rows at or after the calendar anchor")]
    Empty,
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// Exogenous inputs for one simulated day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketDay {
    pub t: Day,
    pub date: NaiveDate,
    pub price: f64,
    pub fgi: u8,
}

/// Maps calendar dates onto day indices: `t = anchor.t + (date - anchor.date)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalendarAnchor {
    pub date: NaiveDate,
    pub t: Day,
}

impl Default for CalendarAnchor {
    /// 2020-09-01 is day 45 of the launch the model is fitted to.
    fn default() -> Self {
        Self {
            date: NaiveDate::from_ymd_opt(2020, 9, 1).expect("valid date"),
            t: 45,
        }
    }
}

impl CalendarAnchor {
    pub fn day_of(&self, date: NaiveDate) -> Option<Day> {
        let offset = (date - self.date).num_days() + i64::from(self.t);
        Day::try_from(offset).ok()
    }

    pub fn date_of(&self, t: Day) -> NaiveDate {
        self.date + Duration::days(i64::from(t) - i64::from(self.t))
    }
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<File, IngestError> {
    File::create(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn column(headers: &csv::StringRecord, name: &'static str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

fn required(headers: &csv::StringRecord, name: &'static str) -> Result<usize, IngestError> {
    column(headers, name).ok_or(IngestError::MissingColumn(name))
}

fn field<'r>(
    record: &'r csv::StringRecord,
    idx: usize,
    row: u64,
    column: &'static str,
) -> Result<&'r str, IngestError> {
    record
        .get(idx)
        .map(str::trim)
        .ok_or_else(|| IngestError::Field {
            row,
            column,
            message: "missing value".into(),
        })
}

fn parse<T: std::str::FromStr>(raw: &str, row: u64, column: &'static str) -> Result<T, IngestError>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>().map_err(|e| IngestError::Field {
        row,
        column,
        message: format!("cannot parse `{raw}`: {e}"),
    })
}

fn unit_interval(value: f64, row: u64, column: &'static str) -> Result<f64, IngestError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(IngestError::Field {
            row,
            column,
            message: format!("value {value} outside [0, 1]"),
        })
    }
}

pub fn load_market_series(
    path: impl AsRef<Path>,
    anchor: CalendarAnchor,
) -> Result<Vec<MarketDay>, IngestError> {
    parse_market_series(open(path.as_ref())?, anchor)
}

/// Parses a market CSV. Rows dated before the anchor are dropped; a single
/// missing day is filled by interpolation, longer gaps are rejected.
pub fn parse_market_series<R: Read>(
    reader: R,
    anchor: CalendarAnchor,
) -> Result<Vec<MarketDay>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let date_col = required(&headers, "date")?;
    let price_col = required(&headers, "price_usd")?;
    let fgi_col = required(&headers, "fgi")?;

    let mut out: Vec<MarketDay> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i as u64 + 1;
        let date: NaiveDate = parse(field(&record, date_col, row, "date")?, row, "date")?;
        let price: f64 = parse(
            field(&record, price_col, row, "price_usd")?,
            row,
            "price_usd",
        )?;
        if !(price > 0.0 && price.is_finite()) {
            return Err(IngestError::Field {
                row,
                column: "price_usd",
                message: format!("price must be positive, got {price}"),
            });
        }
        let fgi: i64 = parse(field(&record, fgi_col, row, "fgi")?, row, "fgi")?;
        if !(0..=100).contains(&fgi) {
            return Err(IngestError::Field {
                row,
                column: "fgi",
                message: format!("value {fgi} outside [0, 100]"),
            });
        }
        let fgi = fgi as u8;
        if date < anchor.date {
            continue;
        }

        if let Some(prev) = out.last().copied() {
            let step = (date - prev.date).num_days();
            if step <= 0 {
                return Err(IngestError::NotIncreasing {
                    row,
                    column: "date",
                });
            }
            match step {
                1 => {}
                2 => {
                    let t = anchor
                        .day_of(prev.date)
                        .expect("prev row is on or after anchor")
                        + 1;
                    out.push(MarketDay {
                        t,
                        date: prev.date + Duration::days(1),
                        price: 0.5 * (prev.price + price),
                        fgi: (0.5 * (f64::from(prev.fgi) + f64::from(fgi))).round() as u8,
                    });
                }
                _ => {
                    return Err(IngestError::Gap {
                        row,
                        after: prev.date,
                        missing: step - 1,
                    })
                }
            }
        }
        let t = anchor.day_of(date).expect("date is on or after anchor");
        out.push(MarketDay {
            t,
            date,
            price,
            fgi,
        });
    }
    if out.is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(out)
}

pub fn save_market_series(path: impl AsRef<Path>, days: &[MarketDay]) -> Result<(), IngestError> {
    write_market_series(create(path.as_ref())?, days)
}

pub fn write_market_series<W: Write>(writer: W, days: &[MarketDay]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "price_usd", "fgi"])?;
    for d in days {
        w.write_record([d.date.to_string(), d.price.to_string(), d.fgi.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoint {
    pub t: Day,
    pub gini: f64,
    pub one_minus_nse: Option<f64>,
    pub whale_share: Option<f64>,
    pub n_holders: Option<u64>,
}

/// Observed concentration series, strictly increasing in `t`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSeries {
    pub points: Vec<ReferencePoint>,
}

impl ReferenceSeries {
    pub fn get(&self, t: Day) -> Option<&ReferencePoint> {
        self.points
            .binary_search_by_key(&t, |p| p.t)
            .ok()
            .map(|i| &self.points[i])
    }

    pub fn has_nse(&self) -> bool {
        self.points.iter().any(|p| p.one_minus_nse.is_some())
    }

    pub fn has_whale_share(&self) -> bool {
        self.points.iter().any(|p| p.whale_share.is_some())
    }

    pub fn has_holders(&self) -> bool {
        self.points.iter().any(|p| p.n_holders.is_some())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn load_reference_series(path: impl AsRef<Path>) -> Result<ReferenceSeries, IngestError> {
    parse_reference_series(open(path.as_ref())?)
}

pub fn parse_reference_series<R: Read>(reader: R) -> Result<ReferenceSeries, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let t_col = required(&headers, "t")?;
    let gini_col = required(&headers, "gini")?;
    let nse_col = column(&headers, "one_minus_nse");
    let whale_col = column(&headers, "whale_share");
    let holders_col = column(&headers, "n_holders");

    let optional_unit = |record: &csv::StringRecord,
                         idx: Option<usize>,
                         row: u64,
                         name: &'static str|
     -> Result<Option<f64>, IngestError> {
        match idx.and_then(|i| record.get(i)).map(str::trim) {
            None | Some("") => Ok(None),
            Some(raw) => Ok(Some(unit_interval(parse(raw, row, name)?, row, name)?)),
        }
    };

    let mut points: Vec<ReferencePoint> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i as u64 + 1;
        let t: Day = parse(field(&record, t_col, row, "t")?, row, "t")?;
        if points.last().is_some_and(|p| p.t >= t) {
            return Err(IngestError::NotIncreasing { row, column: "t" });
        }
        let gini = unit_interval(
            parse(field(&record, gini_col, row, "gini")?, row, "gini")?,
            row,
            "gini",
        )?;
        let one_minus_nse = optional_unit(&record, nse_col, row, "one_minus_nse")?;
        let whale_share = optional_unit(&record, whale_col, row, "whale_share")?;
        let n_holders = match holders_col.and_then(|i| record.get(i)).map(str::trim) {
            None | Some("") => None,
            Some(raw) => Some(parse::<u64>(raw, row, "n_holders")?),
        };
        points.push(ReferencePoint {
            t,
            gini,
            one_minus_nse,
            whale_share,
            n_holders,
        });
    }
    Ok(ReferenceSeries { points })
}

pub fn save_reference_series(
    path: impl AsRef<Path>,
    series: &ReferenceSeries,
) -> Result<(), IngestError> {
    write_reference_series(create(path.as_ref())?, series)
}

/// Writes only the optional columns that carry at least one value.
pub fn write_reference_series<W: Write>(
    writer: W,
    series: &ReferenceSeries,
) -> Result<(), IngestError> {
    let (nse, whale, holders) = (
        series.has_nse(),
        series.has_whale_share(),
        series.has_holders(),
    );
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["t", "gini"];
    if nse {
        header.push("one_minus_nse");
    }
    if whale {
        header.push("whale_share");
    }
    if holders {
        header.push("n_holders");
    }
    w.write_record(&header)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for p in &series.points {
        let mut rec = vec![p.t.to_string(), p.gini.to_string()];
        if nse {
            rec.push(opt(p.one_minus_nse));
        }
        if whale {
            rec.push(opt(p.whale_share));
        }
        if holders {
            rec.push(p.n_holders.map(|n| n.to_string()).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// How the synthetic Fear & Greed Index evolves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FgiModel {
    /// `x' = mean + phi (x - mean) + noise_sd * Z`, clamped to [0, 100].
    Ar1 {
        mean: f64,
        phi: f64,
        noise_sd: f64,
        initial: f64,
    },
    /// Independent integer draws, uniform over 0..=100.
    Uniform,
}

impl Default for FgiModel {
    fn default() -> Self {
        FgiModel::Ar1 {
            mean: 55.0,
            phi: 0.9,
            noise_sd: 9.0,
            initial: 50.0,
        }
    }
}

/// Parameters of a synthetic market: geometric random walk price plus an
/// FGI process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticMarket {
    pub seed: u64,
    pub days: u32,
    pub price0: f64,
    /// Mean daily log-return.
    pub drift: f64,
    /// Daily log-return standard deviation.
    pub vol: f64,
    pub fgi: FgiModel,
    pub anchor: CalendarAnchor,
}

impl Default for SyntheticMarket {
    fn default() -> Self {
        Self {
            seed: 0,
            days: 501,
            price0: 30_000.0,
            drift: 0.0,
            vol: 0.05,
            fgi: FgiModel::default(),
            anchor: CalendarAnchor::default(),
        }
    }
}

pub fn synthetic_market_series(spec: &SyntheticMarket) -> Result<Vec<MarketDay>, IngestError> {
    if spec.days < 1 {
        return Err(ParamError::Domain {
            name: "days",
            requirement: "at least 1",
            value: f64::from(spec.days),
        }
        .into());
    }
    if !(spec.price0 > 0.0 && spec.price0.is_finite()) {
        return Err(ParamError::Domain {
            name: "price0",
            requirement: "strictly positive",
            value: spec.price0,
        }
        .into());
    }
    if !(spec.vol >= 0.0 && spec.vol.is_finite()) || !spec.drift.is_finite() {
        return Err(ParamError::Domain {
            name: "vol",
            requirement: "non-negative and finite (with finite drift)",
            value: spec.vol,
        }
        .into());
    }
    if let FgiModel::Ar1 { phi, noise_sd, .. } = spec.fgi {
        if !(phi > -1.0 && phi < 1.0) {
            return Err(ParamError::Domain {
                name: "fgi phi",
                requirement: "within (-1, 1)",
                value: phi,
            }
            .into());
        }
        if !(noise_sd >= 0.0) {
            return Err(ParamError::Domain {
                name: "fgi noise_sd",
                requirement: "non-negative",
                value: noise_sd,
            }
            .into());
        }
    }

    let mut rng = RandomSource::new(spec.seed);
    let mut price = spec.price0;
    let mut fgi_level = match spec.fgi {
        FgiModel::Ar1 { initial, .. } => initial.clamp(0.0, 100.0),
        FgiModel::Uniform => 50.0,
    };
    let mut out = Vec::with_capacity(spec.days as usize);
    for k in 0..spec.days {
        if k > 0 {
            price *= (spec.drift + spec.vol * rng.standard_normal()).exp();
        }
        let fgi = match spec.fgi {
            FgiModel::Ar1 {
                mean,
                phi,
                noise_sd,
                ..
            } => {
                if k > 0 {
                    fgi_level =
                        (mean + phi * (fgi_level - mean) + noise_sd * rng.standard_normal())
                            .clamp(0.0, 100.0);
                }
                fgi_level.round() as u8
            }
            FgiModel::Uniform => rng.index(101) as u8,
        };
        let t = spec.anchor.t + k;
        out.push(MarketDay {
            t,
            date: spec.anchor.date_of(t),
            price,
            fgi,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anchor() -> CalendarAnchor {
        CalendarAnchor::default()
    }

    #[test]
    fn three_valid_rows() {
        let csv =
            "date,price_usd,fgi\n2020-09-01,30000,40\n2020-09-02,31000.5,45\n2020-09-03,29000,50\n";
        let days = parse_market_series(csv.as_bytes(), anchor()).unwrap();
        assert_eq!(days.len(), 3);
        assert_eq!(
            days.iter().map(|d| d.t).collect::<Vec<_>>(),
            vec![45, 46, 47]
        );
        assert_eq!(days[1].price, 31000.5);
        assert_eq!(days[2].fgi, 50);
    }

    #[test]
    fn fgi_out_of_range_names_row() {
        let csv = "date,price_usd,fgi\n2020-09-01,30000,40\n2020-09-02,31000,101\n";
        let err = parse_market_series(csv.as_bytes(), anchor()).unwrap_err();
        match err {
            IngestError::Field { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "fgi");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_positive_price_rejected() {
        let csv = "date,price_usd,fgi\n2020-09-01,0,40\n";
        assert!(matches!(
            parse_market_series(csv.as_bytes(), anchor()),
            Err(IngestError::Field {
                column: "price_usd",
                ..
            })
        ));
    }

    #[test]
    fn single_gap_interpolated() {
        let csv = "date,price_usd,fgi\n2020-09-01,100,40\n2020-09-03,200,51\n";
        let days = parse_market_series(csv.as_bytes(), anchor()).unwrap();
        assert_eq!(days.len(), 3);
        assert_eq!(days[1].t, 46);
        assert_eq!(days[1].date, NaiveDate::from_ymd_opt(2020, 9, 2).unwrap());
        assert_eq!(days[1].price, 150.0);
        // mean 45.5 rounds to 46
        assert_eq!(days[1].fgi, 46);
    }

    #[test]
    fn multi_day_gap_rejected() {
        let csv = "date,price_usd,fgi\n2020-09-01,100,40\n2020-09-04,200,50\n";
        assert!(matches!(
            parse_market_series(csv.as_bytes(), anchor()),
            Err(IngestError::Gap {
                row: 2,
                missing: 2,
                ..
            })
        ));
    }

    #[test]
    fn duplicate_dates_rejected() {
        let csv = "date,price_usd,fgi\n2020-09-01,100,40\n2020-09-01,200,50\n";
        assert!(matches!(
            parse_market_series(csv.as_bytes(), anchor()),
            Err(IngestError::NotIncreasing { .. })
        ));
    }

    #[test]
    fn rows_before_anchor_dropped() {
        let csv = "date,price_usd,fgi\n2020-08-31,100,40\n2020-09-01,200,50\n";
        let days = parse_market_series(csv.as_bytes(), anchor()).unwrap();
        assert_eq!(days.len(), 1);
        assert_eq!(days[0].t, 45);
    }

    #[test]
    fn missing_column_reported() {
        let csv = "date,price\n2020-09-01,100\n";
        assert!(matches!(
            parse_market_series(csv.as_bytes(), anchor()),
            Err(IngestError::MissingColumn("price_usd"))
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_market_series("/nonexistent/market.csv", anchor()),
            Err(IngestError::Io { .. })
        ));
    }

    #[test]
    fn reference_with_only_gini() {
        let csv = "t,gini\n45,0.5\n46,0.51\n";
        let r = parse_reference_series(csv.as_bytes()).unwrap();
        assert_eq!(r.len(), 2);
        assert!(!r.has_nse());
        assert!(!r.has_whale_share());
        assert_eq!(r.get(46).unwrap().gini, 0.51);
        assert!(r.get(47).is_none());
    }

    #[test]
    fn reference_gini_out_of_range() {
        let csv = "t,gini,one_minus_nse\n45,1.2,0.3\n";
        assert!(matches!(
            parse_reference_series(csv.as_bytes()),
            Err(IngestError::Field {
                row: 1,
                column: "gini",
                ..
            })
        ));
    }

    #[test]
    fn synthetic_constant_when_no_noise() {
        let spec = SyntheticMarket {
            days: 50,
            vol: 0.0,
            drift: 0.0,
            ..SyntheticMarket::default()
        };
        let days = synthetic_market_series(&spec).unwrap();
        assert!(days.iter().all(|d| d.price == spec.price0));
        assert_eq!(days.len(), 50);
        assert_eq!(days[0].t, 45);
    }

    #[test]
    fn synthetic_is_deterministic() {
        let spec = SyntheticMarket {
            seed: 17,
            ..SyntheticMarket::default()
        };
        assert_eq!(
            synthetic_market_series(&spec).unwrap(),
            synthetic_market_series(&spec).unwrap()
        );
    }

    #[test]
    fn synthetic_rejects_bad_params() {
        for spec in [
            SyntheticMarket {
                days: 0,
                ..Default::default()
            },
            SyntheticMarket {
                price0: 0.0,
                ..Default::default()
            },
            SyntheticMarket {
                vol: -1.0,
                ..Default::default()
            },
        ] {
            assert!(synthetic_market_series(&spec).is_err());
        }
    }
}
