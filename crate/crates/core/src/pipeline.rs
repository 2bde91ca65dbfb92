//! Tabular data path: CSV ingestion, two-class subsetting, constant-column
//! removal and iterative VIF pruning.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{DesignMatrix, ResponseKind, ResponseVector, RngStream};

/// `1 - R^2` at or below this value is reported as an infinite VIF.
pub const VIF_EXACT_FIT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Numeric,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnType,
    pub values: Vec<f64>,
}

/// Columns in file order; one of them is the response.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    pub columns: Vec<Column>,
    pub response: usize,
    /// Rows dropped at ingestion because a cell was missing.
    pub rows_rejected: usize,
}

/// Which column is the response and which columns are binary.
#[derive(Debug, Clone, Default)]
pub struct CsvSchema {
    pub response: String,
    pub binary: Vec<String>,
    /// Treat any column whose values are all 0/1 as binary.
    pub infer_binary: bool,
}

impl CsvSchema {
    pub fn new(response: impl Into<String>) -> Self {
        Self {
            response: response.into(),
            ..Self::default()
        }
    }

    pub fn with_binary<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.binary.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn inferring_binary(mut self) -> Self {
        self.infer_binary = true;
        self
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "NA" | "na" | "NaN" | "nan" | "?" | "null")
}

impl TabularDataset {
    pub fn nrows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn response_column(&self) -> &Column {
        &self.columns[self.response]
    }

    pub fn response_name(&self) -> &str {
        &self.columns[self.response].name
    }

    pub fn feature_indices(&self) -> Vec<usize> {
        (0..self.columns.len()).filter(|&j| j != self.response).collect()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.feature_indices()
            .into_iter()
            .map(|j| self.columns[j].name.clone())
            .collect()
    }

    /// `n x k` matrix of the feature columns (response excluded).
    pub fn feature_matrix(&self) -> DMatrix<f64> {
        let idx = self.feature_indices();
        DMatrix::from_fn(self.nrows(), idx.len(), |i, j| self.columns[idx[j]].values[i])
    }

    /// Design matrix from the features, optionally with a leading intercept column.
    pub fn design(&self, intercept: bool) -> Result<DesignMatrix> {
        let features = self.feature_matrix();
        if intercept {
            DesignMatrix::with_intercept(&features)
        } else {
            DesignMatrix::new(features)
        }
    }

    pub fn response_vector(&self, kind: ResponseKind) -> Result<ResponseVector> {
        ResponseVector::new(DVector::from_vec(self.response_column().values.clone()), kind)
    }

    fn keep_rows(&self, keep: &[bool]) -> Self {
        let columns = self
            .columns
            .iter()
            .map(|c| Column {
                values: c.values.iter().zip(keep).filter(|(_, &k)| k).map(|(&v, _)| v).collect(),
                ..c.clone()
            })
            .collect();
        Self {
            columns,
            ..self.clone()
        }
    }

    /// Drops the named feature columns.
    pub fn without_columns(&self, names: &HashSet<String>) -> Self {
        let response_name = self.response_name().to_string();
        let columns: Vec<Column> = self
            .columns
            .iter()
            .filter(|c| c.name == response_name || !names.contains(&c.name))
            .cloned()
            .collect();
        let response = columns.iter().position(|c| c.name == response_name).unwrap_or(0);
        Self {
            columns,
            response,
            rows_rejected: self.rows_rejected,
        }
    }
}

/// Parses CSV with a header row. Rows with a missing cell are skipped and
/// counted; any other unparsable cell is an error naming its location.
pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<TabularDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(Error::Data("missing header row".into()));
    }
    let response = header
        .iter()
        .position(|h| *h == schema.response)
        .ok_or_else(|| Error::Data(format!("response column '{}' not found in header", schema.response)))?;
    for name in &schema.binary {
        if !header.contains(name) {
            return Err(Error::Data(format!("binary column '{name}' not found in header")));
        }
    }
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    let mut rows_rejected = 0;
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        if record.len() != header.len() {
            return Err(Error::Parse {
                row,
                column: String::new(),
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        if record.iter().any(|c| is_missing(c.trim())) {
            rows_rejected += 1;
            continue;
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                row,
                column: header[j].clone(),
                message: format!("'{cell}' is not numeric"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: header[j].clone(),
                    message: "non-finite value".into(),
                });
            }
            if schema.binary.contains(&header[j]) && v != 0.0 && v != 1.0 {
                return Err(Error::Parse {
                    row,
                    column: header[j].clone(),
                    message: format!("binary column holds {v}"),
                });
            }
            values[j].push(v);
        }
    }
    let columns = header
        .into_iter()
        .zip(values)
        .enumerate()
        .map(|(j, (name, values))| {
            let declared = schema.binary.contains(&name);
            let inferred = schema.infer_binary
                && j != response
                && !values.is_empty()
                && values.iter().all(|&v| v == 0.0 || v == 1.0);
            let kind = if declared || inferred {
                ColumnType::Binary
            } else {
                ColumnType::Numeric
            };
            Column { name, kind, values }
        })
        .collect();
    Ok(TabularDataset {
        columns,
        response,
        rows_rejected,
    })
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<TabularDataset> {
    read_csv(File::open(path)?, schema)
}

/// Writes all columns in order; values use the shortest round-trip representation.
pub fn write_csv_to<W: Write>(ds: &TabularDataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ds.columns.iter().map(|c| c.name.as_str()))?;
    for i in 0..ds.nrows() {
        w.write_record(ds.columns.iter().map(|c| c.values[i].to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(ds: &TabularDataset, path: impl AsRef<Path>) -> Result<()> {
    write_csv_to(ds, File::create(path)?)
}

/// Keeps rows whose response is `class_a` or `class_b`, recoded to 0 and 1.
pub fn subset_binary(ds: &TabularDataset, class_a: f64, class_b: f64) -> Result<TabularDataset> {
    if class_a == class_b {
        return Err(Error::Data("the two classes must differ".into()));
    }
    let y = &ds.response_column().values;
    for class in [class_a, class_b] {
        if !y.contains(&class) {
            return Err(Error::Data(format!(
                "class {class} does not occur in '{}'",
                ds.response_name()
            )));
        }
    }
    let keep: Vec<bool> = y.iter().map(|&v| v == class_a || v == class_b).collect();
    let mut out = ds.keep_rows(&keep);
    let resp = &mut out.columns[out.response];
    for v in resp.values.iter_mut() {
        *v = if *v == class_a { 0.0 } else { 1.0 };
    }
    resp.kind = ColumnType::Binary;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PruneReason {
    Constant,
    Vif,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PruneEntry {
    pub column: String,
    #[serde(serialize_with = "serialize_vif")]
    pub vif_at_removal: Option<f64>,
    pub reason: PruneReason,
}

fn serialize_vif<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) if x.is_infinite() => s.serialize_str("inf"),
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_none(),
    }
}

/// Removal history, in order.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PruneLog {
    pub entries: Vec<PruneEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PruneLog {
    pub fn removed(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.column.as_str()).collect()
    }

    pub fn vif_removals(&self) -> usize {
        self.entries.iter().filter(|e| e.reason == PruneReason::Vif).count()
    }
}

/// Removes zero-variance feature columns.
pub fn drop_constant_columns(ds: &TabularDataset) -> (TabularDataset, Vec<PruneEntry>) {
    let mut removed = HashSet::new();
    let mut entries = Vec::new();
    for j in ds.feature_indices() {
        let c = &ds.columns[j];
        let constant = c.values.first().is_none_or(|&v0| c.values.iter().all(|&v| v == v0));
        if constant {
            removed.insert(c.name.clone());
            entries.push(PruneEntry {
                column: c.name.clone(),
                vif_at_removal: None,
                reason: PruneReason::Constant,
            });
        }
    }
    (ds.without_columns(&removed), entries)
}

fn centered_columns(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut c = x.clone();
    for mut col in c.column_iter_mut() {
        let m = col.mean();
        col.add_scalar_mut(-m);
    }
    c
}

/// Variance inflation factors `1 / (1 - R_j^2)`, each `R_j^2` from regressing
/// column `j` on the other columns plus an intercept. Exact fits give `+inf`.
pub fn vif(x: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (n, p) = x.shape();
    if p < 2 {
        return Err(Error::Dimension("VIF needs at least two columns".into()));
    }
    if n <= p {
        return Err(Error::Dimension("VIF needs more rows than columns".into()));
    }
    let xc = centered_columns(x);
    let gram = xc.tr_mul(&xc);
    let mut out = Vec::with_capacity(p);
    for j in 0..p {
        let tss = gram[(j, j)];
        if tss <= 0.0 {
            return Err(Error::Data(format!("column {j} is constant; VIF undefined")));
        }
        let others: Vec<usize> = (0..p).filter(|&k| k != j).collect();
        let g = DMatrix::from_fn(p - 1, p - 1, |a, b| gram[(others[a], others[b])]);
        let rhs = DVector::from_fn(p - 1, |a, _| gram[(others[a], j)]);
        // min-norm solve so that collinear regressors still give the projection
        let coef = g
            .svd(true, true)
            .solve(&rhs, 1e-12 * gram.diagonal().amax())
            .map_err(|e| Error::Data(e.to_string()))?;
        let mut resid = xc.column(j).clone_owned();
        for (a, &k) in others.iter().enumerate() {
            resid.axpy(-coef[a], &xc.column(k), 1.0);
        }
        let unexplained = resid.norm_squared() / tss;
        out.push(if unexplained <= VIF_EXACT_FIT {
            f64::INFINITY
        } else {
            1.0 / unexplained
        });
    }
    Ok(out)
}

/// Result of [`iterative_vif_prune`].
#[derive(Debug, Clone)]
pub struct VifPrune {
    pub features: DMatrix<f64>,
    /// Indices (into the input columns) of the survivors.
    pub kept: Vec<usize>,
    pub log: PruneLog,
    pub final_vifs: Vec<f64>,
}

/// Repeatedly removes the column with the largest VIF while it is at least
/// `threshold`, recomputing after every removal. Ties go to the lowest index.
pub fn iterative_vif_prune(x: &DMatrix<f64>, names: &[String], threshold: f64) -> Result<VifPrune> {
    if !(threshold > 1.0) {
        return Err(Error::Config(format!("VIF threshold must exceed 1, got {threshold}")));
    }
    if names.len() != x.ncols() {
        return Err(Error::Dimension("one name per column is required".into()));
    }
    let mut kept: Vec<usize> = (0..x.ncols()).collect();
    let mut log = PruneLog::default();
    let final_vifs;
    loop {
        if kept.len() < 2 {
            log.warnings
                .push(format!("stopped with {} column(s) left; VIF needs two", kept.len()));
            final_vifs = vec![1.0; kept.len()];
            break;
        }
        let sub = x.select_columns(&kept);
        let v = vif(&sub)?;
        let (worst, &max) =
            v.iter().enumerate().fold(
                (0, &f64::NEG_INFINITY),
                |best, cur| if *cur.1 > *best.1 { cur } else { best },
            );
        if max < threshold {
            final_vifs = v;
            break;
        }
        let col = kept.remove(worst);
        log.entries.push(PruneEntry {
            column: names[col].clone(),
            vif_at_removal: Some(max),
            reason: PruneReason::Vif,
        });
    }
    Ok(VifPrune {
        features: x.select_columns(&kept),
        kept,
        log,
        final_vifs,
    })
}

/// Outcome of [`preprocess`].
#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub dataset: TabularDataset,
    pub log: PruneLog,
    pub final_vifs: Vec<f64>,
}

/// Two-class subset, constant-column removal, then VIF pruning.
pub fn preprocess(ds: &TabularDataset, classes: Option<(f64, f64)>, vif_threshold: f64) -> Result<Preprocessed> {
    let subset = match classes {
        Some((a, b)) => subset_binary(ds, a, b)?,
        None => ds.clone(),
    };
    let (reduced, constant) = drop_constant_columns(&subset);
    let names = reduced.feature_names();
    let pruned = iterative_vif_prune(&reduced.feature_matrix(), &names, vif_threshold)?;
    let kept: HashSet<usize> = pruned.kept.iter().copied().collect();
    let drop: HashSet<String> = names
        .iter()
        .enumerate()
        .filter(|(j, _)| !kept.contains(j))
        .map(|(_, n)| n.clone())
        .collect();
    let mut log = PruneLog {
        entries: constant,
        warnings: pruned.log.warnings.clone(),
    };
    log.entries.extend(pruned.log.entries);
    Ok(Preprocessed {
        dataset: reduced.without_columns(&drop),
        log,
        final_vifs: pruned.final_vifs,
    })
}

const QUANTITATIVE: [&str; 10] = [
    "Elevation",
    "Aspect",
    "Slope",
    "Horizontal_Distance_To_Hydrology",
    "Vertical_Distance_To_Hydrology",
    "Horizontal_Distance_To_Roadways",
    "Hillshade_9am",
    "Hillshade_Noon",
    "Hillshade_3pm",
    "Horizontal_Distance_To_Fire_Points",
];

/// Synthetic data with the forest cover-type column layout: 10 quantitative
/// columns, 4 one-hot wilderness areas, 40 one-hot soil types and a
/// `Cover_Type` response in 1..=7.
///
/// Classes 1 and 2 dominate and are separated mostly by elevation. Soil types
/// 35..=40 occur only in the minor classes, `Hillshade_3pm` is nearly a linear
/// combination of the other two hillshades, and vertical distance to hydrology
/// tracks the horizontal distance.
pub fn synthetic_covertype(rows: usize, seed: u64) -> TabularDataset {
    let mut rng = RngStream::new(seed, 0xC0FE).rng();
    let std = Normal::new(0.0, 1.0).unwrap();
    let expo = Exp::new(1.0f64 / 270.0).unwrap();
    let mut cols: Vec<Vec<f64>> = (0..55).map(|_| Vec::with_capacity(rows)).collect();
    for _ in 0..rows {
        let z_elev: f64 = std.sample(&mut rng);
        let elevation = (2950.0 + 250.0 * z_elev).round();
        let aspect = rng.random_range(0.0f64..360.0).round();
        let slope = (14.0 + 7.0 * std.sample(&mut rng)).abs().round();
        let hdh = expo.sample(&mut rng).round();
        let vdh = (0.25 * hdh + 35.0 * std.sample(&mut rng)).round();
        let hdr = rng.random_range(0.0f64..7000.0).round();
        let h9 = (212.0 + 26.0 * std.sample(&mut rng)).clamp(0.0, 255.0).round();
        let hn = (223.0 + 20.0 * std.sample(&mut rng)).clamp(0.0, 255.0).round();
        let h3 = (1.4 * hn - 0.9 * h9 + 100.0 + 3.0 * std.sample(&mut rng)).round();
        let hdf = rng.random_range(0.0f64..7000.0).round();
        let wild = rng.random_range(0..4usize);

        let minor = rng.random::<f64>() < 0.15;
        let soil = if minor {
            rng.random_range(0..40usize)
        } else {
            rng.random_range(0..34usize)
        };
        let z_slope = (slope - 14.0) / 7.0;
        let eta = -0.2 + 1.3 * z_elev + 0.3 * z_slope + if wild == 0 { 0.4 } else { 0.0 } + 0.02 * (soil % 7) as f64;
        let cover = if minor {
            rng.random_range(3..=7usize) as f64
        } else if rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp()) {
            2.0
        } else {
            1.0
        };
        let quant = [elevation, aspect, slope, hdh, vdh, hdr, h9, hn, h3, hdf];
        for (j, v) in quant.into_iter().enumerate() {
            cols[j].push(v);
        }
        for w in 0..4 {
            cols[10 + w].push(if w == wild { 1.0 } else { 0.0 });
        }
        for s in 0..40 {
            cols[14 + s].push(if s == soil { 1.0 } else { 0.0 });
        }
        cols[54].push(cover);
    }
    let names = QUANTITATIVE
        .iter()
        .map(|s| s.to_string())
        .chain((1..=4).map(|k| format!("Wilderness_Area{k}")))
        .chain((1..=40).map(|k| format!("Soil_Type{k}")))
        .chain(std::iter::once("Cover_Type".to_string()));
    let columns = names
        .zip(cols)
        .enumerate()
        .map(|(j, (name, values))| Column {
            name,
            kind: if (10..54).contains(&j) {
                ColumnType::Binary
            } else {
                ColumnType::Numeric
            },
            values,
        })
        .collect();
    TabularDataset {
        columns,
        response: 54,
        rows_rejected: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, schema: &CsvSchema) -> Result<TabularDataset> {
        read_csv(text.as_bytes(), schema)
    }

    #[test]
    fn parses_declared_types() {
        let ds = parse(
            "y,flag,x\n1,0,2.5\n2,1,3.5\n1,1,-1\n",
            &CsvSchema::new("y").with_binary(["flag"]),
        )
        .unwrap();
        assert_eq!(ds.nrows(), 3);
        assert_eq!(ds.columns[1].kind, ColumnType::Binary);
        assert_eq!(ds.columns[2].kind, ColumnType::Numeric);
        assert_eq!(ds.columns[2].values, vec![2.5, 3.5, -1.0]);
        assert_eq!(ds.feature_names(), vec!["flag", "x"]);
    }

    #[test]
    fn non_numeric_cell_names_location() {
        let err = parse("y,x\n1,2\n0,abc\n", &CsvSchema::new("y")).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "x");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn binary_violation_and_missing_response() {
        assert!(parse("y,b\n1,2\n", &CsvSchema::new("y").with_binary(["b"])).is_err());
        assert!(parse("y,b\n1,0\n", &CsvSchema::new("z")).is_err());
        assert!(parse("", &CsvSchema::new("y")).is_err());
    }

    #[test]
    fn missing_cells_reject_rows() {
        let ds = parse("y,x\n1,2\n0,\n1,NA\n0,4\n", &CsvSchema::new("y")).unwrap();
        assert_eq!(ds.nrows(), 2);
        assert_eq!(ds.rows_rejected, 2);
    }

    #[test]
    fn subset_recodes_and_preserves_order() {
        let ds = parse("c,x\n1,10\n2,20\n3,30\n2,40\n", &CsvSchema::new("c")).unwrap();
        let s = subset_binary(&ds, 1.0, 2.0).unwrap();
        assert_eq!(s.response_column().values, vec![0.0, 1.0, 1.0]);
        assert_eq!(s.columns[1].values, vec![10.0, 20.0, 40.0]);
        assert!(subset_binary(&ds, 1.0, 1.0).is_err());
        assert!(subset_binary(&ds, 1.0, 9.0).is_err());
    }

    #[test]
    fn constant_columns_dropped() {
        let ds = parse("y,z,x\n1,0,1\n0,0,2\n1,0,3\n", &CsvSchema::new("y")).unwrap();
        let (out, log) = drop_constant_columns(&ds);
        assert_eq!(out.feature_names(), vec!["x"]);
        assert_eq!(log.len(), 1);
        assert_eq!(log[0].reason, PruneReason::Constant);
        let (same, none) = drop_constant_columns(&out);
        assert_eq!(same, out);
        assert!(none.is_empty());
    }

    #[test]
    fn vif_orthogonal_columns_is_one() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0]);
        for v in vif(&x).unwrap() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn vif_near_collinear_is_large() {
        let mut rng = RngStream::new(4, 0).rng();
        let x = DMatrix::from_fn(50, 2, |_, _| 0.0);
        let mut x = x;
        for i in 0..50 {
            let a: f64 = rng.random_range(-1.0..1.0);
            x[(i, 0)] = a;
            x[(i, 1)] = 2.0 * a + 1e-3 * rng.random_range(-1.0..1.0);
        }
        let v = vif(&x).unwrap();
        assert!(v[0] > 5.0 && v[1] > 5.0);
        let mut dup = x.clone();
        dup.set_column(1, &(x.column(0) * 3.0));
        let v = vif(&dup).unwrap();
        assert!(v[0].is_infinite() && v[1].is_infinite());
    }

    #[test]
    fn prune_identity_when_below_threshold() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0]);
        let names = vec!["a".to_string(), "b".to_string()];
        let out = iterative_vif_prune(&x, &names, 2.0).unwrap();
        assert!(out.log.entries.is_empty());
        assert_eq!(out.kept, vec![0, 1]);
        assert!(iterative_vif_prune(&x, &names, 1.0).is_err());
    }

    #[test]
    fn prune_duplicate_removes_exactly_one() {
        let mut rng = RngStream::new(5, 0).rng();
        let mut x = DMatrix::from_fn(80, 4, |_, _| rng.random_range(-1.0..1.0));
        let c1 = x.column(1).clone_owned();
        x.set_column(3, &c1);
        let names: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let out = iterative_vif_prune(&x, &names, 2.0).unwrap();
        assert_eq!(out.log.entries.len(), 1);
        // both copies have infinite VIF; the lower index goes
        assert_eq!(out.log.entries[0].column, "b");
        assert!(out.final_vifs.iter().all(|&v| v < 2.0));
    }

    #[test]
    fn prune_stops_at_one_column() {
        let mut rng = RngStream::new(6, 0).rng();
        let a = DVector::from_fn(30, |_, _| rng.random_range(-1.0..1.0));
        let x = DMatrix::from_columns(&[a.clone(), &a * 2.0]);
        let names = vec!["a".to_string(), "b".to_string()];
        let out = iterative_vif_prune(&x, &names, 2.0).unwrap();
        assert_eq!(out.kept.len(), 1);
        assert_eq!(out.log.warnings.len(), 1);
    }

    #[test]
    fn prune_log_serializes_infinity() {
        let entry = PruneEntry {
            column: "a".into(),
            vif_at_removal: Some(f64::INFINITY),
            reason: PruneReason::Vif,
        };
        let json = serde_json::to_string(&entry).unwrap();
        assert_eq!(json, r#"{"column":"a","vif_at_removal":"inf","reason":"vif"}"#);
    }

    #[test]
    fn synthetic_covertype_shape() {
        let ds = synthetic_covertype(300, 1);
        assert_eq!(ds.columns.len(), 55);
        assert_eq!(ds.nrows(), 300);
        assert_eq!(ds.response_name(), "Cover_Type");
        for i in 0..300 {
            let wild: f64 = (10..14).map(|j| ds.columns[j].values[i]).sum();
            let soil: f64 = (14..54).map(|j| ds.columns[j].values[i]).sum();
            assert_eq!((wild, soil), (1.0, 1.0));
        }
        assert_eq!(synthetic_covertype(300, 1), ds);
    }
}
