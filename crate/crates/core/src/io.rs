//! File formats for pipeline artifacts.
//!
//! Models and interconnections are JSON; everything that is naturally a
//! per-frequency table (requirements, scalings, Hankel values, margins) is
//! CSV with full-precision doubles, `.` decimal separators, and LF line
//! endings, so a run's outputs diff cleanly and re-parse bitwise-identical.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{InterconnectedSystem, StateSpaceModel};
use crate::reduction::RequirementMargin;
use crate::synthesis::{OmegaScalings, RequirementSpec, ScalingPoint, ScalingSolution};

/// A state-space model plus the optional channel labels carried by its file.
#[derive(Debug, Clone)]
pub struct LabeledModel {
    pub model: StateSpaceModel,
    pub input_labels: Option<Vec<String>>,
    pub output_labels: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct LabelsFile {
    inputs: Vec<String>,
    outputs: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    d: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<LabelsFile>,
}

fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Result<Vec<Vec<f64>>> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(
            "model matrices must hold finite values".into(),
        ));
    }
    Ok((0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect())
}

/// Rebuild a matrix from row-major nested arrays. `rows`/`cols` pin the
/// shape so empty dimensions survive the round trip.
fn rows_to_matrix(rows: &[Vec<f64>], nrows: usize, ncols: usize, key: &str) -> Result<nalgebra::DMatrix<f64>> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse(format!(
            "matrix {key} must be {nrows}x{ncols}, got {} rows of lengths {:?}",
            rows.len(),
            rows.iter().map(|r| r.len()).collect::<Vec<_>>()
        )));
    }
    let m = nalgebra::DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Parse(format!("matrix {key} holds non-finite values")));
    }
    Ok(m)
}

/// Write a model as JSON with keys `A`,`B`,`C`,`D` (row-major nested arrays)
/// and an optional `labels` object naming the input/output channels.
pub fn write_model<W: Write>(
    out: &mut W,
    model: &StateSpaceModel,
    input_labels: Option<&[String]>,
    output_labels: Option<&[String]>,
) -> Result<()> {
    if let Some(labels) = input_labels {
        if labels.len() != model.m() {
            return Err(Error::Dimension(format!(
                "{} input labels for {} inputs",
                labels.len(),
                model.m()
            )));
        }
    }
    if let Some(labels) = output_labels {
        if labels.len() != model.p() {
            return Err(Error::Dimension(format!(
                "{} output labels for {} outputs",
                labels.len(),
                model.p()
            )));
        }
    }
    let labels = match (input_labels, output_labels) {
        (None, None) => None,
        (i, o) => Some(LabelsFile {
            inputs: i.map(<[String]>::to_vec).unwrap_or_default(),
            outputs: o.map(<[String]>::to_vec).unwrap_or_default(),
        }),
    };
    let file = ModelFile {
        a: matrix_rows(model.a())?,
        b: matrix_rows(model.b())?,
        c: matrix_rows(model.c())?,
        d: matrix_rows(model.d())?,
        labels,
    };
    serde_json::to_writer_pretty(&mut *out, &file)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Read a model written by [`write_model`]. Dimensions are taken from `A`
/// (states) and `D` (outputs × inputs).
pub fn read_model<R: Read>(input: R) -> Result<LabeledModel> {
    let file: ModelFile = serde_json::from_reader(input)?;
    let n = file.a.len();
    let p = file.d.len();
    let m = file.d.first().map_or(0, Vec::len);
    let a = rows_to_matrix(&file.a, n, n, "A")?;
    let b = rows_to_matrix(&file.b, n, m, "B")?;
    let c = rows_to_matrix(&file.c, p, n, "C")?;
    let d = rows_to_matrix(&file.d, p, m, "D")?;
    let model = StateSpaceModel::new(a, b, c, d)?;
    let (input_labels, output_labels) = match file.labels {
        None => (None, None),
        Some(labels) => {
            if !labels.inputs.is_empty() && labels.inputs.len() != m {
                return Err(Error::Parse(format!(
                    "{} input labels for {} inputs",
                    labels.inputs.len(),
                    m
                )));
            }
            if !labels.outputs.is_empty() && labels.outputs.len() != p {
                return Err(Error::Parse(format!(
                    "{} output labels for {} outputs",
                    labels.outputs.len(),
                    p
                )));
            }
            (
                (!labels.inputs.is_empty()).then_some(labels.inputs),
                (!labels.outputs.is_empty()).then_some(labels.outputs),
            )
        }
    };
    Ok(LabeledModel {
        model,
        input_labels,
        output_labels,
    })
}

/// Read a model from a file path.
pub fn read_model_file(path: &Path) -> Result<LabeledModel> {
    read_model(BufReader::new(File::open(path)?))
}

/// Write a model to a file path.
pub fn write_model_file(
    path: &Path,
    model: &StateSpaceModel,
    input_labels: Option<&[String]>,
    output_labels: Option<&[String]>,
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_model(&mut out, model, input_labels, output_labels)
}

#[derive(Serialize, Deserialize)]
struct InterconnectionFile {
    #[serde(rename = "K11")]
    k11: Vec<Vec<f64>>,
    #[serde(rename = "K12")]
    k12: Vec<Vec<f64>>,
    #[serde(rename = "K21")]
    k21: Vec<Vec<f64>>,
    #[serde(rename = "K22")]
    k22: Vec<Vec<f64>>,
    mc: usize,
    pc: usize,
    subsystems: Vec<String>,
}

/// Write an interconnection file. `subsystem_files` are the model-file paths
/// stored verbatim (interpreted relative to the interconnection file's
/// directory on read); the models themselves are written separately.
pub fn write_interconnection(
    path: &Path,
    sys: &InterconnectedSystem,
    subsystem_files: &[String],
) -> Result<()> {
    if subsystem_files.len() != sys.subsystems().len() {
        return Err(Error::Dimension(format!(
            "{} file names for {} subsystems",
            subsystem_files.len(),
            sys.subsystems().len()
        )));
    }
    let file = InterconnectionFile {
        k11: matrix_rows(sys.k11())?,
        k12: matrix_rows(sys.k12())?,
        k21: matrix_rows(sys.k21())?,
        k22: matrix_rows(sys.k22())?,
        mc: sys.m_c(),
        pc: sys.p_c(),
        subsystems: subsystem_files.to_vec(),
    };
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &file)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Read an interconnection file and the subsystem models it references.
pub fn read_interconnection(path: &Path) -> Result<InterconnectedSystem> {
    let file: InterconnectionFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let subsystems: Vec<StateSpaceModel> = file
        .subsystems
        .iter()
        .map(|name| Ok(read_model_file(&dir.join(name))?.model))
        .collect::<Result<_>>()?;
    let m_b: usize = subsystems.iter().map(StateSpaceModel::m).sum();
    let p_b: usize = subsystems.iter().map(StateSpaceModel::p).sum();
    let k11 = rows_to_matrix(&file.k11, m_b, p_b, "K11")?;
    let k12 = rows_to_matrix(&file.k12, m_b, file.mc, "K12")?;
    let k21 = rows_to_matrix(&file.k21, file.pc, p_b, "K21")?;
    let k22 = rows_to_matrix(&file.k22, file.pc, file.mc, "K22")?;
    InterconnectedSystem::new(subsystems, k11, k12, k21, k22)
}

/// Split one CSV line, trimming the trailing newline only.
fn csv_fields(line: &str) -> Vec<&str> {
    line.trim_end_matches(['\r', '\n']).split(',').collect()
}

fn parse_f64(field: &str, line_no: usize) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line_no}: bad number {field:?}")))
}

fn read_lines<R: Read>(input: R) -> Result<Vec<String>> {
    let mut text = String::new();
    BufReader::new(input).read_to_string(&mut text)?;
    Ok(text.lines().map(str::to_owned).collect())
}

fn expect_header(lines: &[String], expected: &str) -> Result<()> {
    match lines.first() {
        Some(h) if h.trim_end_matches(['\r', '\n']) == expected => Ok(()),
        other => Err(Error::Parse(format!(
            "expected header {expected:?}, got {other:?}"
        ))),
    }
}

/// Write a requirement as CSV with columns `omega,v_c_1..,w_c_1..`.
pub fn write_requirement_csv<W: Write>(out: &mut W, req: &RequirementSpec) -> Result<()> {
    write!(out, "omega")?;
    for i in 0..req.p_c() {
        write!(out, ",v_c_{}", i + 1)?;
    }
    for i in 0..req.m_c() {
        write!(out, ",w_c_{}", i + 1)?;
    }
    writeln!(out)?;
    for (t, omega) in req.omegas().iter().enumerate() {
        write!(out, "{omega}")?;
        for v in &req.v_c()[t] {
            write!(out, ",{v}")?;
        }
        for w in &req.w_c()[t] {
            write!(out, ",{w}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Read a requirement written by [`write_requirement_csv`].
pub fn read_requirement_csv<R: Read>(input: R) -> Result<RequirementSpec> {
    let lines = read_lines(input)?;
    let header = lines
        .first()
        .ok_or_else(|| Error::Parse("empty requirement file".into()))?;
    let cols = csv_fields(header);
    if cols.first() != Some(&"omega") {
        return Err(Error::Parse(format!(
            "requirement header must start with omega, got {header:?}"
        )));
    }
    let p_c = cols.iter().filter(|c| c.starts_with("v_c_")).count();
    let m_c = cols.iter().filter(|c| c.starts_with("w_c_")).count();
    if 1 + p_c + m_c != cols.len() || p_c == 0 || m_c == 0 {
        return Err(Error::Parse(format!(
            "requirement header has unexpected columns: {header:?}"
        )));
    }
    let mut omegas = Vec::new();
    let mut v_c = Vec::new();
    let mut w_c = Vec::new();
    for (no, line) in lines.iter().enumerate().skip(1) {
        let fields = csv_fields(line);
        if fields.len() != cols.len() {
            return Err(Error::Parse(format!(
                "line {}: {} fields, header has {}",
                no + 1,
                fields.len(),
                cols.len()
            )));
        }
        omegas.push(parse_f64(fields[0], no + 1)?);
        v_c.push(
            fields[1..1 + p_c]
                .iter()
                .map(|f| parse_f64(f, no + 1))
                .collect::<Result<_>>()?,
        );
        w_c.push(
            fields[1 + p_c..]
                .iter()
                .map(|f| parse_f64(f, no + 1))
                .collect::<Result<_>>()?,
        );
    }
    RequirementSpec::new(omegas, v_c, w_c)
}

/// Write one subsystem's scalings as CSV with columns
/// `omega,v_1..v_m,w_1..w_p`. Infeasible frequencies keep their `NaN`
/// placeholders.
pub fn write_scaling_csv<W: Write>(
    out: &mut W,
    solution: &ScalingSolution,
    subsystem: usize,
) -> Result<()> {
    let (m, p) = *solution
        .dims
        .get(subsystem)
        .ok_or_else(|| Error::Domain(format!("no subsystem {subsystem} in the solution")))?;
    write!(out, "omega")?;
    for i in 0..m {
        write!(out, ",v_{}", i + 1)?;
    }
    for i in 0..p {
        write!(out, ",w_{}", i + 1)?;
    }
    writeln!(out)?;
    for e in &solution.entries {
        write!(out, "{}", e.omega)?;
        for v in &e.point.v[subsystem] {
            write!(out, ",{v}")?;
        }
        for w in &e.point.w[subsystem] {
            write!(out, ",{w}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Write the multiplier table as CSV with columns
/// `omega,d_1..d_k,cost,status` where status is `feasible` or `infeasible`.
pub fn write_d_csv<W: Write>(out: &mut W, solution: &ScalingSolution) -> Result<()> {
    let k = solution.dims.len();
    write!(out, "omega")?;
    for i in 0..k {
        write!(out, ",d_{}", i + 1)?;
    }
    writeln!(out, ",cost,status")?;
    for e in &solution.entries {
        write!(out, "{}", e.omega)?;
        for d in &e.point.d {
            write!(out, ",{d}")?;
        }
        writeln!(
            out,
            ",{},{}",
            e.cost,
            if e.feasible { "feasible" } else { "infeasible" }
        )?;
    }
    Ok(())
}

/// Reassemble a [`ScalingSolution`] from per-subsystem scaling CSVs, the
/// multiplier CSV, and the requirement that drove the synthesis (which
/// carries `v_c`/`w_c`). Iteration diagnostics are not persisted, so
/// `cost_trace` comes back empty and `margin` as `NaN`.
pub fn read_scaling_solution<R: Read>(
    scaling_inputs: Vec<R>,
    d_input: R,
    req: &RequirementSpec,
) -> Result<ScalingSolution> {
    if scaling_inputs.is_empty() {
        return Err(Error::Domain("no subsystem scaling tables".into()));
    }
    // Per subsystem: (omegas, v rows, w rows).
    struct Table {
        omegas: Vec<f64>,
        v: Vec<Vec<f64>>,
        w: Vec<Vec<f64>>,
    }
    let mut tables = Vec::new();
    let mut dims = Vec::new();
    for input in scaling_inputs {
        let lines = read_lines(input)?;
        let header = lines
            .first()
            .ok_or_else(|| Error::Parse("empty scaling file".into()))?;
        let cols = csv_fields(header);
        let m = cols.iter().filter(|c| c.starts_with("v_")).count();
        let p = cols.iter().filter(|c| c.starts_with("w_")).count();
        if cols.first() != Some(&"omega") || 1 + m + p != cols.len() {
            return Err(Error::Parse(format!(
                "scaling header has unexpected columns: {header:?}"
            )));
        }
        let mut table = Table {
            omegas: Vec::new(),
            v: Vec::new(),
            w: Vec::new(),
        };
        for (no, line) in lines.iter().enumerate().skip(1) {
            let fields = csv_fields(line);
            if fields.len() != cols.len() {
                return Err(Error::Parse(format!(
                    "line {}: {} fields, header has {}",
                    no + 1,
                    fields.len(),
                    cols.len()
                )));
            }
            table.omegas.push(parse_f64(fields[0], no + 1)?);
            table.v.push(
                fields[1..1 + m]
                    .iter()
                    .map(|f| parse_f64(f, no + 1))
                    .collect::<Result<_>>()?,
            );
            table.w.push(
                fields[1 + m..]
                    .iter()
                    .map(|f| parse_f64(f, no + 1))
                    .collect::<Result<_>>()?,
            );
        }
        dims.push((m, p));
        tables.push(table);
    }

    let d_lines = read_lines(d_input)?;
    let mut d_header = String::from("omega");
    for i in 0..dims.len() {
        d_header.push_str(&format!(",d_{}", i + 1));
    }
    d_header.push_str(",cost,status");
    expect_header(&d_lines, &d_header)?;

    let rows = tables[0].omegas.len();
    if tables.iter().any(|t| t.omegas.len() != rows)
        || d_lines.len() != rows + 1
        || req.omegas().len() != rows
    {
        return Err(Error::Dimension(format!(
            "scaling tables, multiplier table, and requirement disagree on the grid \
             ({} vs {} vs {} rows)",
            rows,
            d_lines.len().saturating_sub(1),
            req.omegas().len()
        )));
    }

    let mut entries = Vec::with_capacity(rows);
    for t in 0..rows {
        let omega = tables[0].omegas[t];
        for table in &tables {
            if (table.omegas[t] - omega).abs() > 1e-12 * omega.abs() {
                return Err(Error::Domain(format!(
                    "scaling tables disagree at row {}: {} vs {}",
                    t + 1,
                    table.omegas[t],
                    omega
                )));
            }
        }
        let fields = csv_fields(&d_lines[t + 1]);
        if fields.len() != dims.len() + 3 {
            return Err(Error::Parse(format!(
                "multiplier line {}: {} fields, expected {}",
                t + 2,
                fields.len(),
                dims.len() + 3
            )));
        }
        let d_omega = parse_f64(fields[0], t + 2)?;
        if (d_omega - omega).abs() > 1e-12 * omega.abs() {
            return Err(Error::Domain(format!(
                "multiplier table disagrees at row {}: {d_omega} vs {omega}",
                t + 1
            )));
        }
        let d: Vec<f64> = fields[1..1 + dims.len()]
            .iter()
            .map(|f| parse_f64(f, t + 2))
            .collect::<Result<_>>()?;
        let cost = parse_f64(fields[1 + dims.len()], t + 2)?;
        let feasible = match fields[2 + dims.len()] {
            "feasible" => true,
            "infeasible" => false,
            other => {
                return Err(Error::Parse(format!(
                    "multiplier line {}: unknown status {other:?}",
                    t + 2
                )))
            }
        };
        entries.push(OmegaScalings {
            omega,
            point: ScalingPoint {
                v: tables.iter().map(|tab| tab.v[t].clone()).collect(),
                w: tables.iter().map(|tab| tab.w[t].clone()).collect(),
                v_c: req.v_c()[t].clone(),
                w_c: req.w_c()[t].clone(),
                d,
                d_c: 1.0,
            },
            cost,
            cost_trace: Vec::new(),
            margin: f64::NAN,
            feasible,
        });
    }
    let solution = ScalingSolution { dims, entries };
    solution.validate()?;
    Ok(solution)
}

/// Write Hankel singular values as CSV with columns `index,sigma`
/// (1-based indices in descending-σ order).
pub fn write_hsv_csv<W: Write>(out: &mut W, hankel: &[f64]) -> Result<()> {
    writeln!(out, "index,sigma")?;
    for (i, sigma) in hankel.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, sigma)?;
    }
    Ok(())
}

/// Write per-frequency requirement margins as CSV with columns
/// `omega,sigma_weighted,pass`.
pub fn write_margins_csv<W: Write>(out: &mut W, margins: &[RequirementMargin]) -> Result<()> {
    writeln!(out, "omega,sigma_weighted,pass")?;
    for m in margins {
        writeln!(out, "{},{},{}", m.omega, m.sigma_weighted, m.pass)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freq::make_log_grid;
    use crate::synthesis::{build_interconnected_requirement, synthesize_requirements, SynthesisOptions};
    use nalgebra::DMatrix;

    fn sample_model() -> StateSpaceModel {
        StateSpaceModel::new(
            DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, 0.0, -value_with_many_digits()]),
            DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0 / 3.0]),
            DMatrix::from_element(1, 1, 0.25),
        )
        .unwrap()
    }

    fn value_with_many_digits() -> f64 {
        2.0f64.sqrt() * 1.737
    }

    #[test]
    fn model_json_round_trips_bitwise() {
        let model = sample_model();
        let mut buf = Vec::new();
        write_model(&mut buf, &model, None, None).unwrap();
        let back = read_model(buf.as_slice()).unwrap();
        assert_eq!(back.model.a(), model.a());
        assert_eq!(back.model.b(), model.b());
        assert_eq!(back.model.c(), model.c());
        assert_eq!(back.model.d(), model.d());
        assert!(back.input_labels.is_none());
    }

    #[test]
    fn labels_round_trip_and_are_validated() {
        let model = sample_model();
        let inputs = vec!["force".to_string()];
        let outputs = vec!["deflection".to_string()];
        let mut buf = Vec::new();
        write_model(&mut buf, &model, Some(&inputs), Some(&outputs)).unwrap();
        let back = read_model(buf.as_slice()).unwrap();
        assert_eq!(back.input_labels.as_deref(), Some(&inputs[..]));
        assert_eq!(back.output_labels.as_deref(), Some(&outputs[..]));

        let two = vec!["a".to_string(), "b".to_string()];
        assert!(write_model(&mut Vec::new(), &model, Some(&two), None).is_err());
    }

    #[test]
    fn zero_state_model_survives_the_round_trip() {
        let model = StateSpaceModel::new(
            DMatrix::zeros(0, 0),
            DMatrix::zeros(0, 2),
            DMatrix::zeros(1, 0),
            DMatrix::from_row_slice(1, 2, &[3.0, -4.0]),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_model(&mut buf, &model, None, None).unwrap();
        let back = read_model(buf.as_slice()).unwrap();
        assert_eq!(back.model.n(), 0);
        assert_eq!(back.model.m(), 2);
        assert_eq!(back.model.p(), 1);
        assert_eq!(back.model.d(), model.d());
    }

    #[test]
    fn malformed_model_shapes_are_rejected() {
        let text = r#"{"A": [[0.0]], "B": [[1.0], [2.0]], "C": [[1.0]], "D": [[0.0]]}"#;
        assert!(matches!(
            read_model(text.as_bytes()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn interconnection_round_trips_through_a_directory() {
        let dir = tempfile::tempdir().unwrap();
        let g = sample_model();
        let sys = InterconnectedSystem::new(
            vec![g.clone(), g.clone()],
            DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]),
            DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
            DMatrix::from_row_slice(1, 2, &[0.0, 1.0]),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        for (j, sub) in sys.subsystems().iter().enumerate() {
            write_model_file(&dir.path().join(format!("sub{}.json", j + 1)), sub, None, None)
                .unwrap();
        }
        let path = dir.path().join("interconnection.json");
        write_interconnection(&path, &sys, &["sub1.json".into(), "sub2.json".into()]).unwrap();
        let back = read_interconnection(&path).unwrap();
        assert_eq!(back.subsystems().len(), 2);
        assert_eq!(back.subsystems()[0].a(), g.a());
        assert_eq!(back.k11(), sys.k11());
        assert_eq!(back.k21(), sys.k21());
    }

    #[test]
    fn requirement_csv_round_trips_bitwise() {
        let omegas = vec![0.1, 1.0, 10.0];
        let v_c = vec![vec![1.0 / 3.0], vec![2.0f64.sqrt()], vec![5.0e6]];
        let w_c = vec![vec![1.0], vec![1.0], vec![1.0]];
        let req = RequirementSpec::new(omegas.clone(), v_c.clone(), w_c).unwrap();
        let mut buf = Vec::new();
        write_requirement_csv(&mut buf, &req).unwrap();
        let back = read_requirement_csv(buf.as_slice()).unwrap();
        assert_eq!(back.omegas(), req.omegas());
        assert_eq!(back.v_c(), req.v_c());
        assert_eq!(back.w_c(), req.w_c());
    }

    /// Synthesize a tiny two-subsystem problem and push the scalings through
    /// the CSV round trip.
    #[test]
    fn scaling_solution_round_trips_through_csv() {
        let g1 = StateSpaceModel::new(
            DMatrix::from_element(1, 1, -1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let g2 = g1.clone();
        let sys = InterconnectedSystem::new(
            vec![g1, g2],
            DMatrix::from_row_slice(2, 2, &[0.0, 0.3, 0.3, 0.0]),
            DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
            DMatrix::from_row_slice(1, 2, &[0.0, 1.0]),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let grid = make_log_grid(0.1, 10.0, 7).unwrap();
        let gc = sys.lft_close().unwrap();
        let req = build_interconnected_requirement(&gc, &grid, 0.3, 1e-3).unwrap();
        let solution =
            synthesize_requirements(&sys, &grid, &req, &SynthesisOptions::default()).unwrap();

        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        let mut d = Vec::new();
        write_scaling_csv(&mut s1, &solution, 0).unwrap();
        write_scaling_csv(&mut s2, &solution, 1).unwrap();
        write_d_csv(&mut d, &solution).unwrap();

        let back =
            read_scaling_solution(vec![s1.as_slice(), s2.as_slice()], d.as_slice(), &req).unwrap();
        assert_eq!(back.dims, solution.dims);
        assert_eq!(back.entries.len(), solution.entries.len());
        for (a, b) in back.entries.iter().zip(&solution.entries) {
            assert_eq!(a.omega, b.omega);
            assert_eq!(a.point.v, b.point.v);
            assert_eq!(a.point.w, b.point.w);
            assert_eq!(a.point.d, b.point.d);
            assert_eq!(a.point.v_c, b.point.v_c);
            assert_eq!(a.cost, b.cost);
            assert!(a.feasible);
        }
    }

    #[test]
    fn wrong_status_word_is_rejected() {
        let scaling = "omega,v_1,w_1\n1,2,3\n";
        let d = "omega,d_1,cost,status\n1,1,5,maybe\n";
        let req = RequirementSpec::new(vec![1.0], vec![vec![1.0]], vec![vec![1.0]]).unwrap();
        assert!(matches!(
            read_scaling_solution(vec![scaling.as_bytes()], d.as_bytes(), &req),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn hsv_and_margin_tables_have_the_documented_columns() {
        let mut buf = Vec::new();
        write_hsv_csv(&mut buf, &[0.5, 1e-3]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "index,sigma\n1,0.5\n2,0.001\n"
        );
        let margins = vec![
            RequirementMargin {
                omega: 2.0,
                sigma_weighted: 0.25,
                pass: true,
            },
            RequirementMargin {
                omega: 20.0,
                sigma_weighted: 1.5,
                pass: false,
            },
        ];
        let mut buf = Vec::new();
        write_margins_csv(&mut buf, &margins).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "omega,sigma_weighted,pass\n2,0.25,true\n20,1.5,false\n"
        );
    }
}
