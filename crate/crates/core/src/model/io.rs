//! Instance files: JSON with explicit dimensions, one matrix row per line, and
//! shortest round-trip decimal floats.
//!
//! ```text
//! { "format_version": 1, "m1": .., "n1": .., "m2": .., "n2": ..,
//!   "A": [[..], ..], "b": [..], "c": [..],
//!   "scenarios": [ { "probability": .., "T": [[..]], "W": [[..]], "h": [..], "q": [..] }, .. ] }
//! ```

use super::{validate, FirstStageData, ModelError, Scenario, StochasticProgram, ValidationReport, Violation};
use crate::linprog::Matrix;
use serde::Deserialize;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    format_version: u32,
    m1: usize,
    n1: usize,
    m2: usize,
    n2: usize,
    #[serde(rename = "A")]
    a: Matrix,
    b: Vec<f64>,
    c: Vec<f64>,
    scenarios: Vec<ScenarioFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    probability: f64,
    #[serde(rename = "T")]
    t: Matrix,
    #[serde(rename = "W")]
    w: Matrix,
    h: Vec<f64>,
    q: Vec<f64>,
}

fn number(v: f64) -> String {
    serde_json::to_string(&v).expect("finite floats serialize")
}

fn vector(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|&x| number(x)).collect();
    format!("[{}]", items.join(", "))
}

fn write_matrix<W: Write>(out: &mut W, key: &str, m: &Matrix, indent: &str) -> std::io::Result<()> {
    writeln!(out, "{indent}\"{key}\": [")?;
    for i in 0..m.rows() {
        let sep = if i + 1 < m.rows() { "," } else { "" };
        writeln!(out, "{indent}  {}{sep}", vector(m.row(i)))?;
    }
    write!(out, "{indent}]")
}

/// Writes a valid program. Invalid programs are rejected before anything is written.
pub fn write_instance<W: Write>(program: &StochasticProgram, out: &mut W) -> Result<(), ModelError> {
    let report = validate(program);
    if !report.is_valid() {
        return Err(ModelError::Validation(report));
    }
    let fs = &program.first_stage;
    writeln!(out, "{{")?;
    writeln!(out, "  \"format_version\": {FORMAT_VERSION},")?;
    writeln!(out, "  \"m1\": {},", program.m1())?;
    writeln!(out, "  \"n1\": {},", program.n1())?;
    writeln!(out, "  \"m2\": {},", program.m2())?;
    writeln!(out, "  \"n2\": {},", program.n2())?;
    write_matrix(out, "A", &fs.a, "  ")?;
    writeln!(out, ",")?;
    writeln!(out, "  \"b\": {},", vector(&fs.b))?;
    writeln!(out, "  \"c\": {},", vector(&fs.c))?;
    writeln!(out, "  \"scenarios\": [")?;
    for (s, sc) in program.scenarios.iter().enumerate() {
        writeln!(out, "    {{")?;
        writeln!(out, "      \"probability\": {},", number(sc.probability))?;
        write_matrix(out, "T", &sc.t, "      ")?;
        writeln!(out, ",")?;
        write_matrix(out, "W", &sc.w, "      ")?;
        writeln!(out, ",")?;
        writeln!(out, "      \"h\": {},", vector(&sc.h))?;
        writeln!(out, "      \"q\": {}", vector(&sc.q))?;
        let sep = if s + 1 < program.scenarios.len() { "," } else { "" };
        writeln!(out, "    }}{sep}")?;
    }
    writeln!(out, "  ]")?;
    writeln!(out, "}}")?;
    Ok(())
}

pub fn save_instance(program: &StochasticProgram, path: impl AsRef<Path>) -> Result<(), ModelError> {
    // validate before touching the file system
    let report = validate(program);
    if !report.is_valid() {
        return Err(ModelError::Validation(report));
    }
    let mut out = BufWriter::new(File::create(path)?);
    write_instance(program, &mut out)?;
    out.flush()?;
    Ok(())
}

/// Parses and validates an instance.
pub fn read_instance<R: Read>(mut input: R) -> Result<StochasticProgram, ModelError> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let file: InstanceFile = serde_json::from_str(&text).map_err(|e| ModelError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.format_version != FORMAT_VERSION {
        return Err(ModelError::Parse {
            line: 1,
            column: 1,
            message: format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                file.format_version
            ),
        });
    }

    let mut header = Vec::new();
    if (file.a.rows(), file.a.cols()) != (file.m1, file.n1) {
        header.push(Violation::FirstStageDimension(format!(
            "A is {}x{} but the header declares {}x{}",
            file.a.rows(),
            file.a.cols(),
            file.m1,
            file.n1
        )));
    }
    for (s, sc) in file.scenarios.iter().enumerate() {
        let declared = [(file.m2, file.n1), (file.m2, file.n2)];
        for ((name, m), (r, c)) in [("T", &sc.t), ("W", &sc.w)].into_iter().zip(declared) {
            if (m.rows(), m.cols()) != (r, c) {
                header.push(Violation::ScenarioDimension {
                    scenario: s,
                    detail: format!("{name} is {}x{} but the header declares {r}x{c}", m.rows(), m.cols()),
                });
            }
        }
    }
    if !header.is_empty() {
        return Err(ModelError::Validation(ValidationReport { violations: header }));
    }

    let program = StochasticProgram {
        first_stage: FirstStageData {
            a: file.a,
            b: file.b,
            c: file.c,
        },
        scenarios: file
            .scenarios
            .into_iter()
            .map(|s| Scenario {
                t: s.t,
                w: s.w,
                h: s.h,
                q: s.q,
                probability: s.probability,
            })
            .collect(),
    };
    let report = validate(&program);
    if !report.is_valid() {
        return Err(ModelError::Validation(report));
    }
    Ok(program)
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<StochasticProgram, ModelError> {
    read_instance(File::open(path)?)
}
