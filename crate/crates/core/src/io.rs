//! Scheme JSON files and the adjacency-list graph format.
//!
//! Scheme files carry a `kind` tag. Exact schemes store their generating
//! data (`c1`, `x_prime`, `roots`) plus the derived matrix `b` for
//! inspection; loading rebuilds and re-checks the scheme from the
//! generating data. Complex numbers are `[re, im]` pairs; real-field
//! exact schemes write plain numbers. Graph files have one line
//! `v: u1 u2 ... ud` per vertex with 1-based ids; repeated neighbours
//! encode parallel edges and a loop is listed twice.

use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coding::{ExactScheme, Field};
use crate::error::{Error, Result};
use crate::expander::{ApproxKind, ApproxScheme, SpectralGraph};
use crate::sim::GradientCode;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Num {
    Real(f64),
    Complex([f64; 2]),
}

impl Num {
    fn encode(z: Complex64, field: Field) -> Self {
        match field {
            Field::Real if z.im == 0.0 => Self::Real(z.re),
            _ => Self::Complex([z.re, z.im]),
        }
    }

    fn value(self) -> Complex64 {
        match self {
            Self::Real(re) => Complex64::new(re, 0.0),
            Self::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ExactFile {
    n: usize,
    s: usize,
    c1: Vec<Num>,
    x_prime: Vec<Num>,
    roots: Vec<Num>,
    b: Vec<Vec<Num>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ApproxFile {
    n: usize,
    d: usize,
    lambda: f64,
    b: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum SchemeFile {
    ComplexMds(ExactFile),
    RealBch(ExactFile),
    Expander(ApproxFile),
    Bipartite(ApproxFile),
    Identity(ApproxFile),
}

fn encode_exact(s: &ExactScheme) -> ExactFile {
    let f = s.field();
    let enc = |v: &[Complex64]| v.iter().map(|&z| Num::encode(z, f)).collect::<Vec<_>>();
    let b = s.b();
    ExactFile {
        n: s.n(),
        s: s.s(),
        c1: enc(s.c1()),
        x_prime: enc(s.x_prime()),
        roots: s.roots().iter().map(|&z| Num::Complex([z.re, z.im])).collect(),
        b: (0..b.nrows())
            .map(|i| (0..b.ncols()).map(|j| Num::encode(b[(i, j)], f)).collect())
            .collect(),
    }
}

fn decode_exact(file: ExactFile, field: Field) -> Result<ExactScheme> {
    let vals = |v: Vec<Num>| v.into_iter().map(Num::value).collect::<Vec<_>>();
    let stored_b: Vec<Vec<Complex64>> = file.b.into_iter().map(vals).collect();
    let scheme = ExactScheme::from_parts(file.n, file.s, field, vals(file.c1), vals(file.x_prime), vals(file.roots))?;
    let b = scheme.b();
    let matches = stored_b.len() == file.n
        && stored_b
            .iter()
            .enumerate()
            .all(|(i, row)| row.len() == file.n && row.iter().enumerate().all(|(j, z)| *z == b[(i, j)]));
    if !matches {
        return Err(Error::Format("stored b is not the circulant of c1".into()));
    }
    Ok(scheme)
}

fn encode_approx(s: &ApproxScheme) -> ApproxFile {
    let b = s.b();
    ApproxFile {
        n: s.n(),
        d: s.d(),
        lambda: s.bound_lambda(),
        b: (0..b.nrows()).map(|i| b.row(i).iter().copied().collect()).collect(),
    }
}

fn decode_approx(file: ApproxFile, kind: ApproxKind) -> Result<ApproxScheme> {
    if file.b.len() != file.n || file.b.iter().any(|row| row.len() != file.n) {
        return Err(Error::Format(format!("b must be {0} x {0}", file.n)));
    }
    let flat: Vec<f64> = file.b.into_iter().flatten().collect();
    ApproxScheme::from_parts(kind, file.d, DMatrix::from_row_slice(file.n, file.n, &flat), file.lambda)
}

pub fn code_to_json(code: &GradientCode) -> Result<String> {
    let file = match code {
        GradientCode::Exact(s) => match s.field() {
            Field::Complex => SchemeFile::ComplexMds(encode_exact(s)),
            Field::Real => SchemeFile::RealBch(encode_exact(s)),
        },
        GradientCode::Approx(s) => {
            let f = encode_approx(s);
            match s.kind() {
                ApproxKind::Expander => SchemeFile::Expander(f),
                ApproxKind::Bipartite => SchemeFile::Bipartite(f),
                ApproxKind::Identity => SchemeFile::Identity(f),
            }
        }
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn code_from_json(text: &str) -> Result<GradientCode> {
    Ok(match serde_json::from_str::<SchemeFile>(text)? {
        SchemeFile::ComplexMds(f) => GradientCode::Exact(decode_exact(f, Field::Complex)?),
        SchemeFile::RealBch(f) => GradientCode::Exact(decode_exact(f, Field::Real)?),
        SchemeFile::Expander(f) => GradientCode::Approx(decode_approx(f, ApproxKind::Expander)?),
        SchemeFile::Bipartite(f) => GradientCode::Approx(decode_approx(f, ApproxKind::Bipartite)?),
        SchemeFile::Identity(f) => GradientCode::Approx(decode_approx(f, ApproxKind::Identity)?),
    })
}

pub fn save_code(code: &GradientCode, path: &Path) -> Result<()> {
    fs::write(path, code_to_json(code)? + "\n")?;
    Ok(())
}

pub fn load_code(path: &Path) -> Result<GradientCode> {
    code_from_json(&fs::read_to_string(path)?)
}

pub fn write_graph<W: Write>(g: &SpectralGraph, mut out: W) -> Result<()> {
    for v in 0..g.n() {
        let nbrs: Vec<String> = g.neighbors(v).iter().map(|u| (u + 1).to_string()).collect();
        writeln!(out, "{}: {}", v + 1, nbrs.join(" "))?;
    }
    Ok(())
}

pub fn read_graph<R: BufRead>(reader: R) -> Result<SpectralGraph> {
    let mut rows: Vec<(usize, Vec<usize>)> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: &str| Error::Format(format!("line {}: {msg}", lineno + 1));
        let (head, tail) = line.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let v: usize = head.trim().parse().map_err(|_| bad("bad vertex id"))?;
        let nbrs = tail
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| bad("bad neighbour id")))
            .collect::<Result<Vec<_>>>()?;
        rows.push((v, nbrs));
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Format("empty graph file".into()));
    }
    let mut adj = DMatrix::<f64>::zeros(n, n);
    let mut seen = vec![false; n];
    for (v, nbrs) in rows {
        if v == 0 || v > n || seen[v - 1] {
            return Err(Error::Format(format!("vertex id {v} is out of range or repeated")));
        }
        seen[v - 1] = true;
        for u in nbrs {
            if u == 0 || u > n {
                return Err(Error::Format(format!("neighbour id {u} out of range")));
            }
            adj[(v - 1, u - 1)] += 1.0;
        }
    }
    SpectralGraph::from_adjacency(adj)
}
