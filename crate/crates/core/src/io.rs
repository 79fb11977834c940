//! Plain-text formats: whitespace edge lists, delimited matrices with 17
//! significant digits, and directories of per-channel coefficient blocks.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2};

use crate::dot::DotState;
use crate::error::{Error, Result};
use crate::framelet::{ChannelKey, Coefficients, FrameletSystem};
use crate::graph::{Edge, Graph, LaplacianKind};

fn parse_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

/// Lines of `i j [w]`, 0-indexed, `#` starts a comment.
pub fn parse_edge_list(text: &str) -> Result<Vec<Edge>> {
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let loc = || format!("line {}", lineno + 1);
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(parse_err(loc(), format!("expected `i j [w]`, got {line:?}")));
        }
        let idx = |s: &str| s.parse::<usize>().map_err(|_| parse_err(loc(), format!("bad node index {s:?}")));
        let (i, j) = (idx(fields[0])?, idx(fields[1])?);
        edges.push(match fields.get(2) {
            Some(w) => Edge::weighted(i, j, w.parse().map_err(|_| parse_err(loc(), format!("bad weight {w:?}")))?),
            None => Edge::new(i, j),
        });
    }
    Ok(edges)
}

pub fn read_edge_list(path: &Path) -> Result<Vec<Edge>> {
    parse_edge_list(&fs::read_to_string(path)?)
}

/// One past the largest index mentioned, or 0 for an empty list.
pub fn edge_list_nodes(edges: &[Edge]) -> usize {
    edges.iter().map(|e| e.i.max(e.j) + 1).max().unwrap_or(0)
}

/// Canonical form: `i < j`, sorted, weight omitted when it is exactly 1.
pub fn format_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    for e in g.edges() {
        match e.weight {
            Some(w) if w != 1.0 => out.push_str(&format!("{} {} {}\n", e.i, e.j, w)),
            _ => out.push_str(&format!("{} {}\n", e.i, e.j)),
        }
    }
    out
}

pub fn write_edge_list(path: &Path, g: &Graph) -> Result<()> {
    fs::write(path, format_edge_list(g))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixFormat {
    pub delimiter: u8,
    pub header: bool,
}

impl Default for MatrixFormat {
    fn default() -> Self {
        MatrixFormat {
            delimiter: b',',
            header: false,
        }
    }
}

pub fn parse_matrix(text: &str, fmt: MatrixFormat) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(fmt.delimiter)
        .has_headers(fmt.header)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(format!("line {line}"), e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(parse_err(
                    format!("line {line}"),
                    format!("expected {c} fields, found {}", record.len()),
                ));
            }
            _ => {}
        }
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(format!("line {line}"), format!("bad number {field:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(format!("line {line}"), format!("non-finite value {field:?}")));
            }
            values.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_err("input", "matrix has no rows"))?;
    Array2::from_shape_vec((rows, cols), values).map_err(|e| parse_err("input", e.to_string()))
}

pub fn read_matrix(path: &Path, fmt: MatrixFormat) -> Result<Array2<f64>> {
    parse_matrix(&fs::read_to_string(path)?, fmt).map_err(|e| match e {
        Error::Parse { location, message } => parse_err(format!("{}:{location}", path.display()), message),
        other => other,
    })
}

/// Scientific notation with 17 significant digits, which round-trips every f64.
pub fn format_matrix(m: &ArrayView2<f64>, delimiter: char) -> String {
    let mut out = String::with_capacity(m.len() * 24);
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&line.join(&delimiter.to_string()));
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, m: &ArrayView2<f64>) -> Result<()> {
    fs::write(path, format_matrix(m, ','))?;
    Ok(())
}

/// `key = value` lines; `#` comments and blank lines are skipped.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("line {}", lineno + 1), format!("expected `key = value`, got {line:?}")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn lookup<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<T> {
    let raw = map.get(key).ok_or_else(|| parse_err(key, "missing key"))?;
    raw.parse().map_err(|_| parse_err(key, format!("cannot parse {raw:?}")))
}

/// Descriptor stored next to a coefficient directory.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMeta {
    pub high_pass: usize,
    pub levels: usize,
    pub cheb_order: usize,
    pub dilation: u32,
    pub laplacian: LaplacianKind,
    pub channels: Vec<ChannelKey>,
}

fn laplacian_name(kind: LaplacianKind) -> &'static str {
    match kind {
        LaplacianKind::Unnormalized => "unnormalized",
        LaplacianKind::Normalized => "normalized",
    }
}

impl CoefficientMeta {
    pub fn from_system(sys: &FrameletSystem) -> Self {
        CoefficientMeta {
            high_pass: sys.high_pass_count(),
            levels: sys.levels(),
            cheb_order: sys.cheb_order(),
            dilation: sys.dilation(),
            laplacian: sys.laplacian_kind(),
            channels: sys.index_set(),
        }
    }

    pub fn to_text(&self) -> String {
        let channels: Vec<String> = self.channels.iter().map(|(k, l)| format!("{k},{l}")).collect();
        format!(
            "high_pass = {}\nlevels = {}\ncheb_order = {}\ndilation = {}\nlaplacian = {}\nchannels = {}\n",
            self.high_pass,
            self.levels,
            self.cheb_order,
            self.dilation,
            laplacian_name(self.laplacian),
            channels.join(" ")
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let map = parse_key_values(text)?;
        let laplacian = match map.get("laplacian").map(String::as_str) {
            Some("unnormalized") => LaplacianKind::Unnormalized,
            Some("normalized") => LaplacianKind::Normalized,
            other => return Err(parse_err("laplacian", format!("unknown kind {other:?}"))),
        };
        let mut channels = Vec::new();
        for tok in map.get("channels").map(String::as_str).unwrap_or("").split_whitespace() {
            let bad = || parse_err("channels", format!("bad channel {tok:?}"));
            let (k, l) = tok.split_once(',').ok_or_else(bad)?;
            channels.push((k.parse().map_err(|_| bad())?, l.parse().map_err(|_| bad())?));
        }
        Ok(CoefficientMeta {
            high_pass: lookup(&map, "high_pass")?,
            levels: lookup(&map, "levels")?,
            cheb_order: lookup(&map, "cheb_order")?,
            dilation: lookup(&map, "dilation")?,
            laplacian,
            channels,
        })
    }
}

fn channel_file(key: ChannelKey) -> String {
    format!("k{}_l{}.csv", key.0, key.1)
}

/// Writes `meta.txt` plus one `k{k}_l{l}.csv` per channel of `c`.
pub fn write_coefficients(dir: &Path, c: &Coefficients, meta: &CoefficientMeta) -> Result<()> {
    fs::create_dir_all(dir)?;
    let meta = CoefficientMeta {
        channels: c.keys(),
        ..meta.clone()
    };
    fs::write(dir.join("meta.txt"), meta.to_text())?;
    for (key, block) in c.iter() {
        write_matrix(&dir.join(channel_file(*key)), &block.view())?;
    }
    Ok(())
}

pub fn read_coefficients(dir: &Path) -> Result<(Coefficients, CoefficientMeta)> {
    let meta = CoefficientMeta::parse(&fs::read_to_string(dir.join("meta.txt"))?)?;
    let mut blocks = BTreeMap::new();
    for &key in &meta.channels {
        blocks.insert(key, read_matrix(&dir.join(channel_file(key)), MatrixFormat::default())?);
    }
    Ok((Coefficients::new(blocks)?, meta))
}

/// Snapshot of every solver variable. Framelet blocks go to `q/` and `lam2/`
/// only when present.
pub fn write_state(dir: &Path, s: &DotState, meta: Option<&CoefficientMeta>) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, m) in [
        ("u", &s.u),
        ("z", &s.z),
        ("e", &s.e),
        ("y", &s.y),
        ("lam1", &s.lam1),
        ("lam4", &s.lam4),
    ] {
        write_matrix(&dir.join(format!("{name}.csv")), &m.view())?;
    }
    write_matrix(&dir.join("lam3.csv"), &s.lam3.view().insert_axis(ndarray::Axis(1)))?;
    let [m1, m2, m3, m4] = s.mu;
    fs::write(
        dir.join("penalties.txt"),
        format!("mu1 = {m1}\nmu2 = {m2}\nmu3 = {m3}\nmu4 = {m4}\niter = {}\n", s.iter),
    )?;
    if let (Some(meta), false) = (meta, s.q.is_empty()) {
        write_coefficients(&dir.join("q"), &s.q, meta)?;
        write_coefficients(&dir.join("lam2"), &s.lam2, meta)?;
    }
    Ok(())
}

pub fn read_state(dir: &Path) -> Result<DotState> {
    let m = |name: &str| read_matrix(&dir.join(format!("{name}.csv")), MatrixFormat::default());
    let kv = parse_key_values(&fs::read_to_string(dir.join("penalties.txt"))?)?;
    let coeffs = |name: &str| -> Result<Coefficients> {
        let sub = dir.join(name);
        if sub.is_dir() {
            Ok(read_coefficients(&sub)?.0)
        } else {
            Coefficients::new(BTreeMap::new())
        }
    };
    let lam3 = m("lam3")?;
    if lam3.ncols() != 1 {
        return Err(Error::dims("read_state lam3", 1, lam3.ncols()));
    }
    Ok(DotState {
        u: m("u")?,
        z: m("z")?,
        e: m("e")?,
        y: m("y")?,
        q: coeffs("q")?,
        lam1: m("lam1")?,
        lam2: coeffs("lam2")?,
        lam3: Array1::from_iter(lam3.column(0).iter().copied()),
        lam4: m("lam4")?,
        mu: [lookup(&kv, "mu1")?, lookup(&kv, "mu2")?, lookup(&kv, "mu3")?, lookup(&kv, "mu4")?],
        iter: lookup(&kv, "iter")?,
    })
}
