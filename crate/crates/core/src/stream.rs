use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;

use crate::error::StreamError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(transparent)]
pub struct VertexId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for VertexId {
    fn from(v: u64) -> Self {
        VertexId(v)
    }
}

/// Undirected edge key with the smaller endpoint first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey(pub VertexId, pub VertexId);

impl EdgeKey {
    pub fn new(a: VertexId, b: VertexId) -> Self {
        if a <= b {
            EdgeKey(a, b)
        } else {
            EdgeKey(b, a)
        }
    }
}

/// One stream element. `t` is the 1-based arrival index; `ts` is the optional
/// timestamp token from the input file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub t: u64,
    pub ts: Option<u64>,
}

impl Edge {
    pub fn key(&self) -> EdgeKey {
        EdgeKey::new(self.u, self.v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParsedLine {
    Skip,
    Record { u: u64, v: u64, ts: Option<u64> },
}

pub fn parse_edge_line(line: &str, line_no: u64) -> Result<ParsedLine, StreamError> {
    let body = line.trim();
    if body.is_empty() || body.starts_with('#') || body.starts_with('%') {
        return Ok(ParsedLine::Skip);
    }
    let tokens: Vec<&str> = body.split_whitespace().collect();
    if tokens.len() < 2 || tokens.len() > 3 {
        return Err(StreamError::TokenCount {
            line: line_no,
            found: tokens.len(),
        });
    }
    let num = |tok: &str| {
        tok.parse::<u64>().map_err(|_| StreamError::Parse {
            line: line_no,
            token: tok.to_string(),
        })
    };
    let u = num(tokens[0])?;
    let v = num(tokens[1])?;
    let ts = tokens.get(2).map(|t| num(t)).transpose()?;
    if u == v {
        return Err(StreamError::SelfLoop {
            line: line_no,
            vertex: u,
        });
    }
    Ok(ParsedLine::Record { u, v, ts })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StreamOrder {
    #[default]
    File,
    Shuffle(u64),
    Timestamp,
}

/// Edge source. `-` as the path reads standard input, which is unbounded and
/// can only be consumed in file order.
pub struct EdgeReader {
    lines: Box<dyn BufRead>,
    path: PathBuf,
    line_no: u64,
    t: u64,
    buf: String,
}

impl EdgeReader {
    pub fn open(path: &Path) -> Result<Self, StreamError> {
        let lines: Box<dyn BufRead> = if path == Path::new("-") {
            Box::new(BufReader::new(io::stdin()))
        } else {
            let f = File::open(path).map_err(|source| StreamError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            Box::new(BufReader::new(f))
        };
        Ok(EdgeReader {
            lines,
            path: path.to_path_buf(),
            line_no: 0,
            t: 0,
            buf: String::new(),
        })
    }

    pub fn is_unbounded(&self) -> bool {
        self.path == Path::new("-")
    }
}

impl Iterator for EdgeReader {
    type Item = Result<Edge, StreamError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.lines.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(source) => {
                    return Some(Err(StreamError::Io {
                        path: self.path.clone(),
                        source,
                    }))
                }
            }
            self.line_no += 1;
            match parse_edge_line(&self.buf, self.line_no) {
                Ok(ParsedLine::Skip) => continue,
                Ok(ParsedLine::Record { u, v, ts }) => {
                    self.t += 1;
                    return Some(Ok(Edge {
                        u: VertexId(u),
                        v: VertexId(v),
                        t: self.t,
                        ts,
                    }));
                }
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

/// Reads a whole edge list in the requested order. Arrival indexes are
/// reassigned after reordering so they stay `1..=n`.
pub fn read_stream(path: &Path, order: StreamOrder) -> Result<Vec<Edge>, StreamError> {
    let reader = EdgeReader::open(path)?;
    if reader.is_unbounded() && order != StreamOrder::File {
        return Err(StreamError::Unbounded);
    }
    let mut edges = Vec::new();
    for e in reader {
        let e = e?;
        edges.push(e);
    }
    match order {
        StreamOrder::File => {}
        StreamOrder::Shuffle(seed) => {
            let mut rng = RngHandle::new(seed);
            rng.shuffle(&mut edges);
        }
        StreamOrder::Timestamp => {
            if let Some(e) = edges.iter().find(|e| e.ts.is_none()) {
                return Err(StreamError::MissingTimestamp { line: e.t });
            }
            edges.sort_by_key(|e| e.ts);
        }
    }
    for (i, e) in edges.iter_mut().enumerate() {
        e.t = i as u64 + 1;
    }
    Ok(edges)
}

/// Copies `input` to `output` keeping only the first occurrence of every
/// undirected edge. Comment and blank lines are kept; kept records are
/// written verbatim. Returns the number of removed records.
pub fn dedup_stream(input: &Path, output: &Path) -> Result<u64, StreamError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| StreamError::Io { path, source }
    };
    let reader = BufReader::new(File::open(input).map_err(io_err(input))?);
    let mut writer = BufWriter::new(File::create(output).map_err(io_err(output))?);
    let mut seen: FxHashSet<(u64, u64)> = FxHashSet::default();
    let mut removed = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(input))?;
        let keep = match parse_edge_line(&line, i as u64 + 1)? {
            ParsedLine::Skip => true,
            ParsedLine::Record { u, v, .. } => seen.insert((u.min(v), u.max(v))),
        };
        if keep {
            writeln!(writer, "{line}").map_err(io_err(output))?;
        } else {
            removed += 1;
        }
    }
    writer.flush().map_err(io_err(output))?;
    Ok(removed)
}

pub fn write_edges<W: Write>(mut w: W, edges: &[(u64, u64)]) -> io::Result<()> {
    for (u, v) in edges {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()
}

/// Seeded generator. Every random decision in the crate goes through one of
/// these so runs are reproducible from a single `u64`.
#[derive(Clone, Debug)]
pub struct RngHandle(ChaCha8Rng);

impl RngHandle {
    pub fn new(seed: u64) -> Self {
        RngHandle(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }

    /// Uniform in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        self.0.random_range(0..n)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        if p >= 1.0 {
            true
        } else if p <= 0.0 {
            false
        } else {
            self.uniform() < p
        }
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parses_records_and_skips() {
        assert_eq!(parse_edge_line("# c", 1).unwrap(), ParsedLine::Skip);
        assert_eq!(parse_edge_line("% c", 1).unwrap(), ParsedLine::Skip);
        assert_eq!(parse_edge_line("   ", 1).unwrap(), ParsedLine::Skip);
        assert_eq!(
            parse_edge_line("3\t7", 1).unwrap(),
            ParsedLine::Record {
                u: 3,
                v: 7,
                ts: None
            }
        );
        assert_eq!(
            parse_edge_line("3 7 99", 1).unwrap(),
            ParsedLine::Record {
                u: 3,
                v: 7,
                ts: Some(99)
            }
        );
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(
            parse_edge_line("4 4", 9),
            Err(StreamError::SelfLoop { line: 9, vertex: 4 })
        ));
        assert!(matches!(
            parse_edge_line("4 x", 2),
            Err(StreamError::Parse { .. })
        ));
        assert!(matches!(
            parse_edge_line("4", 2),
            Err(StreamError::TokenCount { .. })
        ));
        assert!(matches!(
            parse_edge_line("1 2 3 4", 2),
            Err(StreamError::TokenCount { .. })
        ));
    }

    fn temp_file(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn dedup_removes_reverse_duplicates() {
        let input = temp_file("# header\n1 2\n2 3\n2 1\n3 2 5\n1 3\n");
        let out = tempfile::NamedTempFile::new().unwrap();
        let removed = dedup_stream(input.path(), out.path()).unwrap();
        assert_eq!(removed, 2);
        let body = std::fs::read_to_string(out.path()).unwrap();
        assert_eq!(body, "# header\n1 2\n2 3\n1 3\n");

        let again = tempfile::NamedTempFile::new().unwrap();
        assert_eq!(dedup_stream(out.path(), again.path()).unwrap(), 0);
        assert_eq!(
            std::fs::read(out.path()).unwrap(),
            std::fs::read(again.path()).unwrap()
        );
    }

    #[test]
    fn read_orders() {
        let f = temp_file("1 2 30\n2 3 10\n3 4 20\n");
        let by_ts = read_stream(f.path(), StreamOrder::Timestamp).unwrap();
        let firsts: Vec<u64> = by_ts.iter().map(|e| e.u.0).collect();
        assert_eq!(firsts, vec![2, 3, 1]);
        assert_eq!(by_ts.iter().map(|e| e.t).collect::<Vec<_>>(), vec![1, 2, 3]);

        let a = read_stream(f.path(), StreamOrder::Shuffle(7)).unwrap();
        let b = read_stream(f.path(), StreamOrder::Shuffle(7)).unwrap();
        assert_eq!(a, b);

        let g = temp_file("1 2\n2 3\n");
        assert!(matches!(
            read_stream(g.path(), StreamOrder::Timestamp),
            Err(StreamError::MissingTimestamp { .. })
        ));
        assert!(matches!(
            read_stream(Path::new("-"), StreamOrder::Shuffle(1)),
            Err(StreamError::Unbounded)
        ));
    }

    #[test]
    fn rng_is_reproducible() {
        let mut a = RngHandle::new(42);
        let mut b = RngHandle::new(42);
        for _ in 0..100 {
            assert_eq!(a.below(1000), b.below(1000));
        }
        assert!(a.bernoulli(1.0));
        assert!(!a.bernoulli(0.0));
    }
}
