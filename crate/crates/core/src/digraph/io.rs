//! Text edge-list format:
//!
//! ```text
//! n m_red m_blue
//! R v w        (m_red lines)
//! B v w        (m_blue lines)
//! ```
//!
//! Vertices are 0-indexed. Red lines precede blue lines, each sorted by (v, w).

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{ColoredDigraph, GraphError, Vertex};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub fn write_edge_list<W: Write>(cd: &ColoredDigraph, mut out: W) -> io::Result<()> {
    writeln!(out, "{} {} {}", cd.n(), cd.red_count(), cd.blue_count())?;
    for (v, w) in cd.red_edges() {
        writeln!(out, "R {v} {w}")?;
    }
    for (v, w) in cd.blue_edges() {
        writeln!(out, "B {v} {w}")?;
    }
    Ok(())
}

pub fn read_edge_list<R: BufRead>(input: R) -> Result<ColoredDigraph, FormatError> {
    let mut lines = input.lines().enumerate();
    let bad = |line: usize, msg: &str| FormatError::Parse { line: line + 1, msg: msg.to_string() };

    let (hl, header) = lines.next().ok_or_else(|| bad(0, "missing header"))?;
    let header = header?;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(hl, "header must be three integers")))
        .collect::<Result<_, _>>()?;
    let [n, m_red, m_blue] = nums[..] else {
        return Err(bad(hl, "header must be `n m_red m_blue`"));
    };

    let mut red = Vec::with_capacity(m_red);
    let mut blue = Vec::with_capacity(m_blue);
    for (ln, line) in lines {
        let line = line?;
        let mut tok = line.split_whitespace();
        let Some(tag) = tok.next() else { continue };
        let mut vertex = || -> Result<Vertex, FormatError> {
            tok.next()
                .ok_or_else(|| bad(ln, "expected two vertex ids"))?
                .parse()
                .map_err(|_| bad(ln, "vertex id is not an integer"))
        };
        let e = (vertex()?, vertex()?);
        match tag {
            "R" => red.push(e),
            "B" => blue.push(e),
            other => return Err(bad(ln, &format!("unknown edge tag `{other}`"))),
        }
    }
    if red.len() != m_red || blue.len() != m_blue {
        return Err(FormatError::Parse {
            line: 1,
            msg: format!(
                "header promises {m_red} red / {m_blue} blue edges, found {} / {}",
                red.len(),
                blue.len()
            ),
        });
    }
    Ok(ColoredDigraph::from_edges(n, &red, &blue)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{sample_colored, ModelParams};
    use crate::rng::Seed;

    #[test]
    fn round_trip_and_byte_identity() {
        let p = ModelParams::new(300, 5.0).unwrap();
        let cd = sample_colored(&p, Seed(11));
        let mut a = Vec::new();
        write_edge_list(&cd, &mut a).unwrap();
        let mut b = Vec::new();
        write_edge_list(&sample_colored(&p, Seed(11)), &mut b).unwrap();
        assert_eq!(a, b);
        let back = read_edge_list(&a[..]).unwrap();
        assert_eq!(back, cd);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_edge_list(&b"3 1 0\nX 0 1\n"[..]).is_err());
        assert!(read_edge_list(&b"3 2 0\nR 0 1\n"[..]).is_err());
        assert!(read_edge_list(&b"3 1 0\nR 0 0\n"[..]).is_err());
        assert!(read_edge_list(&b""[..]).is_err());
    }
}
