//! SDPA sparse text format.
//!
//! SDPA solves `min c.x` subject to `sum_k x_k F_k - F_0 >= 0` with free `x`.
//! A problem `max offset + b.y` subject to `G_0 + sum_k y_k G_k >= 0` is
//! written with `x = y`, `c = -b`, `F_k = G_k` and `F_0 = -G_0`, so the
//! SDPA optimum is `offset - bound`. The offset is carried in the comment
//! line. The 1x1 box constraints are gathered into one trailing diagonal
//! block.
//! Only upper-triangular nonzero entries are written, in order of matrix,
//! block, row and column; numbers use the shortest form that parses back
//! to the same `f64`.

use std::fmt::Write as _;

use conic::{LmiBlock, Matrix, Problem};

use crate::error::{invalid, Result};
use crate::model::SdpProblem;

pub const FORMAT_TAG: &str = "foldcode-sdpa";

pub fn export_sdpa(prob: &SdpProblem) -> String {
    let header = format!(
        "{FORMAT_TAG} version={} n={} d={} coefficients={}",
        env!("CARGO_PKG_VERSION"),
        prob.n,
        prob.d,
        prob.mode.as_str()
    );
    write_sdpa(&prob.to_conic(), &header, prob.blocks.len())
}

/// Writes any problem. Blocks from index `diagonal_from` on must be 1x1
/// and form the diagonal block. `header` must not contain a newline.
pub fn write_sdpa(prob: &Problem, header: &str, diagonal_from: usize) -> String {
    let split = diagonal_from.min(prob.blocks.len());
    let square: Vec<&LmiBlock> = prob.blocks[..split].iter().collect();
    let scalar: Vec<&LmiBlock> = prob.blocks[split..].iter().collect();
    assert!(
        scalar.iter().all(|b| b.dim() == 1),
        "diagonal section holds a block larger than 1x1"
    );
    let mut out = String::new();
    writeln!(out, "\"{header} offset={}", prob.objective_offset).unwrap();
    writeln!(out, "{}", prob.num_vars).unwrap();
    let mut structure: Vec<String> = square.iter().map(|b| b.dim().to_string()).collect();
    if !scalar.is_empty() {
        structure.push(format!("-{}", scalar.len()));
    }
    writeln!(out, "{}", structure.len()).unwrap();
    writeln!(out, "{}", structure.join(" ")).unwrap();
    let c: Vec<String> = prob.objective.iter().map(|v| fmt(-v)).collect();
    writeln!(out, "{}", c.join(" ")).unwrap();

    // (matrix, block, row, col, value); matrix 0 is F_0
    let mut entries: Vec<(usize, usize, usize, usize, f64)> = Vec::new();
    for (bi, b) in square.iter().enumerate() {
        push_upper(&mut entries, 0, bi + 1, &b.constant, -1.0);
        for (k, f) in &b.coefficients {
            push_upper(&mut entries, k + 1, bi + 1, f, 1.0);
        }
    }
    let diag = square.len() + 1;
    for (pos, b) in scalar.iter().enumerate() {
        let c0 = b.constant[(0, 0)];
        if c0 != 0.0 {
            entries.push((0, diag, pos + 1, pos + 1, -c0));
        }
        for (k, f) in &b.coefficients {
            if f[(0, 0)] != 0.0 {
                entries.push((k + 1, diag, pos + 1, pos + 1, f[(0, 0)]));
            }
        }
    }
    entries.sort_by(|a, b| (a.0, a.1, a.2, a.3).cmp(&(b.0, b.1, b.2, b.3)));
    for (m, b, i, j, v) in entries {
        writeln!(out, "{m} {b} {i} {j} {}", fmt(v)).unwrap();
    }
    out
}

fn push_upper(
    out: &mut Vec<(usize, usize, usize, usize, f64)>,
    mat: usize,
    block: usize,
    m: &Matrix,
    sign: f64,
) {
    for i in 0..m.rows() {
        for j in i..m.cols() {
            let v = m[(i, j)];
            if v != 0.0 {
                out.push((mat, block, i + 1, j + 1, sign * v));
            }
        }
    }
}

fn fmt(v: f64) -> String {
    // `Display` for f64 prints the shortest string that round-trips
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpaFile {
    pub header: String,
    pub problem: Problem,
}

impl SdpaFile {
    /// Value of a `key=value` token of the comment line.
    pub fn header_field(&self, key: &str) -> Option<&str> {
        self.header
            .split_whitespace()
            .find_map(|tok| tok.strip_prefix(key)?.strip_prefix('='))
    }
}

/// Reads a file written by [`write_sdpa`] back into LMI form; the diagonal
/// block is split into 1x1 blocks.
pub fn parse_sdpa(text: &str) -> Result<SdpaFile> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let first = lines.next().ok_or_else(|| invalid("empty SDPA text"))?;
    let header = first
        .strip_prefix('"')
        .or_else(|| first.strip_prefix('*'))
        .ok_or_else(|| invalid("missing SDPA comment line"))?
        .to_string();
    let offset = header
        .split_whitespace()
        .find_map(|t| t.strip_prefix("offset="))
        .map(parse_f64)
        .transpose()?
        .unwrap_or(0.0);
    let header = header
        .split_whitespace()
        .filter(|t| !t.starts_with("offset="))
        .collect::<Vec<_>>()
        .join(" ");

    let m: usize = parse_num(lines.next(), "variable count")?;
    let nblocks: usize = parse_num(lines.next(), "block count")?;
    let structure: Vec<i64> = lines
        .next()
        .ok_or_else(|| invalid("missing block structure"))?
        .split(|c: char| {
            c.is_whitespace() || c == ',' || c == '{' || c == '}' || c == '(' || c == ')'
        })
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<i64>()
                .map_err(|_| invalid(format!("bad block size {s:?}")))
        })
        .collect::<Result<_>>()?;
    if structure.len() != nblocks {
        return Err(invalid("block structure length differs from block count"));
    }
    let c: Vec<f64> = lines
        .next()
        .ok_or_else(|| invalid("missing objective"))?
        .split(|ch: char| ch.is_whitespace() || ch == ',' || ch == '{' || ch == '}')
        .filter(|s| !s.is_empty())
        .map(parse_f64)
        .collect::<Result<_>>()?;
    if c.len() != m {
        return Err(invalid("objective length differs from variable count"));
    }

    // per block: F_0 and the coefficient matrices
    let mut mats: Vec<Vec<Option<Matrix>>> = structure.iter().map(|_| vec![None; m + 1]).collect();
    for line in lines {
        let tok: Vec<&str> = line.split_whitespace().collect();
        if tok.len() != 5 {
            return Err(invalid(format!("bad entry line {line:?}")));
        }
        let mat: usize = parse_num(Some(tok[0]), "matrix index")?;
        let blk: usize = parse_num(Some(tok[1]), "block index")?;
        let i: usize = parse_num(Some(tok[2]), "row")?;
        let j: usize = parse_num(Some(tok[3]), "column")?;
        let v = parse_f64(tok[4])?;
        if mat > m || blk == 0 || blk > nblocks {
            return Err(invalid(format!("entry out of range: {line:?}")));
        }
        let size = structure[blk - 1].unsigned_abs() as usize;
        if i == 0 || j == 0 || i > size || j > size || (structure[blk - 1] < 0 && i != j) {
            return Err(invalid(format!("entry out of range: {line:?}")));
        }
        let slot = mats[blk - 1][mat].get_or_insert_with(|| Matrix::zeros(size, size));
        let v = if mat == 0 { -v } else { v };
        slot[(i - 1, j - 1)] = v;
        slot[(j - 1, i - 1)] = v;
    }

    let mut problem = Problem::new(c.iter().map(|v| -v).collect()).with_offset(offset);
    for (s, per) in structure.iter().zip(mats) {
        let size = s.unsigned_abs() as usize;
        let mut per = per.into_iter();
        let constant = per
            .next()
            .unwrap()
            .unwrap_or_else(|| Matrix::zeros(size, size));
        let coefficients: Vec<(usize, Matrix)> = per
            .enumerate()
            .filter_map(|(k, f)| f.map(|f| (k, f)))
            .collect();
        if *s > 0 {
            problem.push(LmiBlock {
                constant,
                coefficients,
            });
        } else {
            for r in 0..size {
                let terms: Vec<(usize, f64)> = coefficients
                    .iter()
                    .filter(|(_, f)| f[(r, r)] != 0.0)
                    .map(|(k, f)| (*k, f[(r, r)]))
                    .collect();
                problem.push(LmiBlock::scalar(constant[(r, r)], &terms));
            }
        }
    }
    Ok(SdpaFile { header, problem })
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| invalid(format!("bad number {s:?}")))
}

fn parse_num<T: std::str::FromStr>(s: Option<&str>, what: &str) -> Result<T> {
    let s = s.ok_or_else(|| invalid(format!("missing {what}")))?;
    let first = s.split_whitespace().next().unwrap_or("");
    first
        .parse()
        .map_err(|_| invalid(format!("bad {what}: {s:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_sdp, build_sdp_mode, Coefficients};

    #[test]
    fn round_trip() {
        for (n, d) in [(8, 2), (9, 3), (10, 3), (13, 2)] {
            let prob = build_sdp(n, d).unwrap();
            let text = export_sdpa(&prob);
            let back = parse_sdpa(&text).unwrap();
            assert_eq!(back.problem, prob.to_conic(), "n={n} d={d}");
            assert_eq!(back.header_field("n"), Some(n.to_string().as_str()));
            assert_eq!(
                write_sdpa(&back.problem, &back.header, prob.blocks.len()),
                text
            );
        }
        let lit = build_sdp_mode(12, 4, Coefficients::Literal).unwrap();
        let back = parse_sdpa(&export_sdpa(&lit)).unwrap();
        assert_eq!(back.problem, lit.to_conic());
    }

    #[test]
    fn block_structure_line() {
        let prob = build_sdp(8, 2).unwrap();
        let text = export_sdpa(&prob);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("\"foldcode-sdpa"));
        assert_eq!(lines[2], "11");
        assert_eq!(
            lines[3],
            format!("5 3 3 1 1 5 3 3 1 1 -{}", prob.boxes.len())
        );
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_sdpa("").is_err());
        assert!(parse_sdpa("\"x\n1\n1\n2\n1\n1 2 1 1 1\n").is_err());
        assert!(parse_sdpa("\"x\n1\n1\n2\n1\n1 1 3 1 1\n").is_err());
    }
}
