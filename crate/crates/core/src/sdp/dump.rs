//! Plain-text dump of a problem instance for cross-checking with other solvers.
//!
//! ```text
//! sdp <block_dim> <n_blocks> <n_constraints>
//! objective
//! <block_dim rows of "re im re im ..."> x n_blocks
//! constraint ge|le <rhs>
//! <block_dim rows> x n_blocks
//! ...
//! ```

use std::fmt::Write as _;

use num_complex::Complex;

use super::{Constraint, SdpError, SdpProblem, Sense};
use crate::numerics::CMatrix;

fn write_block(out: &mut String, m: &CMatrix<f64>) {
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols())
            .map(|j| format!("{:e} {:e}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

pub fn write_dump(problem: &SdpProblem<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "sdp {} {} {}",
        problem.block_dim,
        problem.n_blocks,
        problem.constraints.len()
    );
    out.push_str("objective\n");
    for c in &problem.objective {
        write_block(&mut out, c);
    }
    for con in &problem.constraints {
        let sense = match con.sense {
            Sense::Ge => "ge",
            Sense::Le => "le",
        };
        let _ = writeln!(out, "constraint {sense} {:e}", con.rhs);
        for a in &con.coeffs {
            write_block(&mut out, a);
        }
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str, SdpError> {
        for (i, l) in self.inner.by_ref() {
            self.line = i + 1;
            let l = l.trim();
            if !l.is_empty() {
                return Ok(l);
            }
        }
        Err(self.err("unexpected end of input"))
    }

    fn err(&self, message: &str) -> SdpError {
        SdpError::Parse {
            line: self.line,
            message: message.to_string(),
        }
    }

    fn block(&mut self, n: usize) -> Result<CMatrix<f64>, SdpError> {
        let mut data = Vec::with_capacity(n * n);
        for _ in 0..n {
            let nums: Vec<f64> = self
                .next()?
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| self.err("bad number"))?;
            if nums.len() != 2 * n {
                return Err(self.err(&format!("expected {} numbers, got {}", 2 * n, nums.len())));
            }
            data.extend(nums.chunks(2).map(|p| Complex::new(p[0], p[1])));
        }
        CMatrix::from_row_major(n, n, data).map_err(|e| self.err(&e.to_string()))
    }
}

pub fn parse_dump(text: &str) -> Result<SdpProblem<f64>, SdpError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let header: Vec<&str> = lines.next()?.split_whitespace().collect();
    let dims: Vec<usize> = match header.as_slice() {
        ["sdp", rest @ ..] if rest.len() == 3 => rest
            .iter()
            .map(|t| t.parse())
            .collect::<Result<_, _>>()
            .map_err(|_| lines.err("bad header"))?,
        _ => return Err(lines.err("expected `sdp <block_dim> <n_blocks> <n_constraints>`")),
    };
    let (n, k, m) = (dims[0], dims[1], dims[2]);
    if lines.next()? != "objective" {
        return Err(lines.err("expected `objective`"));
    }
    let objective = (0..k).map(|_| lines.block(n)).collect::<Result<_, _>>()?;
    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let head: Vec<&str> = lines.next()?.split_whitespace().collect();
        let (sense, rhs) = match head.as_slice() {
            ["constraint", s, r] => {
                let sense = match *s {
                    "ge" => Sense::Ge,
                    "le" => Sense::Le,
                    _ => return Err(lines.err("sense must be `ge` or `le`")),
                };
                (sense, r.parse::<f64>().map_err(|_| lines.err("bad rhs"))?)
            }
            _ => return Err(lines.err("expected `constraint <ge|le> <rhs>`")),
        };
        let coeffs = (0..k).map(|_| lines.block(n)).collect::<Result<_, _>>()?;
        constraints.push(Constraint { coeffs, sense, rhs });
    }
    let problem = SdpProblem {
        block_dim: n,
        n_blocks: k,
        objective,
        constraints,
    };
    problem.validate()?;
    Ok(problem)
}
