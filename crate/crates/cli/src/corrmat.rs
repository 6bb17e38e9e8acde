//! `CORRMAT v1` text format for a transmit/receive correlation pair.
//!
//! ```text
//! CORRMAT v1 <n_t> <n_r>
//! <n_t rows of n_t complex literals>      # Psi_T
//!
//! <n_r rows of n_r complex literals>      # Psi_R
//! ```
//!
//! Literals are `a`, `bi`, `a+bi` or `a-bi`; `#` starts a comment.

use std::fmt;

use mimo_capacity::linalg::CMat;
use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    /// 1-based; 0 when the problem is end of input.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "end of input: {}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ParseError {}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

pub fn parse_complex(tok: &str) -> Option<Complex64> {
    let t = tok.trim();
    if t.is_empty() {
        return None;
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    // split at the last sign that is not leading and not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| -> Option<f64> {
        match s {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => s.parse().ok(),
        }
    };
    match split {
        Some(k) => Some(Complex64::new(body[..k].parse().ok()?, imag(&body[k..])?)),
        None => Some(Complex64::new(0.0, imag(body)?)),
    }
}

/// 17 significant digits, imaginary part omitted when zero.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.16e}", z.re)
    } else {
        let sign = if z.im.is_sign_negative() { '-' } else { '+' };
        format!("{:.16e}{}{:.16e}i", z.re, sign, z.im.abs())
    }
}

pub fn parse_corrmat(text: &str) -> Result<(CMat, CMat), ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| err(0, "missing CORRMAT header"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "CORRMAT" {
        return Err(err(hl, "expected header `CORRMAT v1 <n_t> <n_r>`"));
    }
    if parts[1] != "v1" {
        return Err(err(hl, format!("unsupported version `{}`", parts[1])));
    }
    let dim = |s: &str| s.parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| err(hl, format!("bad dimension `{s}`")));
    let (n_t, n_r) = (dim(parts[2])?, dim(parts[3])?);
    let mut read = |n: usize, name: &str| -> Result<CMat, ParseError> {
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            let (ln, row) = lines.next().ok_or_else(|| err(0, format!("{name} needs {n} rows, found {r}")))?;
            let toks: Vec<&str> = row.split_whitespace().collect();
            if toks.len() != n {
                return Err(err(ln, format!("{name} row has {} entries, expected {n}", toks.len())));
            }
            for t in toks {
                data.push(parse_complex(t).ok_or_else(|| err(ln, format!("bad complex literal `{t}`")))?);
            }
        }
        CMat::from_rows(n, n, data).map_err(|e| err(0, e.to_string()))
    };
    let psi_t = read(n_t, "Psi_T")?;
    let psi_r = read(n_r, "Psi_R")?;
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "unexpected content after Psi_R"));
    }
    Ok((psi_t, psi_r))
}

fn write_block(out: &mut String, m: &CMat) {
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|&z| format_complex(z)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

pub fn write_corrmat(psi_t: &CMat, psi_r: &CMat) -> String {
    let mut out = format!("CORRMAT v1 {} {}\n", psi_t.rows(), psi_r.rows());
    write_block(&mut out, psi_t);
    out.push('\n');
    write_block(&mut out, psi_r);
    out
}
