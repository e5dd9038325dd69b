//! Plain-text matrix files.
//!
//! Factors: a header line `N D` followed by `N` rows of `D` numbers.
//! Covariance: a header line `N` followed by `N` rows of `N` numbers.
//! Separators are whitespace or commas; blank lines and `#` comments are skipped.

use std::path::Path;

use lowrank_spca::{factorize_psd, FactorMatrix};

use crate::CliError;

/// Which layout the file uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Factors,
    Covariance,
}

impl InputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            InputFormat::Factors => "factors",
            InputFormat::Covariance => "covariance",
        }
    }
}

fn numbers(line: &str, lineno: usize) -> Result<Vec<f64>, CliError> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CliError::Parse(format!("line {lineno}: '{t}' is not a number")))
        })
        .collect()
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn header(value: f64, what: &str) -> Result<usize, CliError> {
    if value.fract() != 0.0 || value < 1.0 {
        return Err(CliError::Parse(format!(
            "{what} must be a positive integer, got {value}"
        )));
    }
    Ok(value as usize)
}

/// Reads the header and `rows` data rows of `width` entries each.
fn parse_table(text: &str, header_len: usize) -> Result<(Vec<usize>, Vec<f64>), CliError> {
    let mut lines = content_lines(text);
    let (lineno, first) = lines.next().ok_or_else(|| CliError::Parse("empty input".into()))?;
    let head = numbers(first, lineno)?;
    if head.len() != header_len {
        return Err(CliError::Parse(format!(
            "line {lineno}: expected {header_len} header value(s), got {}",
            head.len()
        )));
    }
    let dims: Vec<usize> = head
        .iter()
        .zip(["N", "D"])
        .map(|(&v, what)| header(v, what))
        .collect::<Result<_, _>>()?;
    let (rows, width) = (dims[0], *dims.get(1).unwrap_or(&dims[0]));
    let mut data = Vec::with_capacity(rows * width);
    let mut seen = 0;
    for (lineno, line) in lines {
        let row = numbers(line, lineno)?;
        if row.len() != width {
            return Err(CliError::Dimension(format!(
                "line {lineno}: expected {width} values, got {}",
                row.len()
            )));
        }
        seen += 1;
        if seen > rows {
            return Err(CliError::Dimension(format!("more than the declared {rows} rows")));
        }
        data.extend(row);
    }
    if seen != rows {
        return Err(CliError::Dimension(format!("declared {rows} rows, found {seen}")));
    }
    Ok((dims, data))
}

pub fn parse_factors(text: &str) -> Result<FactorMatrix, CliError> {
    let (dims, data) = parse_table(text, 2)?;
    Ok(FactorMatrix::new(dims[0], dims[1], data)?)
}

/// Square matrix in row-major order with its size.
pub fn parse_covariance(text: &str) -> Result<(usize, Vec<f64>), CliError> {
    let (dims, data) = parse_table(text, 1)?;
    Ok((dims[0], data))
}

/// Loaded problem: factors of `C - sigma I`.
#[derive(Debug, Clone)]
pub struct LoadedInput {
    pub factors: FactorMatrix,
    pub format: InputFormat,
}

pub fn load(
    path: &Path,
    format: InputFormat,
    rank: Option<usize>,
    sigma: f64,
    tau_rank: f64,
) -> Result<LoadedInput, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let factors = match format {
        InputFormat::Factors => parse_factors(&text)?,
        InputFormat::Covariance => {
            let rank = rank.ok_or_else(|| CliError::Usage("--rank is required with --covariance".into()))?;
            let (n, m) = parse_covariance(&text)?;
            factorize_psd(&m, n, rank, sigma, tau_rank)?
        }
    };
    Ok(LoadedInput { factors, format })
}
