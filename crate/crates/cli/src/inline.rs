//! Inline matrix and vector arguments: `"1,2;3,4"` or `"1 2; 3 4"`.

use crossdim::{CrossVec, Mat};

fn numbers(text: &str) -> Result<Vec<f64>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("not a number: {s:?}")))
        .collect()
}

pub fn parse_vector(text: &str) -> Result<CrossVec, String> {
    CrossVec::new(numbers(text)?).map_err(|e| e.to_string())
}

/// Rows separated by `;`, entries by commas or whitespace.
pub fn parse_matrix(text: &str) -> Result<Mat, String> {
    let rows = text
        .split(';')
        .filter(|r| !r.trim().is_empty())
        .map(numbers)
        .collect::<Result<Vec<_>, _>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(format!("ragged matrix: row {} has {} entries, row 1 has {cols}", i + 1, r.len()));
    }
    Mat::new(rows.len(), cols, rows.concat()).map_err(|e| e.to_string())
}
