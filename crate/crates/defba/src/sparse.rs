//! Minimal row-oriented sparse matrix used for constraint assembly.
//!
//! The models handled here are desk scale, so this intentionally stays a
//! `Vec<Vec<(col, val)>>` with the handful of operations the assembly code
//! needs. Dense views are materialized only where the simplex backend wants
//! them.

/// Sparse matrix stored as one coefficient list per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMat {
    ncols: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMat {
    pub fn new(ncols: usize) -> Self {
        SparseMat { ncols, rows: Vec::new() }
    }

    pub fn with_rows(nrows: usize, ncols: usize) -> Self {
        SparseMat { ncols, rows: vec![Vec::new(); nrows] }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Appends a row; zero coefficients are dropped, duplicate columns summed.
    pub fn push_row(&mut self, entries: impl IntoIterator<Item = (usize, f64)>) {
        let mut row: Vec<(usize, f64)> = Vec::new();
        for (c, v) in entries {
            assert!(c < self.ncols, "column {} out of bounds ({})", c, self.ncols);
            if v == 0.0 {
                continue;
            }
            match row.iter_mut().find(|(rc, _)| *rc == c) {
                Some((_, rv)) => *rv += v,
                None => row.push((c, v)),
            }
        }
        row.sort_by_key(|&(c, _)| c);
        row.retain(|&(_, v)| v != 0.0);
        self.rows.push(row);
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        assert!(c < self.ncols);
        let row = &mut self.rows[r];
        match row.iter_mut().find(|(rc, _)| *rc == c) {
            Some((_, rv)) => *rv = v,
            None => {
                if v != 0.0 {
                    row.push((c, v));
                    row.sort_by_key(|&(c, _)| c);
                }
            }
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.rows[r]
            .iter()
            .find(|(rc, _)| *rc == c)
            .map(|&(_, v)| v)
            .unwrap_or(0.0)
    }

    pub fn row(&self, r: usize) -> &[(usize, f64)] {
        &self.rows[r]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[(usize, f64)]> {
        self.rows.iter().map(|r| r.as_slice())
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        self.rows[r].iter().map(|&(c, v)| v * x[c]).sum()
    }

    /// Stacks `other` below `self`; column counts must match.
    pub fn vstack(&mut self, other: &SparseMat) {
        assert_eq!(self.ncols, other.ncols);
        self.rows.extend(other.rows.iter().cloned());
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.rows.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                out[i][c] = v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_row_merges_and_sorts() {
        let mut m = SparseMat::new(4);
        m.push_row([(2, 1.0), (0, -1.0), (2, 2.0), (3, 0.0)]);
        assert_eq!(m.row(0), &[(0, -1.0), (2, 3.0)]);
        assert_eq!(m.get(0, 3), 0.0);
    }

    #[test]
    fn mul_vec_matches_dense() {
        let mut m = SparseMat::new(3);
        m.push_row([(0, 1.0), (2, -2.0)]);
        m.push_row([(1, 4.0)]);
        let y = m.mul_vec(&[1.0, 2.0, 3.0]);
        assert_eq!(y, vec![-5.0, 8.0]);
    }
}
