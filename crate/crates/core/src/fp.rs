//! Dense matrices over a prime field and exact Gaussian elimination.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    rows: usize,
    cols: usize,
    p: u64,
    data: Vec<u64>,
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, p - 2, p)
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

impl FpMatrix {
    pub fn zeros(rows: usize, cols: usize, p: u64) -> Self {
        FpMatrix {
            rows,
            cols,
            p,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, p: u64) -> Self {
        let mut m = Self::zeros(n, n, p);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from signed integer rows, reducing every entry mod `p`.
    pub fn from_rows(rows: &[Vec<i64>], p: u64) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|&v| v.rem_euclid(p as i64) as u64))
            .collect();
        Ok(FpMatrix {
            rows: r,
            cols: c,
            p,
            data,
        })
    }

    pub fn from_columns(cols: &[Vec<u64>], n: usize, p: u64) -> Self {
        let mut m = Self::zeros(n, cols.len(), p);
        for (j, col) in cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v % p);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row(&self, i: usize) -> Vec<u64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows, self.p);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &FpMatrix) -> Result<FpMatrix> {
        if self.cols != other.rows || self.p != other.p {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.p;
        let mut out = Self::zeros(self.rows, other.cols, p);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * out.cols + j;
                    out.data[idx] = (out.data[idx] + a * other.get(k, j)) % p;
                }
            }
        }
        Ok(out)
    }

    /// Horizontal concatenation.
    pub fn hcat(blocks: &[&FpMatrix]) -> Result<FpMatrix> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::Shape("empty concatenation".into()))?;
        let rows = first.rows;
        let p = first.p;
        if blocks.iter().any(|b| b.rows != rows || b.p != p) {
            return Err(Error::Shape("row counts differ in hcat".into()));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols, p);
        let mut off = 0;
        for b in blocks {
            for i in 0..rows {
                for j in 0..b.cols {
                    out.set(i, off + j, b.get(i, j));
                }
            }
            off += b.cols;
        }
        Ok(out)
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let p = self.p;
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(piv) = (row..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            if piv != row {
                for j in 0..self.cols {
                    self.data.swap(piv * self.cols + j, row * self.cols + j);
                }
            }
            let inv = inv_mod(self.get(row, col), p);
            for j in 0..self.cols {
                let v = self.get(row, j) * inv % p;
                self.set(row, j, v);
            }
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let f = self.get(r, col);
                if f == 0 {
                    continue;
                }
                for j in 0..self.cols {
                    let v = (self.get(r, j) + p - f * self.get(row, j) % p) % p;
                    self.set(r, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        // eliminate on whichever orientation has fewer rows
        if self.rows <= self.cols {
            self.clone().rref_in_place().len()
        } else {
            self.transpose().rref_in_place().len()
        }
    }

    /// Basis of the right null space `{x : self * x = 0}`, one vector per
    /// free column.
    pub fn null_space(&self) -> Vec<Vec<u64>> {
        let p = self.p;
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![0u64; self.cols];
                x[f] = 1;
                for (r, &pc) in pivots.iter().enumerate() {
                    x[pc] = (p - m.get(r, f)) % p;
                }
                x
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_nullspace() {
        let m = FpMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]], 2).unwrap();
        // rows sum to zero over F2
        assert_eq!(m.rank(), 2);
        let ns = m.null_space();
        assert_eq!(ns.len(), 1);
        assert_eq!(ns[0], vec![1, 1, 1]);
        let m3 = FpMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]], 3).unwrap();
        assert_eq!(m3.rank(), 3);
    }

    #[test]
    fn negative_entries_reduce() {
        let m = FpMatrix::from_rows(&[vec![-1, 4]], 3).unwrap();
        assert_eq!(m.row(0), vec![2, 1]);
        assert_eq!(inv_mod(2, 3), 2);
        assert_eq!(inv_mod(3, 7), 5);
    }

    #[test]
    fn product() {
        let a = FpMatrix::from_rows(&[vec![1, 2], vec![0, 1]], 5).unwrap();
        let b = a.mul(&a).unwrap();
        assert_eq!(b.row(0), vec![1, 4]);
        assert!(FpMatrix::zeros(2, 3, 5).mul(&a).is_err());
    }
}
