//! Dense matrices over GF(2^t) and the handful of elimination routines the
//! oracle verifier and the codec need.

use crate::gf2::{FieldDescriptor, FieldElement};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

/// Outcome of solving `A x = b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Unique(Vec<FieldElement>),
    /// Consistent but with free variables.
    Underdetermined {
        rank: usize,
    },
    /// Some row reduces to `0 = c` with `c != 0`.
    Inconsistent,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![FieldElement::ZERO; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<FieldElement>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        Matrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: FieldElement) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[FieldElement] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<FieldElement>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                out.set(i, jj, self.get(i, j));
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        Matrix {
            rows: rows.len(),
            cols: self.cols,
            data: rows
                .iter()
                .flat_map(|&i| self.row(i).iter().copied())
                .collect(),
        }
    }

    /// `self * v`.
    pub fn mul_vec(&self, field: &FieldDescriptor, v: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| field.mul(a, b))
                    .sum()
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    /// Clears column `col` in row `target` using row `pivot_row`, whose
    /// entry in `col` is nonzero. Scales `target` rather than dividing, so no
    /// inversions are needed; the row space is unchanged.
    fn cross_eliminate(
        &mut self,
        field: &FieldDescriptor,
        target: usize,
        pivot_row: usize,
        col: usize,
    ) {
        let p = self.get(pivot_row, col);
        let c = self.get(target, col);
        if c.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = field.mul(p, self.get(target, j)) + field.mul(c, self.get(pivot_row, j));
            self.set(target, j, v);
        }
    }

    /// Row-reduces in place, returning the pivot column of each of the
    /// leading `rank` rows.
    pub fn echelon(&mut self, field: &FieldDescriptor) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in 0..self.cols {
            if next == self.rows {
                break;
            }
            let Some(p) = (next..self.rows).find(|&i| !self.get(i, col).is_zero()) else {
                continue;
            };
            self.swap_rows(next, p);
            for i in next + 1..self.rows {
                self.cross_eliminate(field, i, next, col);
            }
            pivots.push(col);
            next += 1;
        }
        pivots
    }

    pub fn rank(&self, field: &FieldDescriptor) -> usize {
        self.clone().echelon(field).len()
    }

    /// Square and nonsingular.
    pub fn is_nonsingular(&self, field: &FieldDescriptor) -> bool {
        self.rows == self.cols && self.rank(field) == self.rows
    }

    /// Eliminates the given columns using pivots inside them, and returns
    /// the rows left without a pivot there, restricted to the remaining
    /// columns. When the columns index erased coordinates, the result is a
    /// parity-check matrix of the code punctured at them.
    pub fn eliminate_columns(&self, field: &FieldDescriptor, cols: &[usize]) -> Matrix {
        let mut m = self.clone();
        let mut next = 0;
        for &col in cols {
            let Some(p) = (next..m.rows).find(|&i| !m.get(i, col).is_zero()) else {
                continue;
            };
            m.swap_rows(next, p);
            for i in 0..m.rows {
                if i != next {
                    m.cross_eliminate(field, i, next, col);
                }
            }
            next += 1;
        }
        let keep: Vec<usize> = (0..m.cols).filter(|j| !cols.contains(j)).collect();
        let rest: Vec<usize> = (next..m.rows).collect();
        m.select_rows(&rest).select_columns(&keep)
    }

    /// Solves `self * x = rhs` by Gauss-Jordan elimination.
    pub fn solve(&self, field: &FieldDescriptor, rhs: &[FieldElement]) -> Solution {
        assert_eq!(rhs.len(), self.rows);
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for (i, &b) in rhs.iter().enumerate() {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, b);
        }
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in 0..self.cols {
            if next == aug.rows {
                break;
            }
            let Some(p) = (next..aug.rows).find(|&i| !aug.get(i, col).is_zero()) else {
                continue;
            };
            aug.swap_rows(next, p);
            let inv = field.inv(aug.get(next, col)).unwrap();
            for j in 0..aug.cols {
                let v = field.mul(inv, aug.get(next, j));
                aug.set(next, j, v);
            }
            for i in 0..aug.rows {
                if i != next {
                    aug.cross_eliminate(field, i, next, col);
                }
            }
            pivots.push(col);
            next += 1;
        }
        if (next..aug.rows).any(|i| !aug.get(i, self.cols).is_zero()) {
            return Solution::Inconsistent;
        }
        if pivots.len() < self.cols {
            return Solution::Underdetermined { rank: pivots.len() };
        }
        Solution::Unique((0..self.cols).map(|i| aug.get(i, self.cols)).collect())
    }
}
