//! Square n×n matrices, row/column means and the double-centering (star) transform.
//!
//! A matrix is either dense (row-major) or uniform: every cell holds the same value.
//! Uniform matrices keep homogeneous models O(1) in n, which is what lets the
//! worked heavy-tail example run at n = 10⁹.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
enum Storage<T> {
    Uniform(T),
    Dense(Vec<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Square<T> {
    n: usize,
    storage: Storage<T>,
}

pub type RealMatrix = Square<f64>;

impl<T> Square<T> {
    pub fn uniform(n: usize, value: T) -> Result<Self> {
        check_order(n)?;
        Ok(Square {
            n,
            storage: Storage::Uniform(value),
        })
    }

    /// Row-major cells.
    pub fn from_vec(n: usize, cells: Vec<T>) -> Result<Self> {
        check_order(n)?;
        if n.checked_mul(n) != Some(cells.len()) {
            return Err(Error::DimensionMismatch(format!(
                "{} cells given for an {n}×{n} matrix",
                cells.len()
            )));
        }
        Ok(Square {
            n,
            storage: Storage::Dense(cells),
        })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        check_order(n)?;
        let mut cells = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            cells.extend(row);
        }
        Self::from_vec(n, cells)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.storage, Storage::Uniform(_))
    }

    pub fn uniform_value(&self) -> Option<&T> {
        match &self.storage {
            Storage::Uniform(v) => Some(v),
            Storage::Dense(_) => None,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        assert!(i < self.n && j < self.n, "index ({i}, {j}) out of range");
        match &self.storage {
            Storage::Uniform(v) => v,
            Storage::Dense(cells) => &cells[i * self.n + j],
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Square<U> {
        Square {
            n: self.n,
            storage: match &self.storage {
                Storage::Uniform(v) => Storage::Uniform(f(v)),
                Storage::Dense(cells) => Storage::Dense(cells.iter().map(f).collect()),
            },
        }
    }

    /// Fallible cellwise map; errors carry the cell coordinates.
    pub fn try_map_indexed<U>(
        &self,
        mut f: impl FnMut(usize, usize, &T) -> Result<U>,
    ) -> Result<Square<U>> {
        let n = self.n;
        Ok(Square {
            n,
            storage: match &self.storage {
                Storage::Uniform(v) => Storage::Uniform(f(0, 0, v).map_err(|e| e.at_cell(0, 0))?),
                Storage::Dense(cells) => Storage::Dense(
                    cells
                        .iter()
                        .enumerate()
                        .map(|(k, v)| f(k / n, k % n, v).map_err(|e| e.at_cell(k / n, k % n)))
                        .collect::<Result<_>>()?,
                ),
            },
        })
    }

    /// Cellwise combination; uniform only when both inputs are.
    pub fn zip_map<U, V>(&self, other: &Square<U>, mut f: impl FnMut(&T, &U) -> V) -> Result<Square<V>> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "{}×{0} vs {}×{1}",
                self.n, other.n
            )));
        }
        let n = self.n;
        let storage = match (&self.storage, &other.storage) {
            (Storage::Uniform(a), Storage::Uniform(b)) => Storage::Uniform(f(a, b)),
            _ => Storage::Dense(
                (0..n * n)
                    .map(|k| f(self.get(k / n, k % n), other.get(k / n, k % n)))
                    .collect(),
            ),
        };
        Ok(Square { n, storage })
    }

    /// Row-major iterator over all n² cells (materializes nothing, but is O(n²)).
    pub fn iter(&self) -> impl Iterator<Item = &T> + '_ {
        let n = self.n;
        (0..n * n).map(move |k| self.get(k / n, k % n))
    }

    pub fn rows(&self) -> Vec<Vec<&T>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Row-major cell at each position in `0..n²`, with coordinates.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, &T)> + '_ {
        let n = self.n;
        (0..n * n).map(move |k| (k / n, k % n, self.get(k / n, k % n)))
    }
}

fn check_order(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::DimensionMismatch(format!("matrix order must be ≥ 2, got {n}")));
    }
    Ok(())
}

/// Neumaier-compensated sum in iteration order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

impl RealMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        Self::uniform(n, 0.0)
    }

    /// Σᵢⱼ f(mᵢⱼ), compensated, row-major. Uniform matrices contribute n²·f(m).
    pub fn sum_by(&self, f: impl Fn(f64) -> f64) -> f64 {
        match &self.storage {
            Storage::Uniform(v) => (self.n as f64) * (self.n as f64) * f(*v),
            Storage::Dense(cells) => compensated_sum(cells.iter().map(|&v| f(v))),
        }
    }

    pub fn sum(&self) -> f64 {
        self.sum_by(|v| v)
    }

    pub fn max_abs(&self) -> f64 {
        match &self.storage {
            Storage::Uniform(v) => v.abs(),
            Storage::Dense(cells) => cells.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// mᵢ. for each row.
    pub fn row_means(&self) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| compensated_sum((0..n).map(|j| *self.get(i, j))) / n as f64)
            .collect()
    }

    /// m.ⱼ for each column.
    pub fn col_means(&self) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|j| compensated_sum((0..n).map(|i| *self.get(i, j))) / n as f64)
            .collect()
    }

    /// m..
    pub fn grand_mean(&self) -> f64 {
        match &self.storage {
            Storage::Uniform(v) => *v,
            Storage::Dense(_) => self.sum() / (self.n as f64 * self.n as f64),
        }
    }

    /// Double centering m*ᵢⱼ = mᵢⱼ − mᵢ. − m.ⱼ + m.. .
    pub fn star(&self) -> RealMatrix {
        let n = self.n;
        match &self.storage {
            Storage::Uniform(_) => Square {
                n,
                storage: Storage::Uniform(0.0),
            },
            Storage::Dense(cells) => {
                let rows = self.row_means();
                let cols = self.col_means();
                let grand = self.grand_mean();
                let out = cells
                    .iter()
                    .enumerate()
                    .map(|(k, &m)| m - rows[k / n] - cols[k % n] + grand)
                    .collect();
                Square {
                    n,
                    storage: Storage::Dense(out),
                }
            }
        }
    }

    /// Largest |row mean| or |column mean|.
    pub fn max_margin_mean(&self) -> f64 {
        match &self.storage {
            Storage::Uniform(v) => v.abs(),
            Storage::Dense(_) => self
                .row_means()
                .into_iter()
                .chain(self.col_means())
                .fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// Dense copy (for output and CSV round trips).
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| *self.get(i, j)).collect())
            .collect()
    }
}

/// Outcome of a centering check cᵢ. = c.ⱼ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenteringCheck {
    pub centered: bool,
    pub max_violation: f64,
    pub tolerance: f64,
}

/// Default centering tolerance: 1e−10 · n · max|c|.
pub fn default_centering_tol(c: &RealMatrix) -> f64 {
    1e-10 * c.n() as f64 * c.max_abs()
}

/// Whether every row and column mean of `c` lies within `tol` of zero.
pub fn check_centering(c: &RealMatrix, tol: f64) -> CenteringCheck {
    let max_violation = c.max_margin_mean();
    CenteringCheck {
        centered: max_violation <= tol,
        max_violation,
        tolerance: tol,
    }
}

pub(crate) fn require_centered(which: &'static str, m: &RealMatrix) -> Result<()> {
    let check = check_centering(m, default_centering_tol(m));
    if check.centered {
        Ok(())
    } else {
        Err(Error::CenteringViolated {
            which,
            violation: check.max_violation,
            tolerance: check.tolerance,
        })
    }
}

/// Reads a header-less, row-major CSV matrix of n rows × n columns.
pub fn read_csv_matrix<R: std::io::Read>(reader: R, n: Option<usize>) -> Result<RealMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidArgument(format!("csv row {i}: {e}")))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, field)| {
                field.parse::<f64>().map_err(|_| {
                    Error::InvalidArgument(format!("csv row {i}, column {j}: {field:?} is not a number"))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if let Some(n) = n {
        if rows.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} rows, expected {n}",
                rows.len()
            )));
        }
    }
    RealMatrix::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> RealMatrix {
        RealMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn assert_all_close(a: &RealMatrix, b: &RealMatrix, tol: f64) {
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() <= tol, "{x} vs {y}");
        }
    }

    #[test]
    fn star_of_constant_is_zero() {
        let c = RealMatrix::from_vec(3, vec![7.0; 9]).unwrap();
        assert_all_close(&c.star(), &RealMatrix::zeros(3).unwrap(), 1e-14);
        assert_eq!(RealMatrix::uniform(5, 7.0).unwrap().star().sum(), 0.0);
    }

    #[test]
    fn star_of_additive_is_zero() {
        let a = [1.0, -2.0, 0.5, 4.0];
        let b = [3.0, 0.25, -1.0, 2.0];
        let cells = (0..16).map(|k| a[k / 4] + b[k % 4]).collect();
        let s = RealMatrix::from_vec(4, cells).unwrap().star();
        assert!(s.max_abs() < 1e-14);
    }

    #[test]
    fn star_two_by_two() {
        let s = m(&[&[1.0, 0.0], &[0.0, 0.0]]).star();
        assert_eq!(s, m(&[&[0.25, -0.25], &[-0.25, 0.25]]));
    }

    #[test]
    fn centering_checks() {
        assert!(check_centering(&m(&[&[1.0, -1.0], &[-1.0, 1.0]]), 1e-12).centered);
        let c = check_centering(&m(&[&[1.0, 0.0], &[0.0, 0.0]]), 1e-10);
        assert!(!c.centered);
        assert_eq!(c.max_violation, 0.5);
    }

    #[test]
    fn malformed_shapes() {
        assert!(RealMatrix::from_vec(1, vec![1.0]).is_err());
        assert!(RealMatrix::from_vec(3, vec![0.0; 8]).is_err());
        let err = RealMatrix::from_rows(vec![vec![1.0, 2.0], vec![3.0]]).unwrap_err();
        assert!(err.to_string().contains("row 1"));
    }

    #[test]
    fn csv_row_count_is_checked() {
        let text = "1,2,3\n4,5,6\n";
        let err = read_csv_matrix(text.as_bytes(), Some(3)).unwrap_err();
        assert!(err.to_string().contains("2 rows, expected 3"), "{err}");
        let ok = read_csv_matrix("1, 2\n3, 4\n".as_bytes(), Some(2)).unwrap();
        assert_eq!(*ok.get(1, 0), 3.0);
    }

    #[test]
    fn uniform_and_dense_agree() {
        let u = RealMatrix::uniform(4, 1.5).unwrap();
        let d = RealMatrix::from_vec(4, vec![1.5; 16]).unwrap();
        assert_eq!(u.sum(), d.sum());
        assert_eq!(u.row_means(), d.row_means());
        assert_eq!(u.grand_mean(), d.grand_mean());
        let z = u.zip_map(&d, |a, b| a * b).unwrap();
        assert!(!z.is_uniform());
        assert_eq!(z.sum(), 36.0);
    }

    fn dense_matrix() -> impl Strategy<Value = RealMatrix> {
        (2usize..7).prop_flat_map(|n| {
            prop::collection::vec(-10.0f64..10.0, n * n)
                .prop_map(move |cells| RealMatrix::from_vec(n, cells).unwrap())
        })
    }

    proptest! {
        #[test]
        fn star_is_centered_and_idempotent(m in dense_matrix()) {
            let s = m.star();
            let tol = 1e-12 * m.max_abs().max(1.0);
            prop_assert!(check_centering(&s, tol).centered);
            prop_assert!(s.grand_mean().abs() <= tol);
            let ss = s.star();
            for (a, b) in s.iter().zip(ss.iter()) {
                prop_assert!((a - b).abs() <= tol);
            }
        }

        #[test]
        fn star_is_orthogonal_to_margins(m in dense_matrix(), w in prop::collection::vec(-3.0f64..3.0, 7)) {
            let s = m.star();
            let n = s.n();
            let row_const: f64 = s.cells().map(|(i, _, v)| v * w[i]).sum();
            let col_const: f64 = s.cells().map(|(_, j, v)| v * w[j]).sum();
            let tol = 1e-11 * m.max_abs().max(1.0) * n as f64;
            prop_assert!(row_const.abs() <= tol);
            prop_assert!(col_const.abs() <= tol);
        }
    }
}
