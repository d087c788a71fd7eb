//! Gaussian elimination, linear solving and kernel bases.

use super::{BitMatrix, BitVector, Gf2Error};

/// Reduced row-echelon form of a matrix together with its rank profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowEchelon {
    pub rref: BitMatrix,
    pub rank: usize,
    /// Pivot column of each of the first `rank` rows, strictly increasing.
    pub pivot_cols: Vec<usize>,
}

impl RowEchelon {
    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivot_cols.binary_search(&col).is_ok()
    }

    pub fn free_cols(&self) -> Vec<usize> {
        (0..self.rref.cols()).filter(|&c| !self.is_pivot(c)).collect()
    }

    /// Kernel basis read off the RREF: one vector per free column `f`, with
    /// a 1 at `f` and each pivot variable set to cancel it.
    pub fn null_space_basis(&self) -> Vec<BitVector> {
        let cols = self.rref.cols();
        self.free_cols()
            .into_iter()
            .map(|f| {
                let mut v = BitVector::unit(cols, f);
                for (row, &p) in self.pivot_cols.iter().enumerate() {
                    if self.rref.get(row, f) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect()
    }
}

/// Core elimination loop. Applies every row operation to `rhs` as well when
/// one is given, which turns it into the reduced right-hand side.
fn eliminate(m: &mut BitMatrix, mut rhs: Option<&mut BitVector>) -> (usize, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..m.cols() {
        if rank == m.rows() {
            break;
        }
        let Some(p) = (rank..m.rows()).find(|&r| m.get(r, col)) else {
            continue;
        };
        m.swap_rows(rank, p);
        if let Some(v) = rhs.as_deref_mut() {
            let (a, b) = (v.get(rank), v.get(p));
            v.set(rank, b);
            v.set(p, a);
        }
        for r in 0..m.rows() {
            if r != rank && m.get(r, col) {
                m.xor_row_into(rank, r);
                if let Some(v) = rhs.as_deref_mut() {
                    if v.get(rank) {
                        v.flip(r);
                    }
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    (rank, pivots)
}

impl BitMatrix {
    /// Reduced row-echelon form. Columns are scanned left to right and the
    /// pivot for each column is the lowest-index not-yet-used row holding a 1.
    pub fn row_reduce(&self) -> RowEchelon {
        let mut rref = self.clone();
        let (rank, pivot_cols) = eliminate(&mut rref, None);
        RowEchelon { rref, rank, pivot_cols }
    }

    pub fn rank(&self) -> usize {
        self.row_reduce().rank
    }

    /// One solution of `self·x = rhs`, with every free variable set to 0, or
    /// `None` when the system is inconsistent.
    pub fn solve(&self, rhs: &BitVector) -> Result<Option<BitVector>, Gf2Error> {
        Ok(self.solve_with_echelon(rhs)?.0)
    }

    /// Like [`solve`](Self::solve) but also hands back the echelon form so
    /// callers can read the kernel without a second elimination.
    pub fn solve_with_echelon(&self, rhs: &BitVector) -> Result<(Option<BitVector>, RowEchelon), Gf2Error> {
        if self.rows() != rhs.len() {
            return Err(Gf2Error::DimensionMismatch {
                op: "solve_linear",
                left: (self.rows(), self.cols()),
                right: (rhs.len(), 1),
            });
        }
        let mut rref = self.clone();
        let mut reduced = rhs.clone();
        let (rank, pivot_cols) = eliminate(&mut rref, Some(&mut reduced));
        let consistent = (rank..self.rows()).all(|r| !reduced.get(r));
        let solution = consistent.then(|| {
            let mut x = BitVector::zeros(self.cols());
            for (row, &p) in pivot_cols.iter().enumerate() {
                if reduced.get(row) {
                    x.set(p, true);
                }
            }
            x
        });
        Ok((solution, RowEchelon { rref, rank, pivot_cols }))
    }

    /// `cols - rank` independent vectors spanning `{x : self·x = 0}`.
    pub fn null_space_basis(&self) -> Vec<BitVector> {
        self.row_reduce().null_space_basis()
    }
}
