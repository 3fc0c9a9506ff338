//! Exact symmetric matrices and positive (semi)definiteness.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::rational::{ArithError, Rational};

/// Dense square matrix of rationals, stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    order: usize,
    entries: Vec<Rational>,
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.order)
            .map(|i| self.row(i).iter().map(|x| x.to_string()).collect())
            .collect();
        f.debug_struct("RationalMatrix")
            .field("order", &self.order)
            .field("rows", &rows)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PsdClass {
    PositiveDefinite,
    PositiveSemidefinite,
    IndefiniteOrNegative,
}

impl PsdClass {
    pub fn is_psd(self) -> bool {
        !matches!(self, PsdClass::IndefiniteOrNegative)
    }

    pub fn is_pd(self) -> bool {
        matches!(self, PsdClass::PositiveDefinite)
    }
}

impl fmt::Display for PsdClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PsdClass::PositiveDefinite => "positive definite",
            PsdClass::PositiveSemidefinite => "positive semidefinite",
            PsdClass::IndefiniteOrNegative => "indefinite or negative",
        })
    }
}

impl RationalMatrix {
    /// Square matrix from rows. Symmetry is not required here; see
    /// [`RationalMatrix::symmetric`].
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, ArithError> {
        let order = rows.len();
        let mut entries = Vec::with_capacity(order * order);
        for row in rows {
            if row.len() != order {
                return Err(ArithError::NotSquare);
            }
            entries.extend(row);
        }
        Ok(RationalMatrix { order, entries })
    }

    /// Square matrix from rows, rejecting anything that is not symmetric.
    pub fn symmetric(rows: Vec<Vec<Rational>>) -> Result<Self, ArithError> {
        let m = Self::from_rows(rows)?;
        m.check_symmetric()?;
        Ok(m)
    }

    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut entries = Vec::with_capacity(order * order);
        for i in 0..order {
            for j in 0..order {
                entries.push(f(i, j));
            }
        }
        RationalMatrix { order, entries }
    }

    pub fn identity(order: usize) -> Self {
        Self::from_fn(order, |i, j| {
            if i == j {
                Rational::from_integer(1.into())
            } else {
                Rational::zero()
            }
        })
    }

    pub fn zero(order: usize) -> Self {
        Self::from_fn(order, |_, _| Rational::zero())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, row: usize, col: usize) -> &Rational {
        &self.entries[row * self.order + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Rational) {
        self.entries[row * self.order + col] = value;
    }

    pub fn row(&self, row: usize) -> &[Rational] {
        &self.entries[row * self.order..(row + 1) * self.order]
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        RationalMatrix {
            order: self.order,
            entries: self.entries.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.check_symmetric().is_ok()
    }

    fn check_symmetric(&self) -> Result<(), ArithError> {
        for i in 0..self.order {
            for j in (i + 1)..self.order {
                if self.get(i, j) != self.get(j, i) {
                    return Err(ArithError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    /// Principal submatrix on the given (ordered) index set.
    pub fn principal_submatrix(&self, indices: &[usize]) -> Self {
        Self::from_fn(indices.len(), |i, j| self.get(indices[i], indices[j]).clone())
    }
}

/// Result of symmetric Gaussian elimination with diagonal pivoting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdlDecomposition {
    /// Diagonal pivots in elimination order.
    pub pivots: Vec<Rational>,
    /// Original index eliminated at each step.
    pub permutation: Vec<usize>,
    /// False when elimination stalled on a Schur complement whose diagonal
    /// is entirely zero while some off-diagonal entry is not.
    pub complete: bool,
}

/// Symmetric elimination `P M Pᵀ = L D Lᵀ`, always pivoting on the first
/// remaining index with a nonzero diagonal.
///
/// When every remaining diagonal entry is zero and the remaining block is
/// zero, zero pivots are appended and the decomposition is complete. A zero
/// diagonal with a nonzero off-diagonal entry cannot be handled by 1×1
/// pivots and leaves the decomposition incomplete.
pub fn ldl_decompose(m: &RationalMatrix) -> Result<LdlDecomposition, ArithError> {
    m.check_symmetric()?;
    let n = m.order();
    let mut work = m.clone();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::with_capacity(n);
    let mut permutation = Vec::with_capacity(n);

    while !remaining.is_empty() {
        let position = remaining.iter().position(|&i| !work.get(i, i).is_zero());
        let Some(position) = position else {
            let block_is_zero = remaining
                .iter()
                .all(|&i| remaining.iter().all(|&j| work.get(i, j).is_zero()));
            if !block_is_zero {
                return Ok(LdlDecomposition { pivots, permutation, complete: false });
            }
            for &i in &remaining {
                pivots.push(Rational::zero());
                permutation.push(i);
            }
            break;
        };
        let p = remaining.remove(position);
        let pivot = work.get(p, p).clone();
        for &i in &remaining {
            let factor = work.get(i, p) / &pivot;
            if factor.is_zero() {
                continue;
            }
            for &j in &remaining {
                let updated = work.get(i, j) - &factor * work.get(p, j);
                work.set(i, j, updated);
            }
        }
        pivots.push(pivot);
        permutation.push(p);
    }
    Ok(LdlDecomposition { pivots, permutation, complete: true })
}

/// Exact definiteness classification.
///
/// The pivots of a congruence `L D Lᵀ` carry the inertia of the matrix
/// (Sylvester), so all-positive pivots mean definite and a negative pivot
/// means indefinite. A stalled elimination leaves a Schur complement with a
/// `[[0, b], [b, 0]]` principal block, which has a negative eigenvalue.
pub fn psd_classify(m: &RationalMatrix) -> Result<PsdClass, ArithError> {
    let ldl = ldl_decompose(m)?;
    if !ldl.complete || ldl.pivots.iter().any(|p| p.is_negative()) {
        return Ok(PsdClass::IndefiniteOrNegative);
    }
    if ldl.pivots.iter().all(|p| p.is_positive()) {
        Ok(PsdClass::PositiveDefinite)
    } else {
        Ok(PsdClass::PositiveSemidefinite)
    }
}

/// `vᵀ M v`.
pub fn quadratic_value(m: &RationalMatrix, v: &[Rational]) -> Result<Rational, ArithError> {
    if v.len() != m.order() {
        return Err(ArithError::Dimension { expected: m.order(), got: v.len() });
    }
    let mut total = Rational::zero();
    for (i, vi) in v.iter().enumerate() {
        if vi.is_zero() {
            continue;
        }
        let mut row = Rational::zero();
        for (j, vj) in v.iter().enumerate() {
            if !vj.is_zero() {
                row += m.get(i, j) * vj;
            }
        }
        total += vi * row;
    }
    Ok(total)
}
