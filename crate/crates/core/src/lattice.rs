//! Exact integer and rational linear algebra.
//!
//! Matrices here are tiny (evaluation matrices of a handful of points,
//! relation matrices of rank ≤ 10), so everything is done over arbitrary
//! precision integers and rationals with plain elimination.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from row vectors. All rows must have the same length.
    pub fn from_rows<T, R>(rows: &[R]) -> Self
    where
        T: Into<BigInt> + Clone,
        R: AsRef<[T]>,
    {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r.iter().cloned().map(Into::into));
        }
        IntMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// A matrix with the given shape and an explicit column count, so that
    /// zero-row matrices keep their width.
    pub fn from_row_vecs(cols: usize, rows: Vec<Vec<BigInt>>) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r);
        }
        IntMatrix { rows: n, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * &other[(k, j)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        rref(self).pivots.len()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] -= q * row[src]
    fn sub_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = &self[(src, j)] * q;
            self[(dst, j)] -= v;
        }
    }

    /// Unimodular transform of rows `t` and `i` taking `(p, q)` in column
    /// `t` to `(gcd, 0)`.
    fn bezout_rows(&mut self, t: usize, i: usize, p: &BigInt, q: &BigInt) {
        let (x0, y0, pg, qg) = bezout(p, q);
        for j in 0..self.cols {
            let (x, y) = (self[(t, j)].clone(), self[(i, j)].clone());
            self[(t, j)] = &x0 * &x + &y0 * &y;
            self[(i, j)] = &pg * &y - &qg * &x;
        }
    }

    fn bezout_cols(&mut self, t: usize, j: usize, p: &BigInt, q: &BigInt) {
        let (x0, y0, pg, qg) = bezout(p, q);
        for i in 0..self.rows {
            let (x, y) = (self[(i, t)].clone(), self[(i, j)].clone());
            self[(i, t)] = &x0 * &x + &y0 * &y;
            self[(i, j)] = &pg * &y - &qg * &x;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

/// Smith normal form diagonal of an integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    /// `min(rows, cols)` nonnegative entries, each dividing the next.
    pub diagonal: Vec<BigInt>,
    pub rank: usize,
}

impl SmithForm {
    /// Invariant factors different from 1 and 0, i.e. the torsion part of the cokernel.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.diagonal
            .iter()
            .filter(|d| !d.is_zero() && !d.is_one())
            .cloned()
            .collect()
    }
}

/// `(x, y, p/g, q/g)` with `xp + yq = g`. When `p` divides `q` this is the
/// plain subtraction `(1, 0, 1, q/p)`; a general Bezout pair there could
/// undo work already done on the pivot's row or column.
fn bezout(p: &BigInt, q: &BigInt) -> (BigInt, BigInt, BigInt, BigInt) {
    if q.is_multiple_of(p) {
        return (BigInt::one(), BigInt::zero(), BigInt::one(), q / p);
    }
    let e = p.extended_gcd(q);
    (e.x, e.y, p / &e.gcd, q / &e.gcd)
}

/// Smith normal form by elementary row and column operations.
///
/// The pivot at each stage is an entry of minimal nonzero absolute value in
/// the remaining block, ties broken by lowest `(row, col)`.
pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let mut a = m.clone();
    let n = a.rows.min(a.cols);
    for t in 0..n {
        let Some((pi, pj)) = min_pivot(&a, t) else {
            break;
        };
        a.swap_rows(t, pi);
        a.swap_cols(t, pj);
        loop {
            // Bezout steps replace the pivot by a gcd, so it only ever shrinks
            // in the divisibility order and the loop terminates.
            for i in t + 1..a.rows {
                if !a[(i, t)].is_zero() {
                    let (p, q) = (a[(t, t)].clone(), a[(i, t)].clone());
                    a.bezout_rows(t, i, &p, &q);
                }
            }
            for j in t + 1..a.cols {
                if !a[(t, j)].is_zero() {
                    let (p, q) = (a[(t, t)].clone(), a[(t, j)].clone());
                    a.bezout_cols(t, j, &p, &q);
                }
            }
            if (t + 1..a.rows).any(|i| !a[(i, t)].is_zero()) {
                continue;
            }
            let p = a[(t, t)].clone();
            let bad = (t + 1..a.rows)
                .flat_map(|i| (t + 1..a.cols).map(move |j| (i, j)))
                .find(|&(i, j)| !a[(i, j)].is_multiple_of(&p));
            match bad {
                // row t += row i; the next pass pulls in a smaller gcd
                Some((i, _)) => a.sub_row(t, i, &BigInt::from(-1)),
                None => break,
            }
        }
    }
    let diagonal: Vec<BigInt> = (0..n).map(|i| a[(i, i)].abs()).collect();
    let rank = diagonal.iter().filter(|d| !d.is_zero()).count();
    SmithForm { diagonal, rank }
}

fn min_pivot(a: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..a.rows {
        for j in t..a.cols {
            let v = &a[(i, j)];
            if v.is_zero() {
                continue;
            }
            match best {
                Some((bi, bj)) if a[(bi, bj)].abs() <= v.abs() => {}
                _ => best = Some((i, j)),
            }
        }
    }
    best
}

struct Rref {
    m: Vec<Vec<BigRational>>,
    pivots: Vec<usize>,
}

fn rref(m: &IntMatrix) -> Rref {
    let mut r: Vec<Vec<BigRational>> = (0..m.rows)
        .map(|i| m.row(i).iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m.cols {
        if row == m.rows {
            break;
        }
        let Some(p) = (row..m.rows).find(|&i| !r[i][col].is_zero()) else {
            continue;
        };
        r.swap(row, p);
        let inv = r[row][col].recip();
        for x in r[row].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.rows {
            if i == row || r[i][col].is_zero() {
                continue;
            }
            let f = r[i][col].clone();
            for j in col..m.cols {
                let v = &r[row][j] * &f;
                r[i][j] -= v;
            }
        }
        pivots.push(col);
        row += 1;
    }
    Rref { m: r, pivots }
}

/// Basis of the right kernel `{v : m v = 0}` over the rationals.
///
/// One vector per free column of the reduced row echelon form, with a 1 in
/// that free position.
pub fn rational_nullspace(m: &IntMatrix) -> Vec<Vec<BigRational>> {
    let Rref { m: r, pivots } = rref(m);
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); m.cols];
            v[f] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[row][f].clone();
            }
            v
        })
        .collect()
}

/// Rank of a rational matrix given by rows.
pub fn rational_rank(rows: &[Vec<BigRational>], cols: usize) -> usize {
    let ints: Vec<Vec<BigInt>> = rows.iter().map(|r| primitive_integer_vector(r)).collect();
    IntMatrix::from_row_vecs(cols, ints).rank()
}

/// Inverse of a square rational matrix, or `None` if it is singular.
pub fn rational_inverse(m: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            assert_eq!(r.len(), n, "matrix must be square");
            let mut row = r.clone();
            row.extend((0..n).map(|j| {
                if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            row
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&i| !a[i][col].is_zero())?;
        a.swap(col, p);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i == col || a[i][col].is_zero() {
                continue;
            }
            let f = a[i][col].clone();
            for j in 0..2 * n {
                let v = &a[col][j] * &f;
                a[i][j] -= v;
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Scales a rational vector to a primitive integer vector (content 1,
/// first nonzero entry positive). The zero vector maps to zeros.
pub fn primitive_integer_vector(v: &[BigRational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    let sign = ints.iter().find(|x| !x.is_zero()).map_or(BigInt::one(), |x| x.signum());
    ints.into_iter().map(|x| x / &g * &sign).collect()
}
