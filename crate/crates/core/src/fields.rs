//! Arithmetic over GF(p^k).
//!
//! Elements are stored as a single integer holding the base-`p` digits of
//! their coefficient vector (digit `i` is the coefficient of `x^i` in the
//! polynomial-basis representation modulo the field's irreducible
//! modulus). Every element therefore has exactly one encoding, in `0..q`.

use std::fmt;

use crate::error::{Error, Result};

/// Largest field size accepted. Prime fields up to `2^32` keep products
/// inside `u64`.
const MAX_Q: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElem(u64);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    /// Wraps a raw encoding. Callers are responsible for `raw < q`;
    /// [`FieldSpec::elem`] checks it.
    pub const fn from_raw(raw: u64) -> Self {
        FieldElem(raw)
    }

    pub const fn raw(self) -> u64 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    p: u64,
    k: u32,
    q: u64,
    /// Monic modulus, coefficients low-to-high, length `k + 1`.
    modulus: Vec<u64>,
}

/// Builds GF(q).
///
/// For `q = p^k` with `k > 1` the modulus is the first monic irreducible
/// polynomial of degree `k` when candidates are ordered by the integer
/// `c_0 + c_1 p + ... + c_{k-1} p^{k-1}` of their lower coefficients.
pub fn make_field(q: u64) -> Result<FieldSpec> {
    if q < 2 {
        return Err(Error::NotPrimePower(q));
    }
    if q >= MAX_Q {
        return Err(Error::FieldUnsupported(q));
    }
    let (p, k) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
    let modulus = if k == 1 {
        vec![0, 1]
    } else {
        lowest_irreducible(p, k)
    };
    Ok(FieldSpec { p, k, q, modulus })
}

fn prime_power(q: u64) -> Option<(u64, u32)> {
    let mut p = 0;
    let mut d = 2;
    while d * d <= q {
        if q % d == 0 {
            p = d;
            break;
        }
        d += 1;
    }
    if p == 0 {
        return Some((q, 1));
    }
    let mut rest = q;
    let mut k = 0;
    while rest % p == 0 {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

fn digits(mut v: u64, p: u64, len: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(v % p);
        v /= p;
    }
    out
}

/// Remainder of `a` modulo the monic `b` over GF(p), both low-to-high.
fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = r.pop().unwrap();
        if lead != 0 {
            let off = r.len() - db;
            for (i, &bc) in b[..db].iter().enumerate() {
                r[off + i] = (r[off + i] + (p - lead) * bc) % p;
            }
        }
    }
    r
}

fn is_irreducible(f: &[u64], p: u64) -> bool {
    let k = f.len() - 1;
    for d in 1..=k / 2 {
        for low in 0..p.pow(d as u32) {
            let mut g = digits(low, p, d);
            g.push(1);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn lowest_irreducible(p: u64, k: u32) -> Vec<u64> {
    (0..p.pow(k))
        .map(|low| {
            let mut f = digits(low, p, k as usize);
            f.push(1);
            f
        })
        .find(|f| is_irreducible(f, p))
        .expect("an irreducible polynomial exists for every degree")
}

impl FieldSpec {
    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn is_prime(&self) -> bool {
        self.k == 1
    }

    pub fn elem(&self, raw: u64) -> Result<FieldElem> {
        if raw < self.q {
            Ok(FieldElem(raw))
        } else {
            Err(Error::Parse(format!("{raw} is not an element of GF({})", self.q)))
        }
    }

    /// Element with the given coefficient vector (low-to-high, length ≤ k).
    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<FieldElem> {
        if coeffs.len() > self.k as usize || coeffs.iter().any(|&c| c >= self.p) {
            return Err(Error::Parse(format!(
                "{coeffs:?} is not a coefficient vector over GF({})",
                self.p
            )));
        }
        Ok(FieldElem(self.pack(coeffs)))
    }

    pub fn coeffs(&self, a: FieldElem) -> Vec<u64> {
        digits(a.0, self.p, self.k as usize)
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, v: i128) -> FieldElem {
        FieldElem(v.rem_euclid(self.p as i128) as u64)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.q).map(FieldElem)
    }

    fn pack(&self, coeffs: &[u64]) -> u64 {
        coeffs.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.k == 1 {
            return FieldElem((a.0 + b.0) % self.p);
        }
        if self.p == 2 {
            return FieldElem(a.0 ^ b.0);
        }
        let (mut x, mut y, mut out, mut place) = (a.0, b.0, 0, 1);
        while x > 0 || y > 0 {
            out += ((x % self.p + y % self.p) % self.p) * place;
            x /= self.p;
            y /= self.p;
            place *= self.p;
        }
        FieldElem(out)
    }

    pub fn neg(&self, a: FieldElem) -> FieldElem {
        if self.k == 1 {
            return FieldElem((self.p - a.0) % self.p);
        }
        if self.p == 2 {
            return a;
        }
        let d: Vec<u64> = self
            .coeffs(a)
            .into_iter()
            .map(|c| (self.p - c) % self.p)
            .collect();
        FieldElem(self.pack(&d))
    }

    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.k == 1 {
            return FieldElem(a.0 * b.0 % self.p);
        }
        if a.0 == 0 || b.0 == 0 {
            return FieldElem::ZERO;
        }
        let k = self.k as usize;
        let (x, y) = (self.coeffs(a), self.coeffs(b));
        let mut prod = vec![0u64; 2 * k - 1];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, &yj) in y.iter().enumerate() {
                prod[i + j] = (prod[i + j] + xi * yj) % self.p;
            }
        }
        FieldElem(self.pack(&poly_rem(&prod, &self.modulus, self.p)))
    }

    pub fn pow(&self, a: FieldElem, mut e: u64) -> FieldElem {
        let mut base = a;
        let mut acc = FieldElem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: FieldElem) -> Option<FieldElem> {
        (!a.is_zero()).then(|| self.pow(a, self.q - 2))
    }

    /// Human-readable element: an integer over a prime field, the
    /// coefficient tuple otherwise.
    pub fn render(&self, a: FieldElem) -> String {
        if self.k == 1 {
            a.0.to_string()
        } else {
            let c: Vec<String> = self.coeffs(a).iter().map(u64::to_string).collect();
            format!("({})", c.join(","))
        }
    }

    /// JSON form matching [`FieldSpec::render`].
    pub fn to_json(&self, a: FieldElem) -> serde_json::Value {
        if self.k == 1 {
            serde_json::json!(a.0)
        } else {
            serde_json::json!(self.coeffs(a))
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.k == 1 {
            write!(f, "GF({})", self.p)
        } else {
            write!(f, "GF({}^{})", self.p, self.k)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl FieldMatrix {
    pub fn new(field: &FieldSpec, rows: usize, cols: usize, data: Vec<FieldElem>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|e| e.0 >= field.q) {
            return Err(Error::Parse(format!("{} is not in {field}", bad.0)));
        }
        Ok(FieldMatrix {
            field: field.clone(),
            rows,
            cols,
            data,
        })
    }

    pub fn from_rows(field: &FieldSpec, rows: &[Vec<u64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let data = rows.iter().flatten().map(|&v| FieldElem(v)).collect();
        Self::new(field, rows.len(), cols, data)
    }

    pub fn zeros(field: &FieldSpec, rows: usize, cols: usize) -> Self {
        FieldMatrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![FieldElem::ZERO; rows * cols],
        }
    }

    pub fn identity(field: &FieldSpec, size: usize) -> Self {
        let mut m = Self::zeros(field, size, size);
        for i in 0..size {
            m.set(i, i, FieldElem::ONE);
        }
        m
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElem {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        if self.cols != other.rows || self.field != other.field {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = FieldMatrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = FieldElem::ZERO;
                for t in 0..self.cols {
                    acc = f.add(acc, f.mul(self.get(i, t), other.get(t, j)));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Square sub-matrix made of the given columns (all rows).
    pub fn select_columns(&self, cols: &[usize]) -> FieldMatrix {
        let mut out = FieldMatrix::zeros(&self.field, self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                out.set(i, jj, self.get(i, j));
            }
        }
        out
    }

    /// Determinant by Gaussian elimination with first-nonzero pivoting.
    pub fn det(&self) -> Result<FieldElem> {
        if self.rows != self.cols {
            return Err(Error::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let f = &self.field;
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = FieldElem::ONE;
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !a[r * n + col].is_zero()) else {
                return Ok(FieldElem::ZERO);
            };
            if piv != col {
                for c in 0..n {
                    a.swap(piv * n + c, col * n + c);
                }
                det = f.neg(det);
            }
            let pv = a[col * n + col];
            det = f.mul(det, pv);
            let pinv = f.inv(pv).expect("pivot is nonzero");
            for r in col + 1..n {
                let factor = f.mul(a[r * n + col], pinv);
                if factor.is_zero() {
                    continue;
                }
                for c in col..n {
                    let v = f.sub(a[r * n + c], f.mul(factor, a[col * n + c]));
                    a[r * n + c] = v;
                }
            }
        }
        Ok(det)
    }

    pub fn invertible(&self) -> Result<bool> {
        Ok(!self.det()?.is_zero())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|&e| self.field.to_json(e)).collect())
            .collect();
        serde_json::Value::Array(rows)
    }
}

impl fmt::Display for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(|&e| self.field.render(e)).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}
