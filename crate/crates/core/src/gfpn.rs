//! Arithmetic in `F_{p^n}` over a polynomial basis, plus linear algebra over `F_p`.
//!
//! Elements are stored as their base-`p` index: the element
//! `c_0 + c_1 x + ... + c_{n-1} x^{n-1}` has index `sum c_i p^i`. Index 0 is
//! zero and index 1 is one; indices below `p` are the prime subfield.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fields up to this many elements get log/antilog tables.
const LOG_TABLE_LIMIT: u64 = 1 << 20;
/// Fields beyond this size are rejected.
const MAX_FIELD_SIZE: u64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("characteristic 2 is not supported; p must be an odd prime")]
    EvenCharacteristic,
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field of order {p}^{n} exceeds the supported size 2^40")]
    TooLarge { p: u32, n: usize },
    #[error("modulus {0:?} is not monic of the requested degree")]
    BadModulus(Vec<u32>),
    #[error("modulus {0:?} is reducible over F_p")]
    Reducible(Vec<u32>),
    #[error("no irreducible polynomial of degree {0} found")]
    NoIrreducible(usize),
    #[error("division by zero")]
    DivisionByZero,
    #[error("trace equation needs a nonzero beta")]
    ZeroBeta,
    #[error("index {index} is not an element of a field of order {order}")]
    BadIndex { index: u64, order: u64 },
}

/// An element of `F_{p^n}`, identified by its base-`p` coefficient index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElement(pub u64);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn index(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// JSON description of a field: `{"p", "n", "modulus": [c_0, ..., c_{n-1}, 1]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDesc {
    pub p: u32,
    pub n: usize,
    pub modulus: Vec<u32>,
}

struct LogTables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// A concrete representation of `F_{p^n}`. Immutable once built.
pub struct FieldCtx {
    p: u32,
    n: usize,
    modulus: Vec<u32>,
    order: u64,
    digit_pow: Vec<u64>,
    basis_traces: Vec<u32>,
    primitive: FieldElement,
    tables: Option<LogTables>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx").field("p", &self.p).field("n", &self.n).field("modulus", &self.modulus).finish()
    }
}

pub fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= m {
        if m.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors, ascending.
pub fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= m {
        if m.is_multiple_of(d) {
            out.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

#[inline]
pub(crate) fn inv_mod_p(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a as u64, (p - 2) as u64, p as u64) as u32
}

pub(crate) fn pow_mod(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * base as u128) % m as u128) as u64;
        }
        base = ((base as u128 * base as u128) % m as u128) as u64;
        e >>= 1;
    }
    acc
}

// Dense polynomials over F_p, constant term first, no trailing zeros.
mod poly {
    use super::inv_mod_p;

    pub(super) fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub(super) fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let lead_inv = inv_mod_p(m[dm], p) as u64;
        while r.len() > dm {
            let top = r.len() - 1;
            let q = (r[top] as u64 * lead_inv % p as u64) as u32;
            if q != 0 {
                let shift = top - dm;
                for (i, &mi) in m.iter().enumerate() {
                    let sub = (q as u64 * mi as u64 % p as u64) as u32;
                    r[shift + i] = (r[shift + i] + p - sub) % p;
                }
            }
            trim(&mut r);
        }
        r
    }

    pub(super) fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + ai as u64 * bj as u64) % p as u64;
            }
        }
        let mut out: Vec<u32> = out.into_iter().map(|v| v as u32).collect();
        trim(&mut out);
        out
    }

    pub(super) fn mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        rem(&mul(a, b, p), m, p)
    }

    pub(super) fn powmod(base: &[u32], mut e: u128, m: &[u32], p: u32) -> Vec<u32> {
        let mut acc = vec![1u32];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(&acc, &b, m, p);
            }
            b = mulmod(&b, &b, m, p);
            e >>= 1;
        }
        acc
    }

    pub(super) fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let len = a.len().max(b.len());
        let mut out: Vec<u32> = (0..len)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(&mut out);
        out
    }

    pub(super) fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        x
    }

    /// Irreducibility of a monic `m` of degree `n`: no factor of degree `d <= n/2`,
    /// i.e. `gcd(x^{p^d} - x, m) = 1` for each such `d`.
    pub(super) fn is_irreducible(m: &[u32], p: u32) -> bool {
        let n = m.len() - 1;
        if n == 1 {
            return true;
        }
        if m[0] == 0 {
            return false;
        }
        let x = vec![0u32, 1];
        let mut frob = x.clone();
        for _ in 1..=n / 2 {
            frob = powmod(&frob, p as u128, m, p);
            let g = gcd(&sub(&frob, &x, p), m, p);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }
}

impl FieldCtx {
    /// Builds `F_{p^n}`. Without a modulus, picks the monic irreducible polynomial
    /// whose lower coefficients have the smallest base-`p` encoding.
    pub fn new(p: u64, n: usize, modulus: Option<&[u32]>) -> Result<FieldCtx, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if p == 2 {
            return Err(FieldError::EvenCharacteristic);
        }
        if n == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let p32 = u32::try_from(p).map_err(|_| FieldError::TooLarge { p: u32::MAX, n })?;
        let order = (p as u128).checked_pow(n as u32).filter(|&q| q <= MAX_FIELD_SIZE as u128);
        let order = order.ok_or(FieldError::TooLarge { p: p32, n })? as u64;

        let modulus = match modulus {
            Some(m) => {
                if m.len() != n + 1 || m[n] != 1 || m.iter().any(|&c| c >= p32) {
                    return Err(FieldError::BadModulus(m.to_vec()));
                }
                if !poly::is_irreducible(m, p32) {
                    return Err(FieldError::Reducible(m.to_vec()));
                }
                m.to_vec()
            }
            None => canonical_modulus(p32, n, order)?,
        };
        Ok(Self::with_verified_modulus(p32, n, modulus, order))
    }

    pub fn from_desc(desc: &FieldDesc) -> Result<FieldCtx, FieldError> {
        if desc.modulus.len() != desc.n + 1 {
            return Err(FieldError::BadModulus(desc.modulus.clone()));
        }
        FieldCtx::new(desc.p as u64, desc.n, Some(&desc.modulus))
    }

    pub fn desc(&self) -> FieldDesc {
        FieldDesc { p: self.p, n: self.n, modulus: self.modulus.clone() }
    }

    fn with_verified_modulus(p: u32, n: usize, modulus: Vec<u32>, order: u64) -> FieldCtx {
        let digit_pow: Vec<u64> = (0..=n).map(|i| (p as u64).pow(i as u32)).collect();
        let mut ctx = FieldCtx {
            p,
            n,
            modulus,
            order,
            digit_pow,
            basis_traces: Vec::new(),
            primitive: FieldElement::ONE,
            tables: None,
        };
        ctx.primitive = ctx.find_primitive();
        if order <= LOG_TABLE_LIMIT {
            ctx.tables = Some(ctx.build_tables());
        }
        ctx.basis_traces = (0..n)
            .map(|i| {
                let xi = FieldElement(ctx.digit_pow[i]);
                let t = ctx.trace_slow(xi);
                debug_assert!(t.0 < p as u64);
                t.0 as u32
            })
            .collect();
        ctx
    }

    fn find_primitive(&self) -> FieldElement {
        let group = self.order - 1;
        if group == 1 {
            return FieldElement::ONE;
        }
        let factors = prime_factors(group);
        (1..self.order)
            .map(FieldElement)
            .find(|&a| factors.iter().all(|&l| self.pow_slow(a, group / l) != FieldElement::ONE))
            .expect("multiplicative group of a finite field is cyclic")
    }

    fn build_tables(&self) -> LogTables {
        let group = (self.order - 1) as usize;
        let mut exp = Vec::with_capacity(group);
        let mut log = vec![0u32; self.order as usize];
        let mut cur = FieldElement::ONE;
        for k in 0..group {
            exp.push(cur.0 as u32);
            log[cur.0 as usize] = k as u32;
            cur = self.mul_slow(cur, self.primitive);
        }
        LogTables { exp, log }
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of elements, `p^n`.
    #[inline]
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Traces of the power basis `1, x, ..., x^{n-1}`.
    pub fn basis_traces(&self) -> &[u32] {
        &self.basis_traces
    }

    /// Smallest-index element of multiplicative order `p^n - 1`.
    pub fn primitive_element(&self) -> FieldElement {
        self.primitive
    }

    /// The power-basis element `x^i` for `i < n`.
    pub fn basis(&self, i: usize) -> FieldElement {
        FieldElement(self.digit_pow[i])
    }

    /// The prime-subfield element `c mod p`.
    pub fn scalar(&self, c: u64) -> FieldElement {
        FieldElement(c % self.p as u64)
    }

    pub fn element(&self, index: u64) -> Result<FieldElement, FieldError> {
        if index < self.order {
            Ok(FieldElement(index))
        } else {
            Err(FieldError::BadIndex { index, order: self.order })
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.order).map(FieldElement)
    }

    pub fn coeffs(&self, a: FieldElement) -> Vec<u32> {
        let mut v = a.0;
        let p = self.p as u64;
        (0..self.n)
            .map(|_| {
                let d = (v % p) as u32;
                v /= p;
                d
            })
            .collect()
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> FieldElement {
        debug_assert!(coeffs.len() <= self.n);
        let p = self.p as u64;
        let idx = coeffs.iter().rev().fold(0u64, |acc, &c| acc * p + (c as u64 % p));
        FieldElement(idx)
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let p = self.p as u64;
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0u64;
        let mut place = 1u64;
        while x > 0 || y > 0 {
            let d = (x % p + y % p) % p;
            out += d * place;
            place *= p;
            x /= p;
            y /= p;
        }
        FieldElement(out)
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        let p = self.p as u64;
        let mut x = a.0;
        let mut out = 0u64;
        let mut place = 1u64;
        while x > 0 {
            let d = (p - x % p) % p;
            out += d * place;
            place *= p;
            x /= p;
        }
        FieldElement(out)
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    /// `c * a` for a prime-subfield scalar `c`.
    pub fn scale(&self, c: u32, a: FieldElement) -> FieldElement {
        let p = self.p as u64;
        let c = c as u64 % p;
        let mut x = a.0;
        let mut out = 0u64;
        let mut place = 1u64;
        while x > 0 {
            out += (c * (x % p) % p) * place;
            place *= p;
            x /= p;
        }
        FieldElement(out)
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        match &self.tables {
            Some(t) => {
                let group = self.order as usize - 1;
                let k = t.log[a.0 as usize] as usize + t.log[b.0 as usize] as usize;
                FieldElement(t.exp[k % group] as u64)
            }
            None => self.mul_slow(a, b),
        }
    }

    fn mul_slow(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let mut ca = self.coeffs(a);
        let mut cb = self.coeffs(b);
        poly::trim(&mut ca);
        poly::trim(&mut cb);
        let r = poly::mulmod(&ca, &cb, &self.modulus, self.p);
        self.from_coeffs(&r)
    }

    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        if e == 0 {
            return FieldElement::ONE;
        }
        if a.0 == 0 {
            return FieldElement::ZERO;
        }
        match &self.tables {
            Some(t) => {
                let group = self.order as u128 - 1;
                let k = (t.log[a.0 as usize] as u128 * (e as u128 % group)) % group;
                FieldElement(t.exp[k as usize] as u64)
            }
            None => self.pow_slow(a, e),
        }
    }

    fn pow_slow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut acc = FieldElement::ONE;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_slow(acc, base);
            }
            base = self.mul_slow(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.pow(a, self.order - 2))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^{p^i}`.
    pub fn frobenius(&self, a: FieldElement, i: usize) -> FieldElement {
        self.pow(a, self.digit_pow[i % self.n])
    }

    /// Absolute trace `Tr_n(a)`, returned as a value in `[0, p)`.
    pub fn trace(&self, a: FieldElement) -> u32 {
        let p = self.p as u64;
        let mut x = a.0;
        let mut acc = 0u64;
        for &t in &self.basis_traces {
            acc += (x % p) * t as u64;
            x /= p;
        }
        (acc % p) as u32
    }

    fn trace_slow(&self, a: FieldElement) -> FieldElement {
        let mut acc = FieldElement::ZERO;
        let mut cur = a;
        for _ in 0..self.n {
            acc = self.add(acc, cur);
            cur = self.pow_slow(cur, self.p as u64);
        }
        acc
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, a: FieldElement) -> Result<u64, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let mut ord = self.order - 1;
        for l in prime_factors(self.order - 1) {
            while ord.is_multiple_of(l) && self.pow(a, ord / l) == FieldElement::ONE {
                ord /= l;
            }
        }
        Ok(ord)
    }

    /// The smallest-index `b` with `Tr(b * beta) = target`.
    pub fn solve_trace_equation(&self, beta: FieldElement, target: u32) -> Result<FieldElement, FieldError> {
        if beta.is_zero() {
            return Err(FieldError::ZeroBeta);
        }
        let target = target % self.p;
        Ok(self
            .elements()
            .find(|&b| self.trace(self.mul(b, beta)) == target)
            .expect("x -> Tr(x beta) is onto for nonzero beta"))
    }

    /// Matrix over `F_p` of the linear map `z -> L(z)` in the power basis.
    /// Column `k` holds the coordinates of `L(x^k)`.
    pub fn linmap_matrix(&self, lin: &LinearizedPoly) -> MatrixFp {
        self.matrix_of(|z| lin.eval(self, z))
    }

    /// Matrix of an arbitrary `F_p`-linear map given as a closure.
    pub fn matrix_of(&self, map: impl Fn(FieldElement) -> FieldElement) -> MatrixFp {
        let mut m = MatrixFp::zeros(self.p, self.n, self.n);
        for k in 0..self.n {
            let col = self.coeffs(map(self.basis(k)));
            for (r, c) in col.into_iter().enumerate() {
                m.set(r, k, c);
            }
        }
        m
    }

    /// All `F_p`-combinations of `basis`, i.e. the span, as field elements.
    pub fn span(&self, basis: &[FieldElement]) -> Vec<FieldElement> {
        let mut out = vec![FieldElement::ZERO];
        for &v in basis {
            let prev = out.clone();
            for c in 1..self.p {
                let cv = self.scale(c, v);
                out.extend(prev.iter().map(|&w| self.add(w, cv)));
            }
        }
        out.sort_unstable();
        out
    }
}

fn canonical_modulus(p: u32, n: usize, order: u64) -> Result<Vec<u32>, FieldError> {
    let p64 = p as u64;
    for code in 0..order {
        let mut m = Vec::with_capacity(n + 1);
        let mut v = code;
        for _ in 0..n {
            m.push((v % p64) as u32);
            v /= p64;
        }
        m.push(1);
        if poly::is_irreducible(&m, p) {
            return Ok(m);
        }
    }
    Err(FieldError::NoIrreducible(n))
}

/// A linearized polynomial `sum_i c_i z^{p^i}`, `i < n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearizedPoly {
    pub coeffs: Vec<FieldElement>,
}

impl LinearizedPoly {
    pub fn zero(n: usize) -> Self {
        LinearizedPoly { coeffs: vec![FieldElement::ZERO; n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut l = Self::zero(n);
        l.coeffs[0] = FieldElement::ONE;
        l
    }

    /// Adds `c z^{p^i}` with `i` reduced mod `n`.
    pub fn add_term(&mut self, ctx: &FieldCtx, c: FieldElement, i: usize) {
        let n = self.coeffs.len();
        let slot = &mut self.coeffs[i % n];
        *slot = ctx.add(*slot, c);
    }

    pub fn eval(&self, ctx: &FieldCtx, z: FieldElement) -> FieldElement {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .fold(FieldElement::ZERO, |acc, (i, &c)| ctx.add(acc, ctx.mul(c, ctx.frobenius(z, i))))
    }
}

/// Dense matrix over `F_p`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixFp {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl MatrixFp {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        MatrixFp { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(p: u32, rows: &[Vec<u32>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(p, r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn from_fn(p: u32, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> u32) -> Self {
        let mut m = Self::zeros(p, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.p;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.p, self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.p, self.rows, self.cols, |i, j| (self.get(i, j) + other.get(i, j)) % self.p)
    }

    pub fn scale(&self, c: u32) -> Self {
        let p = self.p as u64;
        Self::from_fn(self.p, self.rows, self.cols, |i, j| (self.get(i, j) as u64 * c as u64 % p) as u32)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let p = self.p as u64;
        Self::from_fn(self.p, self.rows, other.cols, |i, j| {
            let s: u64 = (0..self.cols).map(|k| self.get(i, k) as u64 * other.get(k, j) as u64 % p).sum();
            (s % p) as u32
        })
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(self.cols, v.len());
        let p = self.p as u64;
        (0..self.rows)
            .map(|i| {
                let s: u64 = self.row(i).iter().zip(v).map(|(&a, &b)| a as u64 * b as u64 % p).sum();
                (s % p) as u32
            })
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j) == 0))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (MatrixFp, Vec<usize>) {
        let mut m = self.clone();
        let p = self.p as u64;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    m.data.swap(pr * m.cols + j, r * m.cols + j);
                }
            }
            let inv = inv_mod_p(m.get(r, c), self.p) as u64;
            for j in 0..m.cols {
                let v = (m.get(r, j) as u64 * inv % p) as u32;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                let f = m.get(i, c) as u64;
                if i == r || f == 0 {
                    continue;
                }
                for j in 0..m.cols {
                    let v = (m.get(i, j) as u64 + p * p - f * m.get(r, j) as u64) % p;
                    m.set(i, j, v as u32);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space; its length is `cols - rank`.
    pub fn kernel(&self) -> Vec<Vec<u32>> {
        let (m, pivots) = self.rref();
        let p = self.p;
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![0u32; self.cols];
                v[f] = 1;
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = (p - m.get(r, f)) % p;
                }
                v
            })
            .collect()
    }

    /// Inverse of a square matrix, if it exists.
    pub fn inverse(&self) -> Option<MatrixFp> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let aug = Self::from_fn(self.p, n, 2 * n, |i, j| if j < n { self.get(i, j) } else { u32::from(j - n == i) });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Self::from_fn(self.p, n, n, |i, j| r.get(i, n + j)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f9() -> FieldCtx {
        FieldCtx::new(3, 2, None).unwrap()
    }

    #[test]
    fn canonical_modulus_for_f9_is_x2_plus_1() {
        // exhaustive scan in encoding order, irreducible iff no root in F_3
        let oracle = (0u32..9)
            .map(|code| [code % 3, code / 3])
            .find(|&[c0, c1]| (0u32..3).all(|x| (x * x + c1 * x + c0) % 3 != 0))
            .unwrap();
        assert_eq!(oracle, [1, 0]);
        assert_eq!(f9().modulus(), &[1, 0, 1]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(FieldCtx::new(3, 2, Some(&[2, 0, 1])).unwrap_err(), FieldError::Reducible(vec![2, 0, 1]));
        assert_eq!(FieldCtx::new(2, 8, None).unwrap_err(), FieldError::EvenCharacteristic);
        assert_eq!(FieldCtx::new(9, 2, None).unwrap_err(), FieldError::NotPrime(9));
        assert!(matches!(FieldCtx::new(3, 2, Some(&[1, 0, 2])), Err(FieldError::BadModulus(_))));
    }

    #[test]
    fn reducible_without_linear_factor_is_rejected() {
        // (x^2+1)(x^3+2x+1) over F_3: no roots, still reducible
        let a = [1u32, 0, 1];
        let b = [1u32, 2, 0, 1];
        let m = poly::mul(&a, &b, 3);
        assert_eq!(m.len(), 6);
        assert!(matches!(FieldCtx::new(3, 5, Some(&m)), Err(FieldError::Reducible(_))));
    }

    #[test]
    fn x_times_x_is_minus_one_in_f9() {
        let f = f9();
        let x = f.basis(1);
        assert_eq!(f.mul(x, x), FieldElement(2));
        assert_eq!(f.inv(FieldElement::ONE).unwrap(), FieldElement::ONE);
        assert_eq!(f.inv(FieldElement::ZERO), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for (p, n) in [(3u64, 1usize), (3, 2), (3, 3), (5, 2), (7, 1)] {
            let f = FieldCtx::new(p, n, None).unwrap();
            let q = f.order();
            for a in f.elements() {
                assert_eq!(f.from_coeffs(&f.coeffs(a)), a);
                assert_eq!(f.add(a, f.neg(a)), FieldElement::ZERO);
                if !a.is_zero() {
                    assert_eq!(f.pow(a, q - 1), FieldElement::ONE);
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
                }
                assert_eq!(f.frobenius(a, n), a);
                for b in f.elements() {
                    assert_eq!(f.mul(a, b), f.mul_slow(a, b));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                }
            }
        }
    }

    #[test]
    fn power_p_n_is_identity_random() {
        let f = FieldCtx::new(3, 8, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = FieldElement(rng.gen_range(0..f.order()));
            assert_eq!(f.pow(a, f.order()), a);
            assert_eq!(f.pow_slow(a, f.order()), a);
        }
    }

    #[test]
    fn frobenius_properties() {
        let f = FieldCtx::new(3, 3, None).unwrap();
        for a in f.elements() {
            assert_eq!(f.frobenius(a, 3), a);
        }
        for c in 0..3 {
            assert_eq!(f.frobenius(f.scalar(c), 1), f.scalar(c));
        }
        let g = FieldCtx::new(5, 4, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a = FieldElement(rng.gen_range(0..g.order()));
            let b = FieldElement(rng.gen_range(0..g.order()));
            let i = rng.gen_range(0..8);
            // direct expansion: (a+b)^{p^i} by repeated p-th powers
            let mut lhs = g.add(a, b);
            for _ in 0..i {
                lhs = g.pow_slow(lhs, 5);
            }
            assert_eq!(lhs, g.add(g.frobenius(a, i), g.frobenius(b, i)));
        }
    }

    #[test]
    fn trace_values() {
        let f = FieldCtx::new(3, 8, None).unwrap();
        assert_eq!(f.trace(FieldElement::ONE), 2);
        assert_eq!(f.trace(FieldElement::ZERO), 0);
        // beta a root of x^2 + 1 in F_{3^8}
        let beta = f.elements().find(|&b| f.add(f.mul(b, b), FieldElement::ONE).is_zero()).unwrap();
        let b2 = f.mul(beta, beta);
        assert_eq!(f.trace(beta), 0);
        assert_eq!(f.trace(b2), 1);
        assert_eq!(f.trace(f.scale(2, b2)), 2);
        for b in f.elements().take(500) {
            assert_eq!(FieldElement(f.trace(b) as u64), f.trace_slow(b));
        }
    }

    #[test]
    fn trace_is_balanced() {
        for (p, n) in [(3u64, 4usize), (5, 3), (3, 8)] {
            let f = FieldCtx::new(p, n, None).unwrap();
            let mut counts = vec![0u64; p as usize];
            for a in f.elements() {
                counts[f.trace(a) as usize] += 1;
            }
            assert!(counts.iter().all(|&c| c == f.order() / p));
        }
    }

    #[test]
    fn kernel_dimensions() {
        let z = MatrixFp::zeros(3, 4, 4);
        assert_eq!(z.kernel().len(), 4);
        assert!(MatrixFp::identity(5, 3).kernel().is_empty());
        for (p, n) in [(3u64, 4usize), (5, 3), (7, 2)] {
            let f = FieldCtx::new(p, n, None).unwrap();
            let mut lin = LinearizedPoly::zero(n);
            lin.add_term(&f, FieldElement::ONE, 1);
            lin.add_term(&f, f.neg(FieldElement::ONE), 0);
            let k = f.linmap_matrix(&lin).kernel();
            assert_eq!(k.len(), 1);
            let elems = f.span(&k.iter().map(|v| f.from_coeffs(v)).collect::<Vec<_>>());
            assert_eq!(elems, (0..p).map(FieldElement).collect::<Vec<_>>());
        }
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let rows = rng.gen_range(1..6);
            let cols = rng.gen_range(1..6);
            let m = MatrixFp::from_fn(5, rows, cols, |_, _| if rng.gen_bool(0.3) { 0 } else { 1 });
            let m = MatrixFp::from_fn(5, rows, cols, |i, j| (m.get(i, j) * (i as u32 + 2 * j as u32)) % 5);
            let k = m.kernel();
            assert_eq!(k.len() + m.rank(), cols);
            for v in &k {
                assert!(m.mul_vec(v).iter().all(|&x| x == 0));
            }
        }
    }

    #[test]
    fn linmap_matrix_of_frobenius_in_f9() {
        let f = f9();
        let mut lin = LinearizedPoly::zero(2);
        lin.add_term(&f, FieldElement::ONE, 1);
        let m = f.linmap_matrix(&lin);
        // x^3 = -x mod x^2+1
        assert_eq!((m.get(0, 1), m.get(1, 1)), (0, 2));
        assert_eq!((m.get(0, 0), m.get(1, 0)), (1, 0));
        assert_eq!(f.linmap_matrix(&LinearizedPoly::identity(2)), MatrixFp::identity(3, 2));
    }

    #[test]
    fn linmap_matrix_composes() {
        let f = FieldCtx::new(3, 5, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let l1 = LinearizedPoly { coeffs: (0..5).map(|_| FieldElement(rng.gen_range(0..f.order()))).collect() };
            let l2 = LinearizedPoly { coeffs: (0..5).map(|_| FieldElement(rng.gen_range(0..f.order()))).collect() };
            let composed = f.matrix_of(|z| l1.eval(&f, l2.eval(&f, z)));
            assert_eq!(composed, f.linmap_matrix(&l1).mul(&f.linmap_matrix(&l2)));
            let m = f.linmap_matrix(&l1);
            for a in (0..f.order()).step_by(17).map(FieldElement) {
                assert_eq!(f.from_coeffs(&m.mul_vec(&f.coeffs(a))), l1.eval(&f, a));
            }
        }
    }

    #[test]
    fn trace_equation_solutions() {
        let f = FieldCtx::new(3, 8, None).unwrap();
        assert_eq!(f.solve_trace_equation(FieldElement::ONE, 0).unwrap(), FieldElement::ZERO);
        assert_eq!(f.solve_trace_equation(FieldElement::ZERO, 1), Err(FieldError::ZeroBeta));
        let beta = f.elements().find(|&b| f.add(f.mul(b, b), FieldElement::ONE).is_zero()).unwrap();
        assert_eq!(f.trace(f.mul(FieldElement::ONE, beta)), 0);
        assert_eq!(f.trace(f.mul(beta, beta)), 1);
        assert_eq!(f.trace(f.mul(f.scale(2, beta), beta)), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let beta = FieldElement(rng.gen_range(1..f.order()));
            let t = rng.gen_range(0..3);
            let b = f.solve_trace_equation(beta, t).unwrap();
            assert_eq!(f.trace(f.mul(b, beta)), t);
            assert!((0..b.0).all(|c| f.trace(f.mul(FieldElement(c), beta)) != t));
        }
    }

    #[test]
    fn primitive_element_has_full_order() {
        for (p, n) in [(3u64, 2usize), (3, 5), (5, 3), (7, 2)] {
            let f = FieldCtx::new(p, n, None).unwrap();
            let g = f.primitive_element();
            assert_eq!(f.multiplicative_order(g).unwrap(), f.order() - 1);
            assert!((1..g.0).all(|c| f.multiplicative_order(FieldElement(c)).unwrap() < f.order() - 1));
        }
    }

    #[test]
    fn desc_round_trip() {
        let f = FieldCtx::new(5, 3, None).unwrap();
        let json = serde_json::to_string(&f.desc()).unwrap();
        let back = FieldCtx::from_desc(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.modulus(), f.modulus());
        assert_eq!(*f.modulus().last().unwrap(), 1);
    }

    #[test]
    fn inverse_matrix() {
        let m = MatrixFp::from_rows(5, &[vec![1, 2], vec![3, 4]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), MatrixFp::identity(5, 2));
        assert!(MatrixFp::from_rows(3, &[vec![1, 2], vec![2, 1]]).inverse().is_none());
    }
}
