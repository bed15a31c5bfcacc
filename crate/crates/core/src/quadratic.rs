//! Quadratic p-ary functions `Tr(sum a_i x^{p^i+1}) + Tr(b x) + c`: their
//! linearized polynomials and kernels, the monomial and binomial near-bent
//! criteria, the associated quadratic forms, and the discriminant character.

use std::sync::Arc;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cyclotomic::{eta, Zeta};
use crate::gfpn::{inv_mod_p, FieldCtx, FieldElement, FieldError, LinearizedPoly, MatrixFp};
use crate::spectrum::{Domain, PFunction};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuadraticError {
    #[error("quadratic part is empty")]
    EmptyQuadraticPart,
    #[error("exponents r = {r} and t = {t} coincide mod n = {n}")]
    DegenerateExponents { n: usize, r: usize, t: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("quadratic form has rank deficit {0}; only bent (0) and near-bent (1) forms have a discriminant here")]
    DegenerateForm(usize),
    #[error("expected a near-bent form, kernel dimension is {0}")]
    NotNearBent(usize),
    #[error("no primitive {n}-th root of unity over F_{p}: need gcd(n, p) = 1")]
    RootOfUnityNotFound { p: u32, n: usize },
    #[error("circulant product does not lie in the prime field")]
    NotInPrimeField,
    #[error("field index {index} out of range for {field}")]
    BadElement { index: u64, field: String },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadTerm {
    pub a: FieldElement,
    /// Exponent index `i` of `x^{p^i+1}`, already reduced mod `n`.
    pub i: usize,
}

/// `f(x) = Tr(sum a_i x^{p^i+1}) + Tr(b x) + c`.
#[derive(Debug, Clone)]
pub struct QuadraticSpec {
    ctx: Arc<FieldCtx>,
    quad_terms: Vec<QuadTerm>,
    linear: FieldElement,
    constant: u32,
}

impl QuadraticSpec {
    pub fn new(
        ctx: Arc<FieldCtx>,
        terms: impl IntoIterator<Item = (FieldElement, usize)>,
        linear: FieldElement,
        constant: u32,
    ) -> Self {
        let n = ctx.n();
        let quad_terms = terms.into_iter().map(|(a, i)| QuadTerm { a, i: i % n }).collect();
        let constant = constant % ctx.p();
        QuadraticSpec { ctx, quad_terms, linear, constant }
    }

    /// `Tr(c x^{p^r+1} + sign * c x^{p^t+1})` with `c` in the prime field.
    pub fn binomial(ctx: Arc<FieldCtx>, c: u32, r: usize, t: usize, variant: BinomialVariant) -> Self {
        let a = ctx.scalar(c as u64);
        let b = match variant {
            BinomialVariant::Plus => a,
            BinomialVariant::Minus => ctx.neg(a),
        };
        QuadraticSpec::new(ctx, [(a, r), (b, t)], FieldElement::ZERO, 0)
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn quad_terms(&self) -> &[QuadTerm] {
        &self.quad_terms
    }

    pub fn linear(&self) -> FieldElement {
        self.linear
    }

    pub fn constant(&self) -> u32 {
        self.constant
    }

    /// `c * f` for a prime-field scalar `c`.
    pub fn scaled(&self, c: u32) -> Self {
        let ctx = &self.ctx;
        let c = ctx.scalar(c as u64);
        QuadraticSpec {
            ctx: ctx.clone(),
            quad_terms: self.quad_terms.iter().map(|t| QuadTerm { a: ctx.mul(c, t.a), i: t.i }).collect(),
            linear: ctx.mul(c, self.linear),
            constant: (c.0 as u32 * self.constant) % ctx.p(),
        }
    }

    /// `f + Tr(b x)`.
    pub fn plus_linear(&self, b: FieldElement) -> Self {
        let mut out = self.clone();
        out.linear = self.ctx.add(self.linear, b);
        out
    }

    /// Same quadratic part, no linear or constant term.
    pub fn quadratic_part(&self) -> Self {
        QuadraticSpec { linear: FieldElement::ZERO, constant: 0, ..self.clone() }
    }

    /// The linear map `x -> sum a_i x^{p^i}`, so that the quadratic part is `Tr(x M(x))`.
    pub fn form_map(&self) -> LinearizedPoly {
        let mut m = LinearizedPoly::zero(self.ctx.n());
        for t in &self.quad_terms {
            m.add_term(&self.ctx, t.a, t.i);
        }
        m
    }

    pub fn eval_quadratic(&self, x: FieldElement) -> u32 {
        let ctx = &self.ctx;
        let acc = self
            .quad_terms
            .iter()
            .fold(FieldElement::ZERO, |acc, t| ctx.add(acc, ctx.mul(t.a, ctx.pow(x, ctx.basis_pow_p(t.i) + 1))));
        ctx.trace(acc)
    }

    pub fn eval(&self, x: FieldElement) -> u32 {
        let ctx = &self.ctx;
        (self.eval_quadratic(x) + ctx.trace(ctx.mul(self.linear, x)) + self.constant) % ctx.p()
    }

    /// Value table on `F_{p^n}`.
    pub fn to_table(&self) -> PFunction {
        let ctx = &self.ctx;
        let map = self.form_map();
        let p = ctx.p();
        PFunction::from_fn(Domain::Field(ctx.clone()), |x| {
            let x = FieldElement(x as u64);
            let q = ctx.trace(ctx.mul(x, map.eval(ctx, x)));
            (q + ctx.trace(ctx.mul(self.linear, x)) + self.constant) % p
        })
    }

    pub fn to_json(&self) -> QuadraticSpecJson {
        QuadraticSpecJson {
            p: self.ctx.p(),
            n: self.ctx.n(),
            modulus: Some(self.ctx.modulus().to_vec()),
            quad_terms: self.quad_terms.iter().map(|t| QuadTermJson { a_index: t.a.0, i: t.i }).collect(),
            linear_index: self.linear.0,
            constant: self.constant,
        }
    }

    pub fn from_json(json: &QuadraticSpecJson, ctx: Arc<FieldCtx>) -> Result<Self, QuadraticError> {
        let check = |index: u64| {
            ctx.element(index).map_err(|_| QuadraticError::BadElement { index, field: format!("{:?}", ctx) })
        };
        let terms =
            json.quad_terms.iter().map(|t| Ok((check(t.a_index)?, t.i))).collect::<Result<Vec<_>, QuadraticError>>()?;
        let linear = check(json.linear_index)?;
        Ok(QuadraticSpec::new(ctx.clone(), terms, linear, json.constant))
    }
}

impl FieldCtx {
    /// `p^i` as an exponent, `i` taken mod `n`.
    pub fn basis_pow_p(&self, i: usize) -> u64 {
        (self.p() as u64).pow((i % self.n()) as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadTermJson {
    pub a_index: u64,
    pub i: usize,
}

/// `{"p", "n", "modulus"?, "quad_terms": [{"a_index", "i"}], "linear_index", "constant"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticSpecJson {
    pub p: u32,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
    pub quad_terms: Vec<QuadTermJson>,
    #[serde(default)]
    pub linear_index: u64,
    #[serde(default)]
    pub constant: u32,
}

/// Linearized polynomial from polarization:
/// `f(y+z) - f(y) - f(z) = Tr(y^{p^l} L(z))`, `l` the largest exponent index,
/// `L(z) = sum_i (a_i^{p^l} z^{p^{l+i}} + a_i^{p^{l-i}} z^{p^{l-i}})`.
pub fn linearized(spec: &QuadraticSpec) -> Result<LinearizedPoly, QuadraticError> {
    let l = spec.quad_terms.iter().map(|t| t.i).max().ok_or(QuadraticError::EmptyQuadraticPart)?;
    let ctx = &spec.ctx;
    let mut lin = LinearizedPoly::zero(ctx.n());
    for t in &spec.quad_terms {
        lin.add_term(ctx, ctx.frobenius(t.a, l), l + t.i);
        lin.add_term(ctx, ctx.frobenius(t.a, l - t.i), l - t.i);
    }
    Ok(lin)
}

/// Kernel of `L`: dimension `s`, a basis, and for `s = 1` the smallest-index
/// nonzero kernel element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NearBentCertificate {
    pub s: usize,
    pub kernel_basis: Vec<FieldElement>,
    pub beta: Option<FieldElement>,
}

impl NearBentCertificate {
    pub fn is_near_bent(&self) -> bool {
        self.s == 1
    }

    pub fn is_bent(&self) -> bool {
        self.s == 0
    }
}

pub fn certificate(spec: &QuadraticSpec) -> Result<NearBentCertificate, QuadraticError> {
    let ctx = &spec.ctx;
    let lin = linearized(spec)?;
    let basis: Vec<FieldElement> = ctx.linmap_matrix(&lin).kernel().iter().map(|v| ctx.from_coeffs(v)).collect();
    let s = basis.len();
    let beta = (s == 1).then(|| (1..ctx.p()).map(|c| ctx.scale(c, basis[0])).min().unwrap());
    Ok(NearBentCertificate { s, kernel_basis: basis, beta })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinomialVariant {
    /// `x^{p^r+1} - x^{p^t+1}`
    Minus,
    /// `x^{p^r+1} + x^{p^t+1}`
    Plus,
}

/// Gcd criteria for the binomials `Tr(c x^{p^r+1} -/+ c x^{p^t+1})` to be near-bent.
pub fn binomial_near_bent(
    p: u32,
    n: usize,
    r: usize,
    t: usize,
    variant: BinomialVariant,
) -> Result<bool, QuadraticError> {
    if r % n == t % n {
        return Err(QuadraticError::DegenerateExponents { n, r, t });
    }
    let n = n as i64;
    let (r, t) = (r as i64, t as i64);
    let sum = r + t;
    let diff = (r - t).abs();
    let coprime_p = n.gcd(&(p as i64)) == 1;
    Ok(match variant {
        BinomialVariant::Minus => n.gcd(&sum) == 1 && n.gcd(&diff) == 1 && coprime_p,
        BinomialVariant::Plus => n.gcd(&(2 * sum)) == 2 && n.gcd(&(2 * diff)) == 2 && diff % 2 == 1 && coprime_p,
    })
}

/// Bentness of `Tr(gamma^c x^{p^r+1})`, `gamma` the canonical primitive element:
/// bent iff `p^{gcd(2r, n)} - 1` does not divide `(p^n - 1)/2 - c (p^r - 1)`.
pub fn monomial_bent_criterion(p: u32, n: usize, r: usize, c: u64) -> bool {
    let p = p as i128;
    let q = p.pow(n as u32);
    let g = (2 * r).gcd(&n);
    let modulus = p.pow(g as u32) - 1;
    let value = (q - 1) / 2 - c as i128 * (p.pow(r as u32) - 1);
    value.rem_euclid(modulus) != 0
}

/// Symmetric matrix `A` with `x^T A x` equal to the quadratic part, in the power basis.
pub fn quadratic_form_matrix(spec: &QuadraticSpec) -> MatrixFp {
    let ctx = &spec.ctx;
    let n = ctx.n();
    let p = ctx.p();
    let map = spec.form_map();
    let images: Vec<FieldElement> = (0..n).map(|k| map.eval(ctx, ctx.basis(k))).collect();
    let b = MatrixFp::from_fn(p, n, n, |j, k| ctx.trace(ctx.mul(ctx.basis(j), images[k])));
    b.add(&b.transpose()).scale(inv_mod_p(2, p))
}

/// Congruence diagonalization `D = C^T A C` of a symmetric matrix over `F_p`, `p` odd.
pub fn diagonalize(a: &MatrixFp) -> Result<(MatrixFp, MatrixFp), QuadraticError> {
    if !a.is_symmetric() {
        return Err(QuadraticError::NotSymmetric);
    }
    let p = a.p();
    let n = a.rows();
    let mut m = a.clone();
    let mut c = MatrixFp::identity(p, n);

    // x_i += lambda x_j on both sides: col_i += lambda col_j, row_i += lambda row_j
    let add_to = |m: &mut MatrixFp, c: &mut MatrixFp, i: usize, j: usize, lambda: u32| {
        let l = lambda as u64;
        let pp = p as u64;
        for r in 0..n {
            let v = (m.get(r, i) as u64 + l * m.get(r, j) as u64) % pp;
            m.set(r, i, v as u32);
        }
        for col in 0..n {
            let v = (m.get(i, col) as u64 + l * m.get(j, col) as u64) % pp;
            m.set(i, col, v as u32);
        }
        for r in 0..n {
            let v = (c.get(r, i) as u64 + l * c.get(r, j) as u64) % pp;
            c.set(r, i, v as u32);
        }
    };
    let swap = |m: &mut MatrixFp, c: &mut MatrixFp, i: usize, j: usize| {
        for r in 0..n {
            let (x, y) = (m.get(r, i), m.get(r, j));
            m.set(r, i, y);
            m.set(r, j, x);
        }
        for col in 0..n {
            let (x, y) = (m.get(i, col), m.get(j, col));
            m.set(i, col, y);
            m.set(j, col, x);
        }
        for r in 0..n {
            let (x, y) = (c.get(r, i), c.get(r, j));
            c.set(r, i, y);
            c.set(r, j, x);
        }
    };

    for k in 0..n {
        if m.get(k, k) == 0 {
            if let Some(j) = (k + 1..n).find(|&j| m.get(j, j) != 0) {
                swap(&mut m, &mut c, k, j);
            } else if let Some(j) = (k + 1..n).find(|&j| m.get(k, j) != 0) {
                // diagonal entry becomes 2 m[k][j] != 0
                add_to(&mut m, &mut c, k, j, 1);
            } else {
                continue;
            }
        }
        let pivot_inv = inv_mod_p(m.get(k, k), p) as u64;
        for j in k + 1..n {
            let v = m.get(j, k) as u64;
            if v == 0 {
                continue;
            }
            let lambda = (p as u64 - v * pivot_inv % p as u64) % p as u64;
            add_to(&mut m, &mut c, j, k, lambda as u32);
        }
    }
    debug_assert!(m.is_diagonal());
    Ok((c, m))
}

/// `eta` of the product of the nonzero diagonal entries of a diagonalization of `A`.
pub fn form_delta_eta(a: &MatrixFp) -> Result<i8, QuadraticError> {
    let (_, d) = diagonalize(a)?;
    let p = a.p();
    let n = a.rows();
    let zeros = (0..n).filter(|&i| d.get(i, i) == 0).count();
    if zeros > 1 {
        return Err(QuadraticError::DegenerateForm(zeros));
    }
    let prod = (0..n).map(|i| d.get(i, i) as u64).filter(|&v| v != 0).fold(1u64, |acc, v| acc * v % p as u64);
    Ok(eta(p, prod as i64))
}

/// `eta(Delta)` for the quadratic form of `spec`.
pub fn delta_eta(spec: &QuadraticSpec) -> Result<i8, QuadraticError> {
    form_delta_eta(&quadratic_form_matrix(spec))
}

/// Unit of the nonzero normalized Walsh coefficients of a near-bent quadratic function:
/// `eta(Delta)` when `p = 1 mod 4`; `(-1)^{(n-2)/2} eta(Delta) i` when `p = 3 mod 4`, `n` even;
/// `(-1)^{(n-1)/2} eta(Delta)` when `p = 3 mod 4`, `n` odd.
pub fn predicted_near_bent_zeta(spec: &QuadraticSpec) -> Result<Zeta, QuadraticError> {
    let cert = certificate(spec)?;
    if cert.s != 1 {
        return Err(QuadraticError::NotNearBent(cert.s));
    }
    let e = delta_eta(spec)?;
    Ok(near_bent_zeta_from_eta(spec.ctx.p(), spec.ctx.n(), e))
}

pub fn near_bent_zeta_from_eta(p: u32, n: usize, eta_delta: i8) -> Zeta {
    if p % 4 == 1 {
        return Zeta::from_parts(eta_delta, false);
    }
    let half = if n.is_multiple_of(2) { (n - 2) / 2 } else { (n - 1) / 2 };
    let sign = if half % 2 == 0 { eta_delta } else { -eta_delta };
    Zeta::from_parts(sign, n.is_multiple_of(2))
}

/// `Delta^{(r,t)} = prod_{j=1}^{n-1} (u^{(n-r)j} - u^{(n-t)j})` for a primitive
/// `n`-th root of unity `u`, the eigenvalue product of the circulant matrix of
/// `x^{p^r} - x^{p^t}`. Computed in `F_{p^m}`, `m` the order of `p` mod `n`.
pub fn circulant_delta(p: u32, n: usize, r: usize, t: usize) -> Result<u32, QuadraticError> {
    if n < 2 || (n as u64).gcd(&(p as u64)) != 1 {
        return Err(QuadraticError::RootOfUnityNotFound { p, n });
    }
    let m = (1..=n).find(|&m| crate::gfpn::pow_mod(p as u64, m as u64, n as u64) == 1).unwrap();
    let ext = FieldCtx::new(p as u64, m, None)?;
    let gamma = ext.primitive_element();
    let u = ext.pow(gamma, (ext.order() - 1) / n as u64);
    if ext.multiplicative_order(u)? != n as u64 {
        return Err(QuadraticError::RootOfUnityNotFound { p, n });
    }
    let lambda = |j: usize| {
        let a = ext.pow(u, (((n - r % n) * j) % n) as u64);
        let b = ext.pow(u, (((n - t % n) * j) % n) as u64);
        ext.sub(a, b)
    };
    assert!(lambda(0).is_zero(), "lambda_0 must vanish");
    let delta = (1..n).fold(FieldElement::ONE, |acc, j| ext.mul(acc, lambda(j)));
    if delta.0 >= p as u64 {
        return Err(QuadraticError::NotInPrimeField);
    }
    Ok(delta.0 as u32)
}
