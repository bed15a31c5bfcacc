//! Value tables of p-ary functions, their exact Walsh spectra, and the
//! bent / near-bent / regularity classification of those spectra.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::cyclotomic::{Coeff, CycError, CycInt, ShapeMatcher, ValueShape, Zeta};
use crate::gfpn::{FieldCtx, FieldElement, FieldError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectrumError {
    #[error("table has length {got}, expected {expected}")]
    BadTableLength { expected: usize, got: usize },
    #[error("table entry {index} = {value} is not in [0, {p})")]
    BadTableValue { index: usize, value: u32, p: u32 },
    #[error("coefficient at b = {b} matches no admissible value shape")]
    ShapeMismatch { b: usize },
    #[error("spectra have different domains")]
    DomainMismatch,
    #[error(transparent)]
    Cyc(#[from] CycError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Domain of a p-ary function: `F_{p^n}` or `F_{p^n} x F_p`.
///
/// Product indices are `field_index + p^n * y`, so in both cases an index is
/// the base-`p` digit vector of the coordinates.
#[derive(Debug, Clone)]
pub enum Domain {
    Field(Arc<FieldCtx>),
    Product(Arc<FieldCtx>),
}

impl Domain {
    pub fn field(&self) -> &Arc<FieldCtx> {
        match self {
            Domain::Field(f) | Domain::Product(f) => f,
        }
    }

    pub fn p(&self) -> u32 {
        self.field().p()
    }

    /// Total `F_p`-dimension.
    pub fn dim(&self) -> usize {
        match self {
            Domain::Field(f) => f.n(),
            Domain::Product(f) => f.n() + 1,
        }
    }

    pub fn field_size(&self) -> usize {
        self.field().order() as usize
    }

    pub fn size(&self) -> usize {
        match self {
            Domain::Field(f) => f.order() as usize,
            Domain::Product(f) => f.order() as usize * f.p() as usize,
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self, Domain::Product(_))
    }

    fn split(&self, idx: usize) -> (FieldElement, u32) {
        let q = self.field_size();
        (FieldElement((idx % q) as u64), (idx / q) as u32)
    }

    fn join(&self, x: FieldElement, y: u32) -> usize {
        x.0 as usize + self.field_size() * y as usize
    }

    /// `Tr(a x)` on a field, `Tr(a_1 x_1) + a_2 x_2` on a product.
    pub fn inner_product(&self, a: usize, x: usize) -> u32 {
        let f = self.field();
        let (af, ay) = self.split(a);
        let (xf, xy) = self.split(x);
        (f.trace(f.mul(af, xf)) + ay * xy) % f.p()
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let f = self.field();
        let (af, ay) = self.split(a);
        let (bf, by) = self.split(b);
        self.join(f.add(af, bf), (ay + by) % f.p())
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        let f = self.field();
        let (af, ay) = self.split(a);
        let (bf, by) = self.split(b);
        self.join(f.sub(af, bf), (ay + f.p() - by) % f.p())
    }

    pub fn same_as(&self, other: &Domain) -> bool {
        self.is_product() == other.is_product() && self.field().desc() == other.field().desc()
    }
}

/// A function from a `Domain` to `F_p`, stored as a full value table.
#[derive(Debug, Clone)]
pub struct PFunction {
    domain: Domain,
    table: Vec<u32>,
}

impl PFunction {
    pub fn new(domain: Domain, table: Vec<u32>) -> Result<Self, SpectrumError> {
        let expected = domain.size();
        if table.len() != expected {
            return Err(SpectrumError::BadTableLength { expected, got: table.len() });
        }
        let p = domain.p();
        if let Some((index, &value)) = table.iter().enumerate().find(|(_, &v)| v >= p) {
            return Err(SpectrumError::BadTableValue { index, value, p });
        }
        Ok(PFunction { domain, table })
    }

    pub fn from_fn(domain: Domain, f: impl Fn(usize) -> u32) -> Self {
        let p = domain.p();
        let table = (0..domain.size()).map(|x| f(x) % p).collect();
        PFunction { domain, table }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn p(&self) -> u32 {
        self.domain.p()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    #[inline]
    pub fn value(&self, x: usize) -> u32 {
        self.table[x]
    }

    /// `f + <c, .>`.
    pub fn add_linear(&self, c: usize) -> PFunction {
        let p = self.p();
        PFunction::from_fn(self.domain.clone(), |x| (self.table[x] + self.domain.inner_product(c, x)) % p)
    }

    pub fn to_json(&self) -> PFunctionJson {
        let ctx = self.domain.field();
        PFunctionJson {
            p: ctx.p(),
            n: ctx.n(),
            modulus: Some(ctx.modulus().to_vec()),
            product: self.domain.is_product(),
            table: self.table.clone(),
        }
    }

    pub fn from_json(json: &PFunctionJson) -> Result<Self, SpectrumError> {
        let ctx = FieldCtx::new(json.p as u64, json.n, json.modulus.as_deref())?;
        let ctx = Arc::new(ctx);
        let domain = if json.product { Domain::Product(ctx) } else { Domain::Field(ctx) };
        PFunction::new(domain, json.table.clone())
    }
}

/// `{"p", "n", "modulus"?, "product"?, "table"}`; with `product` the domain is
/// `F_{p^n} x F_p` and `table[x + p^n y] = f(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PFunctionJson {
    pub p: u32,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
    #[serde(default)]
    pub product: bool,
    pub table: Vec<u32>,
}

/// `sum_x e^{f(x) - <b, x>}` evaluated term by term.
pub fn walsh_naive<T: Coeff>(f: &PFunction, b: usize) -> CycInt<T> {
    let p = f.p();
    let mut counts = vec![0i64; p as usize];
    for x in 0..f.domain.size() {
        let e = (f.value(x) + p - f.domain.inner_product(b, x)) % p;
        counts[e as usize] += 1;
    }
    CycInt::from_i64_counts(p, &counts).expect("counts bounded by the domain size")
}

/// Full Walsh spectrum, indexed like the domain.
#[derive(Debug, Clone)]
pub struct WalshSpectrum<T: Coeff = i64> {
    domain: Domain,
    coefficients: Vec<CycInt<T>>,
}

/// Fast transform: a `p`-point character transform along each coordinate,
/// then reindexing from the coordinate dot product to the trace pairing.
pub fn walsh_full<T: Coeff>(f: &PFunction) -> WalshSpectrum<T> {
    let p = f.p() as usize;
    let dim = f.dim();
    let size = f.domain.size();

    // buf[x * p + j]: coefficient of e^j at position x
    let mut buf = vec![T::zero(); size * p];
    for (x, &v) in f.table.iter().enumerate() {
        buf[x * p + v as usize] = T::one();
    }

    let mut stride = 1usize;
    for _ in 0..dim {
        let block = stride * p;
        buf.par_chunks_mut(block * p).for_each(|chunk| {
            let mut line = vec![T::zero(); p * p];
            for off in 0..stride {
                for k in 0..p {
                    let at = (off + k * stride) * p;
                    line[k * p..(k + 1) * p].clone_from_slice(&chunk[at..at + p]);
                }
                for k in 0..p {
                    let at = (off + k * stride) * p;
                    for j in 0..p {
                        let mut acc = T::zero();
                        for x in 0..p {
                            acc = acc + line[x * p + (j + k * x) % p].clone();
                        }
                        chunk[at + j] = acc;
                    }
                }
            }
        });
        stride *= p;
    }

    let dual = trace_dual_map(&f.domain);
    let coefficients = (0..size)
        .into_par_iter()
        .map(|b| {
            let c = dual[b];
            CycInt::from_counts(p as u32, buf[c * p..(c + 1) * p].to_vec()).expect("length p")
        })
        .collect();
    WalshSpectrum { domain: f.domain.clone(), coefficients }
}

/// For each `b`, the index `c` with `<b, x> = c . x` (digit-wise dot product).
fn trace_dual_map(domain: &Domain) -> Vec<usize> {
    let f = domain.field();
    let n = f.n();
    let p = f.p();
    let power = |m: usize| if n == 1 { FieldElement::ONE } else { f.pow(f.basis(1), m as u64) };
    let gram: Vec<Vec<u32>> = (0..n).map(|i| (0..n).map(|k| f.trace(power(i + k))).collect()).collect();
    let gram = crate::gfpn::MatrixFp::from_rows(p, &gram);
    let q = f.order() as usize;
    let field_map: Vec<usize> =
        (0..q as u64).map(|b| f.from_coeffs(&gram.mul_vec(&f.coeffs(FieldElement(b)))).0 as usize).collect();
    (0..domain.size()).map(|b| field_map[b % q] + (b / q) * q).collect()
}

impl<T: Coeff> WalshSpectrum<T> {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn p(&self) -> u32 {
        self.domain.p()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn coefficients(&self) -> &[CycInt<T>] {
        &self.coefficients
    }

    pub fn get(&self, b: usize) -> &CycInt<T> {
        &self.coefficients[b]
    }

    /// Coefficients `W(a, 0)` of a product-domain spectrum; the whole spectrum otherwise.
    pub fn zero_slice(&self) -> &[CycInt<T>] {
        &self.coefficients[..self.domain.field_size()]
    }

    pub fn support_size(&self) -> usize {
        self.coefficients.iter().filter(|w| !w.is_zero()).count()
    }

    pub fn norm_sq_total(&self) -> Result<T, SpectrumError> {
        let mut acc = CycInt::zero(self.p());
        for w in &self.coefficients {
            acc = acc.checked_add(&w.norm_sq()?)?;
        }
        Ok(acc.as_rational_integer().expect("sum of |W(b)|^2 is rational").clone())
    }

    /// `sum_b |W(b)|^2 = p^{2 dim}`.
    pub fn parseval_holds(&self) -> Result<bool, SpectrumError> {
        let expect = power_of_p::<T>(self.p(), 2 * self.dim() as u32)?;
        Ok(self.norm_sq_total()? == expect)
    }

    /// `sum_b W(b) e^{<b, x>}` evaluated term by term; equals `p^dim e^{f(x)}`.
    pub fn inverse_naive(&self) -> Result<Vec<CycInt<T>>, SpectrumError> {
        let size = self.domain.size();
        (0..size)
            .map(|x| {
                let mut acc = CycInt::zero(self.p());
                for (b, w) in self.coefficients.iter().enumerate() {
                    acc = acc.checked_add(&w.rotate(self.domain.inner_product(b, x) as u64))?;
                }
                Ok(acc)
            })
            .collect()
    }

    /// CSV dump: `b_index,c0,...,c{p-1}`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let header: Vec<String> = (0..self.p()).map(|j| format!("c{j}")).collect();
        writeln!(w, "b_index,{}", header.join(","))?;
        for (b, c) in self.coefficients.iter().enumerate() {
            let row: Vec<String> = c.counts().iter().map(ToString::to_string).collect();
            writeln!(w, "{b},{}", row.join(","))?;
        }
        Ok(())
    }
}

fn power_of_p<T: Coeff>(p: u32, e: u32) -> Result<T, CycError> {
    num_traits::checked_pow(T::from_u32(p).ok_or(CycError::Overflow)?, e as usize).ok_or(CycError::Overflow)
}

/// Whether the spectrum of `f + <c, .>` is the translate `b -> b - c` of the spectrum of `f`.
pub fn shift_property_check(f: &PFunction, c: usize) -> bool {
    let base = walsh_full::<i64>(f);
    let shifted = walsh_full::<i64>(&f.add_linear(c));
    (0..f.domain.size()).all(|b| shifted.get(b) == base.get(f.domain.sub(b, c)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    NotApplicable,
    Regular,
    WeaklyRegular(Zeta),
    NonWeaklyRegular,
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::NotApplicable => "NotApplicable",
            Classification::Regular => "Regular",
            Classification::WeaklyRegular(_) => "WeaklyRegular",
            Classification::NonWeaklyRegular => "NonWeaklyRegular",
        }
    }

    pub fn zeta(&self) -> Option<Zeta> {
        match self {
            Classification::Regular => Some(Zeta::One),
            Classification::WeaklyRegular(z) => Some(*z),
            _ => None,
        }
    }

    /// Regular counts as weakly regular with `zeta = 1`.
    pub fn is_weakly_regular(&self) -> bool {
        matches!(self, Classification::Regular | Classification::WeaklyRegular(_))
    }
}

/// Class key of a normalized coefficient: its unit and the exponent `j`.
pub type ShapeClass = (Zeta, u32);

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub p: u32,
    pub dim: usize,
    pub is_bent: bool,
    pub is_near_bent: bool,
    pub support_size: usize,
    pub classification: Classification,
    pub class_multiplicities: BTreeMap<ShapeClass, u64>,
    /// Matched shape per `b`; empty unless bent or near-bent.
    pub shapes: Vec<Option<ValueShape>>,
}

impl SpectrumReport {
    /// `f*(b)`: defined everywhere for bent, on the support for near-bent.
    pub fn dual(&self) -> Option<Vec<Option<u32>>> {
        if self.shapes.is_empty() {
            return None;
        }
        Some(self.shapes.iter().map(|s| s.map(|s| s.j)).collect())
    }

    pub fn value_set(&self) -> BTreeSet<ShapeClass> {
        self.class_multiplicities.keys().copied().collect()
    }

    /// Multiplicities restricted to the listed `b` indices.
    pub fn multiplicities_over(&self, indices: impl IntoIterator<Item = usize>) -> BTreeMap<ShapeClass, u64> {
        let mut out = BTreeMap::new();
        for b in indices {
            if let Some(Some(s)) = self.shapes.get(b) {
                *out.entry((s.zeta, s.j)).or_insert(0) += 1;
            }
        }
        out
    }
}

impl Serialize for SpectrumReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SpectrumReport", 8)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("dim", &self.dim)?;
        st.serialize_field("is_bent", &self.is_bent)?;
        st.serialize_field("is_near_bent", &self.is_near_bent)?;
        st.serialize_field("support_size", &self.support_size)?;
        st.serialize_field("classification", self.classification.name())?;
        st.serialize_field("zeta", &self.classification.zeta())?;
        st.serialize_field("class_multiplicities", &multiplicity_list(&self.class_multiplicities))?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MultiplicityEntry {
    pub zeta: Zeta,
    pub j: u32,
    pub count: u64,
}

pub fn multiplicity_list(m: &BTreeMap<ShapeClass, u64>) -> Vec<MultiplicityEntry> {
    m.iter().map(|(&(zeta, j), &count)| MultiplicityEntry { zeta, j, count }).collect()
}

/// Classifies a spectrum: bent / near-bent flags, and for either, the exact
/// shape of every nonzero coefficient and the resulting regularity type.
pub fn analyze<T: Coeff>(spec: &WalshSpectrum<T>) -> Result<SpectrumReport, SpectrumError> {
    let p = spec.p();
    let dim = spec.dim() as u32;
    let bent_mag = power_of_p::<T>(p, dim)?;
    let near_mag = power_of_p::<T>(p, dim + 1)?;

    // None when |W(b)|^2 is irrational
    let norms: Vec<Option<T>> = spec
        .coefficients
        .par_iter()
        .map(|w| Ok(w.norm_sq()?.as_rational_integer().cloned()))
        .collect::<Result<_, CycError>>()?;

    let is_bent = norms.iter().all(|v| v.as_ref() == Some(&bent_mag));
    let is_near_bent = norms.iter().all(|v| v.as_ref().is_some_and(|v| *v == near_mag || v.is_zero()));
    let support_size = spec.support_size();

    let mut report = SpectrumReport {
        p,
        dim: dim as usize,
        is_bent,
        is_near_bent,
        support_size,
        classification: Classification::NotApplicable,
        class_multiplicities: BTreeMap::new(),
        shapes: Vec::new(),
    };
    if !is_bent && !is_near_bent {
        return Ok(report);
    }

    let exponent = if is_bent { dim } else { dim + 1 };
    let matcher = ShapeMatcher::<T>::new(p, exponent)?;
    let shapes: Vec<Option<ValueShape>> = spec
        .coefficients
        .par_iter()
        .enumerate()
        .map(|(b, w)| {
            if w.is_zero() {
                return Ok(None);
            }
            match matcher.matches(w)? {
                Some(s) => Ok(Some(s)),
                None => Err(SpectrumError::ShapeMismatch { b }),
            }
        })
        .collect::<Result<_, SpectrumError>>()?;

    let zetas: BTreeSet<Zeta> = shapes.iter().flatten().map(|s| s.zeta).collect();
    report.classification = match zetas.len() {
        0 => Classification::NotApplicable,
        1 => match zetas.into_iter().next().unwrap() {
            Zeta::One => Classification::Regular,
            z => Classification::WeaklyRegular(z),
        },
        _ => Classification::NonWeaklyRegular,
    };
    report.class_multiplicities = report_counts(&shapes);
    report.shapes = shapes;
    Ok(report)
}

fn report_counts(shapes: &[Option<ValueShape>]) -> BTreeMap<ShapeClass, u64> {
    let mut out = BTreeMap::new();
    for s in shapes.iter().flatten() {
        *out.entry((s.zeta, s.j)).or_insert(0) += 1;
    }
    out
}
