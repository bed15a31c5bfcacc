//! Bent functions on `F_{p^n} x F_p` glued from `p` near-bent quadratic
//! functions with pairwise disjoint Walsh supports.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gfpn::{pow_mod, FieldCtx, FieldElement, FieldError, MatrixFp};
use crate::quadratic::{certificate, delta_eta, linearized, QuadraticError, QuadraticSpec, QuadraticSpecJson};
use crate::spectrum::{analyze, walsh_full, Classification, Domain, PFunction, SpectrumError};

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("expected {expected} components, got {got}")]
    WrongComponentCount { expected: usize, got: usize },
    #[error("scalar c_{0} must be a nonzero element of F_p")]
    ZeroScalar(usize),
    #[error("component {0} is defined over a different field")]
    FieldMismatch(usize),
    #[error("component {0} is not near-bent after scaling")]
    NotNearBent(usize),
    #[error("kernel of component {0} differs from the kernel of component 0")]
    KernelMismatch(usize),
    #[error("witness b_{0} violates the disjoint-support condition")]
    WitnessCondition(usize),
    #[error("no example with id {0}; expected 2..=6")]
    UnknownExample(u32),
    #[error(transparent)]
    Quadratic(#[from] QuadraticError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `p` quadratic components `g_k`, nonzero scalars `c_k` and witnesses `b_k`;
/// the glued function is `F(x, y) = f_y(x)` with `f_k = c_k g_k + Tr(b_k x)`.
#[derive(Debug, Clone)]
pub struct GluedSpec {
    ctx: Arc<FieldCtx>,
    components: Vec<QuadraticSpec>,
    scalars: Vec<u32>,
    beta: FieldElement,
    witnesses: Vec<FieldElement>,
}

impl GluedSpec {
    /// Computes witnesses `b_k` so that the supports of the `f_k` are disjoint.
    pub fn arrange(components: Vec<QuadraticSpec>, scalars: Vec<u32>) -> Result<Self, ConstructError> {
        let (ctx, beta) = check_components(&components, &scalars)?;
        let p = ctx.p();
        let b_star = ctx.solve_trace_equation(beta, 1)?;
        let h: Vec<u32> = components.iter().zip(&scalars).map(|(g, &c)| affine_at(&g.scaled(c), beta)).collect();
        let witnesses = (0..p as usize)
            .map(|k| {
                let lambda = (h[0] + k as u32 + p - h[k]) % p;
                ctx.scale(lambda, b_star)
            })
            .collect();
        Ok(GluedSpec { ctx, components, scalars, beta, witnesses })
    }

    /// Uses caller-supplied witnesses, rejecting any that break disjointness.
    pub fn with_witnesses(
        components: Vec<QuadraticSpec>,
        scalars: Vec<u32>,
        witnesses: Vec<FieldElement>,
    ) -> Result<Self, ConstructError> {
        let (ctx, beta) = check_components(&components, &scalars)?;
        if witnesses.len() != components.len() {
            return Err(ConstructError::WrongComponentCount { expected: components.len(), got: witnesses.len() });
        }
        let spec = GluedSpec { ctx, components, scalars, beta, witnesses };
        if let Some(k) = spec.condition_failure() {
            return Err(ConstructError::WitnessCondition(k));
        }
        Ok(spec)
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn p(&self) -> u32 {
        self.ctx.p()
    }

    pub fn n(&self) -> usize {
        self.ctx.n()
    }

    pub fn components(&self) -> &[QuadraticSpec] {
        &self.components
    }

    pub fn scalars(&self) -> &[u32] {
        &self.scalars
    }

    pub fn beta(&self) -> FieldElement {
        self.beta
    }

    pub fn witnesses(&self) -> &[FieldElement] {
        &self.witnesses
    }

    /// `f_k = c_k g_k + Tr(b_k x)`.
    pub fn realized(&self, k: usize) -> QuadraticSpec {
        self.components[k].scaled(self.scalars[k]).plus_linear(self.witnesses[k])
    }

    /// First `k` whose support offset `h_k(beta)` differs from `h_0(beta) + k`.
    fn condition_failure(&self) -> Option<usize> {
        let p = self.p();
        let h: Vec<u32> = (0..p as usize).map(|k| affine_at(&self.realized(k), self.beta)).collect();
        (0..p as usize).find(|&k| h[k] != (h[0] + k as u32) % p)
    }

    pub fn condition_holds(&self) -> bool {
        self.condition_failure().is_none()
    }

    /// Value table of `F` on `F_{p^n} x F_p`, index `x + p^n y`.
    pub fn glue(&self) -> PFunction {
        let q = self.ctx.order() as usize;
        let mut table = Vec::with_capacity(q * self.p() as usize);
        for k in 0..self.p() as usize {
            table.extend_from_slice(self.realized(k).to_table().table());
        }
        PFunction::new(Domain::Product(self.ctx.clone()), table).expect("glued table is well formed")
    }

    /// Computes each component spectrum and checks the supports partition `F_{p^n}`.
    pub fn verify_support_partition(&self) -> Result<bool, ConstructError> {
        let q = self.ctx.order() as usize;
        let expect = q / self.p() as usize;
        let mut owner = vec![None; q];
        for k in 0..self.p() as usize {
            let spec = walsh_full::<i64>(&self.realized(k).to_table());
            let mut size = 0;
            for (a, w) in spec.coefficients().iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                if owner[a].replace(k).is_some() {
                    return Ok(false);
                }
                size += 1;
            }
            if size != expect {
                return Ok(false);
            }
        }
        Ok(owner.iter().all(Option::is_some))
    }

    pub fn to_json(&self) -> GluedSpecJson {
        GluedSpecJson {
            p: self.p(),
            n: self.n(),
            modulus: Some(self.ctx.modulus().to_vec()),
            components: self.components.iter().map(QuadraticSpec::to_json).collect(),
            scalars: self.scalars.clone(),
            b_indices: Some(self.witnesses.iter().map(|b| b.0).collect()),
        }
    }

    pub fn from_json(json: &GluedSpecJson) -> Result<Self, ConstructError> {
        let ctx = Arc::new(FieldCtx::new(json.p as u64, json.n, json.modulus.as_deref())?);
        let mut components = Vec::with_capacity(json.components.len());
        for (k, c) in json.components.iter().enumerate() {
            if c.p != json.p || c.n != json.n || c.modulus.as_ref().is_some_and(|m| m.as_slice() != ctx.modulus()) {
                return Err(ConstructError::FieldMismatch(k));
            }
            components.push(QuadraticSpec::from_json(c, ctx.clone())?);
        }
        match &json.b_indices {
            None => GluedSpec::arrange(components, json.scalars.clone()),
            Some(b) => {
                let witnesses = b.iter().map(|&i| ctx.element(i)).collect::<Result<_, _>>()?;
                GluedSpec::with_witnesses(components, json.scalars.clone(), witnesses)
            }
        }
    }
}

/// `h(beta) - h(0)`: the value at `beta` of the non-constant part.
fn affine_at(f: &QuadraticSpec, beta: FieldElement) -> u32 {
    let p = f.ctx().p();
    (f.eval(beta) + p - f.eval(FieldElement::ZERO)) % p
}

/// Checks count, field, scalars, near-bentness and a common kernel; returns the kernel generator.
fn check_components(
    components: &[QuadraticSpec],
    scalars: &[u32],
) -> Result<(Arc<FieldCtx>, FieldElement), ConstructError> {
    let Some(first) = components.first() else {
        return Err(ConstructError::WrongComponentCount { expected: 0, got: 0 });
    };
    let ctx = first.ctx().clone();
    let p = ctx.p() as usize;
    if components.len() != p {
        return Err(ConstructError::WrongComponentCount { expected: p, got: components.len() });
    }
    if scalars.len() != p {
        return Err(ConstructError::WrongComponentCount { expected: p, got: scalars.len() });
    }
    let mut beta = None;
    for (k, (g, &c)) in components.iter().zip(scalars).enumerate() {
        if !Arc::ptr_eq(g.ctx(), &ctx) && g.ctx().desc() != ctx.desc() {
            return Err(ConstructError::FieldMismatch(k));
        }
        if c % ctx.p() == 0 {
            return Err(ConstructError::ZeroScalar(k));
        }
        let realized = g.scaled(c);
        let cert = certificate(&realized)?;
        if cert.s != 1 {
            return Err(ConstructError::NotNearBent(k));
        }
        match beta {
            None => beta = cert.beta,
            Some(b) => {
                if !linearized(&realized)?.eval(&ctx, b).is_zero() {
                    return Err(ConstructError::KernelMismatch(k));
                }
            }
        }
    }
    Ok((ctx, beta.expect("p >= 3 components")))
}

/// `{"p", "n", "modulus"?, "components": [QuadraticSpec], "scalars": [int], "b_indices"?: [int]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluedSpecJson {
    pub p: u32,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
    pub components: Vec<QuadraticSpecJson>,
    pub scalars: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_indices: Option<Vec<u64>>,
}

/// Reduced polynomial over `F_p` in the coordinates of the domain, every
/// exponent in `0..p`. Coefficient of the monomial with exponent digits
/// `e_0, e_1, ...` is stored at index `sum e_i p^i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnfPoly {
    p: u32,
    dim: usize,
    coeffs: Vec<u32>,
}

impl AnfPoly {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    fn exponents(&self, mut idx: usize) -> Vec<u32> {
        let p = self.p as usize;
        (0..self.dim)
            .map(|_| {
                let e = (idx % p) as u32;
                idx /= p;
                e
            })
            .collect()
    }

    /// Nonzero terms as (exponent vector, coefficient).
    pub fn terms(&self) -> impl Iterator<Item = (Vec<u32>, u32)> + '_ {
        self.coeffs.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| (self.exponents(i), c))
    }

    /// Largest total degree of a nonzero term; 0 for constants and the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms().map(|(e, _)| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, point: &[u32]) -> u32 {
        let p = self.p as u64;
        self.terms()
            .map(|(e, c)| e.iter().zip(point).fold(c as u64, |acc, (&e, &x)| acc * pow_mod(x as u64, e as u64, p) % p))
            .sum::<u64>() as u32
            % self.p
    }
}

/// Coordinate vector (base-`p` digits of the index) of a domain point.
pub fn coordinates(p: u32, dim: usize, mut idx: usize) -> Vec<u32> {
    (0..dim)
        .map(|_| {
            let d = (idx % p as usize) as u32;
            idx /= p as usize;
            d
        })
        .collect()
}

/// Algebraic normal form: one inverse-Vandermonde pass per coordinate.
pub fn anf(f: &PFunction) -> AnfPoly {
    let p = f.p();
    let dim = f.dim();
    let ps = p as usize;
    // v(t) = sum_e c_e t^e, 0^0 = 1
    let vandermonde = MatrixFp::from_fn(p, ps, ps, |t, e| pow_mod(t as u64, e as u64, p as u64) as u32);
    let inv = vandermonde.inverse().expect("Vandermonde matrix on distinct points is invertible");
    let mut buf = f.table().to_vec();
    let mut stride = 1;
    let mut tmp = vec![0u32; ps];
    for _ in 0..dim {
        let block = stride * ps;
        for base in (0..buf.len()).step_by(block) {
            for off in 0..stride {
                for (t, slot) in tmp.iter_mut().enumerate() {
                    *slot = buf[base + off + t * stride];
                }
                let out = inv.mul_vec(&tmp);
                for (e, v) in out.into_iter().enumerate() {
                    buf[base + off + e * stride] = v;
                }
            }
        }
        stride = block;
    }
    AnfPoly { p, dim, coeffs: buf }
}

fn trace_binomial(ctx: &Arc<FieldCtx>, a: u64, i: usize, b: u64, j: usize) -> QuadraticSpec {
    QuadraticSpec::new(ctx.clone(), [(ctx.scalar(a), i), (ctx.scalar(b), j)], FieldElement::ZERO, 0)
}

/// The worked examples over `F_{3^8}` (ids 2 to 5) and `F_{3^5}` (id 6).
pub fn build_example(id: u32) -> Result<GluedSpec, ConstructError> {
    if !(2..=6).contains(&id) {
        return Err(ConstructError::UnknownExample(id));
    }
    if id == 6 {
        let ctx = Arc::new(FieldCtx::new(3, 5, None)?);
        // Tr(x^10 - x^4)
        let g = trace_binomial(&ctx, 1, 2, 2, 1);
        let b = [0, 2, 1].map(|c| ctx.scalar(c)).to_vec();
        return GluedSpec::with_witnesses(vec![g.clone(), g.clone(), g], vec![1, 2, 1], b);
    }
    let ctx = Arc::new(FieldCtx::new(3, 8, None)?);
    // Tr(x^10 + x^4) and Tr(x^{3^6+1} + x^{3^5+1})
    let ga = trace_binomial(&ctx, 1, 2, 1, 1);
    let gb = trace_binomial(&ctx, 1, 6, 1, 5);
    let components = match id {
        2 | 3 => vec![ga.clone(), ga, gb],
        _ => vec![ga, gb.clone(), gb],
    };
    let scalars = if id == 3 || id == 5 { vec![1, 2, 1] } else { vec![1, 1, 1] };
    let beta = certificate(&components[0])?.beta.expect("near-bent component");
    let b = vec![FieldElement::ONE, beta, ctx.scale(2, beta)];
    GluedSpec::with_witnesses(components, scalars, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regularity {
    WeaklyRegular,
    NonWeaklyRegular,
}

impl Regularity {
    /// Restriction of a spectral classification; `None` for non-bent functions.
    pub fn of(c: &Classification) -> Option<Regularity> {
        match c {
            Classification::Regular | Classification::WeaklyRegular(_) => Some(Regularity::WeaklyRegular),
            Classification::NonWeaklyRegular => Some(Regularity::NonWeaklyRegular),
            Classification::NotApplicable => None,
        }
    }
}

/// `eta(Delta_k)` for each realized component.
pub fn component_etas(spec: &GluedSpec) -> Result<Vec<i8>, ConstructError> {
    (0..spec.p() as usize).map(|k| Ok(delta_eta(&spec.realized(k))?)).collect()
}

/// Weakly regular iff all `eta(Delta_k)` agree.
pub fn predict_regularity(spec: &GluedSpec) -> Result<Regularity, ConstructError> {
    let etas = component_etas(spec)?;
    Ok(if etas.iter().all(|&e| e == etas[0]) { Regularity::WeaklyRegular } else { Regularity::NonWeaklyRegular })
}

/// Spectral classification of the glued function.
pub fn spectral_regularity(spec: &GluedSpec) -> Result<Option<Regularity>, ConstructError> {
    let report = analyze(&walsh_full::<i64>(&spec.glue()))?;
    Ok(Regularity::of(&report.classification))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanRow {
    pub scalars: Vec<u32>,
    pub predicted: Regularity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral: Option<Option<Regularity>>,
}

impl ScanRow {
    pub fn agrees(&self) -> bool {
        self.spectral.is_none_or(|s| s == Some(self.predicted))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanReport {
    pub p: u32,
    pub n: usize,
    pub confirmed: bool,
    pub weakly_regular: usize,
    pub non_weakly_regular: usize,
    pub disagreements: usize,
    pub rows: Vec<ScanRow>,
}

/// Runs every scalar tuple in `(F_p^*)^p` over the template components, in
/// lexicographic order; with `confirm`, also classifies each full spectrum.
pub fn scan_coefficients(template: &[QuadraticSpec], confirm: bool) -> Result<ScanReport, ConstructError> {
    let ones = vec![1; template.len()];
    let base = GluedSpec::arrange(template.to_vec(), ones)?;
    let p = base.p();
    let count = (p as usize - 1).pow(p);
    let tuples: Vec<Vec<u32>> = (0..count)
        .map(|mut t| {
            let mut c = vec![0; p as usize];
            for slot in c.iter_mut().rev() {
                *slot = (t % (p as usize - 1)) as u32 + 1;
                t /= p as usize - 1;
            }
            c
        })
        .collect();
    let rows = tuples
        .into_par_iter()
        .map(|scalars| {
            let spec = GluedSpec::arrange(template.to_vec(), scalars.clone())?;
            let predicted = predict_regularity(&spec)?;
            let spectral = if confirm { Some(spectral_regularity(&spec)?) } else { None };
            Ok(ScanRow { scalars, predicted, spectral })
        })
        .collect::<Result<Vec<_>, ConstructError>>()?;
    let weakly_regular = rows.iter().filter(|r| r.predicted == Regularity::WeaklyRegular).count();
    Ok(ScanReport {
        p,
        n: base.n(),
        confirmed: confirm,
        weakly_regular,
        non_weakly_regular: rows.len() - weakly_regular,
        disagreements: rows.iter().filter(|r| !r.agrees()).count(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::Zeta;
    use crate::quadratic::BinomialVariant;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn field(p: u64, n: usize) -> Arc<FieldCtx> {
        Arc::new(FieldCtx::new(p, n, None).unwrap())
    }

    fn lagrange_oracle(spec: &GluedSpec, x: FieldElement, y: u32) -> u32 {
        // (p - 1) sum_k prod_{j != k} (y - j) f_k(x)
        let p = spec.p() as i64;
        let mut acc = 0i64;
        for k in 0..p {
            let basis: i64 = (0..p).filter(|&j| j != k).map(|j| y as i64 - j).product();
            acc += (p - 1) * basis * spec.realized(k as usize).eval(x) as i64;
        }
        acc.rem_euclid(p) as u32
    }

    #[test]
    fn glue_matches_lagrange_formula() {
        let ctx = field(3, 2);
        let g = QuadraticSpec::binomial(ctx.clone(), 1, 1, 0, BinomialVariant::Minus);
        assert_eq!(certificate(&g).unwrap().s, 1);
        for scalars in [vec![1, 1, 1], vec![1, 2, 2], vec![2, 1, 2]] {
            let spec = GluedSpec::arrange(vec![g.clone(), g.clone(), g.clone()], scalars).unwrap();
            let f = spec.glue();
            for y in 0..3u32 {
                for x in ctx.elements() {
                    assert_eq!(f.value(x.0 as usize + 9 * y as usize), lagrange_oracle(&spec, x, y));
                }
            }
        }
    }

    #[test]
    fn glue_slices_are_components() {
        let spec = build_example(6).unwrap();
        let f = spec.glue();
        let q = spec.ctx().order() as usize;
        for k in 0..3 {
            assert_eq!(&f.table()[k * q..(k + 1) * q], spec.realized(k).to_table().table());
        }
    }

    #[test]
    fn identical_components_use_multiples_of_b_star() {
        let ctx = field(3, 5);
        let g = QuadraticSpec::binomial(ctx.clone(), 1, 2, 1, BinomialVariant::Minus);
        let spec = GluedSpec::arrange(vec![g.clone(), g.clone(), g], vec![1, 1, 1]).unwrap();
        let b_star = ctx.solve_trace_equation(spec.beta(), 1).unwrap();
        for k in 0..3 {
            assert_eq!(spec.witnesses()[k], ctx.scale(k as u32, b_star));
        }
        assert!(spec.verify_support_partition().unwrap());
        let report = analyze(&walsh_full::<i64>(&spec.glue())).unwrap();
        assert!(report.is_bent);
        assert_eq!(anf(&spec.glue()).degree(), 2);
    }

    #[test]
    fn published_witnesses_are_accepted() {
        let ex6 = build_example(6).unwrap();
        assert!(ex6.condition_holds());
        assert_eq!(ex6.beta(), FieldElement::ONE);
        let ex2 = build_example(2).unwrap();
        let ctx = ex2.ctx();
        let beta = ex2.beta();
        assert!(ctx.add(ctx.mul(beta, beta), FieldElement::ONE).is_zero());
        let arranged = GluedSpec::arrange(ex2.components().to_vec(), ex2.scalars().to_vec()).unwrap();
        for k in 0..3 {
            let tr = |b| ctx.trace(ctx.mul(b, beta));
            assert_eq!(tr(arranged.witnesses()[k]), tr(ex2.witnesses()[k]));
        }
    }

    #[test]
    fn bad_witnesses_are_rejected() {
        let ex6 = build_example(6).unwrap();
        let ctx = ex6.ctx().clone();
        let err = GluedSpec::with_witnesses(
            ex6.components().to_vec(),
            ex6.scalars().to_vec(),
            vec![FieldElement::ZERO, FieldElement::ZERO, ctx.scalar(1)],
        )
        .unwrap_err();
        assert!(matches!(err, ConstructError::WitnessCondition(1)));
    }

    #[test]
    fn constants_do_not_affect_witnesses() {
        let ctx = field(3, 5);
        let g = QuadraticSpec::binomial(ctx.clone(), 1, 2, 1, BinomialVariant::Minus);
        let shifted = QuadraticSpec::new(ctx.clone(), g.quad_terms().iter().map(|t| (t.a, t.i)), ctx.scalar(0), 2);
        let lin = g.plus_linear(FieldElement(7));
        let spec = GluedSpec::arrange(vec![g, shifted, lin], vec![1, 2, 1]).unwrap();
        assert!(spec.condition_holds());
        assert!(spec.verify_support_partition().unwrap());
        assert!(analyze(&walsh_full::<i64>(&spec.glue())).unwrap().is_bent);
    }

    #[test]
    fn component_errors() {
        let ctx = field(3, 4);
        let plus = QuadraticSpec::binomial(ctx.clone(), 1, 2, 1, BinomialVariant::Plus);
        let minus = QuadraticSpec::binomial(ctx.clone(), 1, 3, 0, BinomialVariant::Minus);
        assert_eq!(certificate(&minus).unwrap().s, 1);
        assert!(matches!(
            GluedSpec::arrange(vec![plus.clone(), plus.clone(), minus], vec![1, 1, 1]),
            Err(ConstructError::KernelMismatch(2))
        ));
        assert!(matches!(
            GluedSpec::arrange(vec![plus.clone(), plus.clone()], vec![1, 1]),
            Err(ConstructError::WrongComponentCount { expected: 3, got: 2 })
        ));
        assert!(matches!(
            GluedSpec::arrange(vec![plus.clone(), plus.clone(), plus.clone()], vec![1, 0, 1]),
            Err(ConstructError::ZeroScalar(1))
        ));
        let bent = QuadraticSpec::new(ctx.clone(), [(FieldElement::ONE, 0)], FieldElement::ZERO, 0);
        assert!(matches!(
            GluedSpec::arrange(vec![plus.clone(), bent, plus], vec![1, 1, 1]),
            Err(ConstructError::NotNearBent(1))
        ));
        assert!(matches!(build_example(7), Err(ConstructError::UnknownExample(7))));
    }

    #[test]
    fn anf_reproduces_tables() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (p, n) in [(3u64, 3usize), (5, 2)] {
            let ctx = field(p, n);
            for dom in [Domain::Field(ctx.clone()), Domain::Product(ctx.clone())] {
                let table: Vec<u32> = (0..dom.size()).map(|_| rng.gen_range(0..p as u32)).collect();
                let f = PFunction::new(dom.clone(), table).unwrap();
                let poly = anf(&f);
                for x in 0..dom.size() {
                    assert_eq!(poly.eval(&coordinates(p as u32, dom.dim(), x)), f.value(x));
                }
            }
        }
    }

    #[test]
    fn anf_degrees() {
        let ctx = field(3, 4);
        let lin = QuadraticSpec::new(ctx.clone(), [], FieldElement(5), 0);
        assert_eq!(anf(&lin.to_table()).degree(), 1);
        let zero = PFunction::from_fn(Domain::Field(ctx.clone()), |_| 0);
        assert_eq!(anf(&zero).degree(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..20 {
            let s = QuadraticSpec::new(
                ctx.clone(),
                [(FieldElement(rng.gen_range(0..81)), rng.gen_range(0..4))],
                FieldElement(rng.gen_range(0..81)),
                1,
            );
            let expect = if quadratic_part_is_zero(&s) { 1 } else { 2 };
            assert!(anf(&s.to_table()).degree() <= expect);
            if !quadratic_part_is_zero(&s) {
                assert_eq!(anf(&s.to_table()).degree(), 2);
            }
        }
    }

    fn quadratic_part_is_zero(s: &QuadraticSpec) -> bool {
        let ctx = s.ctx();
        ctx.elements().all(|x| s.eval_quadratic(x) == 0)
    }

    #[test]
    fn example_six() {
        let spec = build_example(6).unwrap();
        let f = spec.glue();
        assert_eq!(f.dim(), 6);
        assert!(spec.verify_support_partition().unwrap());
        let report = analyze(&walsh_full::<i64>(&f)).unwrap();
        assert!(report.is_bent);
        assert!(report.classification.is_weakly_regular());
        assert_eq!(predict_regularity(&spec).unwrap(), Regularity::WeaklyRegular);
        assert_eq!(anf(&f).degree(), 4);
    }

    #[test]
    fn scans_at_small_scale() {
        let ctx = field(3, 4);
        let g = QuadraticSpec::binomial(ctx.clone(), 1, 2, 1, BinomialVariant::Plus);
        let r = scan_coefficients(&[g.clone(), g.clone(), g], true).unwrap();
        assert_eq!(r.rows.len(), 8);
        assert_eq!((r.weakly_regular, r.non_weakly_regular, r.disagreements), (2, 6, 0));
        assert_eq!(r.rows[0].scalars, vec![1, 1, 1]);
        assert_eq!(r.rows[7].scalars, vec![2, 2, 2]);

        let ctx = field(3, 5);
        let g = QuadraticSpec::binomial(ctx, 1, 2, 1, BinomialVariant::Minus);
        let r = scan_coefficients(&[g.clone(), g.clone(), g], false).unwrap();
        assert_eq!((r.weakly_regular, r.non_weakly_regular), (8, 0));
        assert!(r.rows.iter().all(|row| row.spectral.is_none()));
    }

    #[test]
    fn json_round_trip() {
        let spec = build_example(6).unwrap();
        let json = serde_json::to_string(&spec.to_json()).unwrap();
        let back = GluedSpec::from_json(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.glue().table(), spec.glue().table());
        let mut no_b = spec.to_json();
        no_b.b_indices = None;
        let arranged = GluedSpec::from_json(&no_b).unwrap();
        assert!(arranged.condition_holds());
        let mut bad = spec.to_json();
        bad.components[1].n = 4;
        assert!(matches!(GluedSpec::from_json(&bad), Err(ConstructError::FieldMismatch(1))));
    }

    #[test]
    fn regularity_of_classification() {
        assert_eq!(Regularity::of(&Classification::Regular), Some(Regularity::WeaklyRegular));
        assert_eq!(Regularity::of(&Classification::WeaklyRegular(Zeta::MinusI)), Some(Regularity::WeaklyRegular));
        assert_eq!(Regularity::of(&Classification::NotApplicable), None);
    }
}
