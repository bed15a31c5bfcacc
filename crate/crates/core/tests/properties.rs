use std::collections::BTreeSet;
use std::sync::Arc;

use pbent::construct::{anf, predict_regularity, Regularity};
use pbent::quadratic::{certificate, delta_eta, form_delta_eta, quadratic_form_matrix};
use pbent::spectrum::{analyze, walsh_full};
use pbent::verify::random_glued_spec;
use pbent::{CycInt, Domain, FieldCtx, FieldElement, MatrixFp, PFunction, QuadraticSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field(n: usize) -> Arc<FieldCtx> {
    Arc::new(FieldCtx::new(3, n, None).unwrap())
}

fn quadratic(n: usize) -> impl Strategy<Value = QuadraticSpec> {
    let q = 3u64.pow(n as u32);
    (proptest::collection::vec((0..q, 0..n), 1..4), 0..q, 0..3u32).prop_map(move |(terms, b, c)| {
        let ctx = field(n);
        QuadraticSpec::new(ctx, terms.into_iter().map(|(a, i)| (FieldElement(a), i)), FieldElement(b), c)
    })
}

fn any_quadratic() -> impl Strategy<Value = QuadraticSpec> {
    (2usize..=5).prop_flat_map(quadratic)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn norms_are_flat_or_zero(spec in any_quadratic()) {
        let n = spec.ctx().n();
        let s = certificate(&spec).unwrap().s;
        let w = walsh_full::<i64>(&spec.to_table());
        let big = CycInt::from_int(3, 3i64.pow((n + s) as u32));
        let norms: BTreeSet<Vec<i64>> = w.coefficients().iter().map(|c| c.norm_sq().unwrap().counts().to_vec()).collect();
        let mut expect = BTreeSet::from([big.counts().to_vec()]);
        if s > 0 {
            expect.insert(vec![0, 0, 0]);
        }
        prop_assert_eq!(norms, expect);
        prop_assert!(w.parseval_holds().unwrap());
    }

    #[test]
    fn discriminant_is_congruence_invariant(spec in quadratic(4), seed in any::<u64>()) {
        let a = quadratic_form_matrix(&spec);
        let Ok(base) = form_delta_eta(&a) else { return Ok(()); };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = loop {
            let m = MatrixFp::from_fn(3, 4, 4, |_, _| rand::Rng::gen_range(&mut rng, 0..3));
            if m.inverse().is_some() {
                break m;
            }
        };
        prop_assert_eq!(form_delta_eta(&p.transpose().mul(&a).mul(&p)).unwrap(), base);
        prop_assert_eq!(delta_eta(&spec).unwrap(), base);
    }

    #[test]
    fn quadratic_degree(spec in any_quadratic()) {
        let ctx = spec.ctx();
        let quadratic_zero = ctx.elements().all(|x| spec.eval_quadratic(x) == 0);
        let linear_zero = spec.linear().is_zero();
        let expect = match (quadratic_zero, linear_zero) {
            (false, _) => 2,
            (true, false) => 1,
            (true, true) => 0,
        };
        prop_assert_eq!(anf(&spec.to_table()).degree(), expect);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn glued_functions_are_bent(seed in any::<u64>(), odd in any::<bool>()) {
        let n = if odd { 5 } else { 4 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_glued_spec(&mut rng, n);
        let f = spec.glue();
        let q = 3usize.pow(n as u32);
        for k in 0..3 {
            let slice = spec.realized(k).to_table();
            prop_assert_eq!(&f.table()[k * q..(k + 1) * q], slice.table());
        }
        prop_assert!(spec.verify_support_partition().unwrap());
        let report = analyze(&walsh_full::<i64>(&f)).unwrap();
        prop_assert!(report.is_bent);
        prop_assert_eq!(Regularity::of(&report.classification), Some(predict_regularity(&spec).unwrap()));

        let degree = anf(&f).degree();
        prop_assert!(degree <= 4);
        // degree 2 iff f_k = A + k B with B affine: equal quadratic parts and f_0 + f_1 + f_2 = 0
        let quad: Vec<_> = (0..3).map(|k| spec.realized(k).quadratic_part().to_table()).collect();
        let same_quadratic = quad.iter().all(|t| t.table() == quad[0].table());
        let affine_in_k = (0..q).all(|x| (f.value(x) + f.value(x + q) + f.value(x + 2 * q)).is_multiple_of(3));
        prop_assert_eq!(degree == 2, same_quadratic && affine_in_k);
        if !same_quadratic {
            prop_assert!(degree >= 3);
        }
    }

    #[test]
    fn random_tables_satisfy_parseval(seed in any::<u64>(), product in any::<bool>()) {
        let dom = if product { Domain::Product(field(2)) } else { Domain::Field(field(3)) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table = (0..dom.size()).map(|_| rand::Rng::gen_range(&mut rng, 0..3)).collect();
        let f = PFunction::new(dom, table).unwrap();
        prop_assert!(walsh_full::<i64>(&f).parseval_holds().unwrap());
        prop_assert!(walsh_full::<i128>(&f).parseval_holds().unwrap());
    }
}
