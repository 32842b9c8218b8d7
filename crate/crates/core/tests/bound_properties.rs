use entrobound::bounds::{bound_curve, BoundForm, Certificate};
use entrobound::{Branch, ExponentPair, SequenceSpec, TailModel};
use proptest::prelude::*;

const RTOL: f64 = 1e-10;
const INF: f64 = f64::INFINITY;

fn matrix_specs() -> Vec<SequenceSpec> {
    vec![
        SequenceSpec::geometric(1.0, 2.0).unwrap(),
        SequenceSpec::polynomial(1.0, 2.0).unwrap(),
        SequenceSpec::poly_log(1.0, 1.0, 2.0).unwrap(),
        SequenceSpec::exp_poly(1.0, 1.0).unwrap(),
        SequenceSpec::exp_exp(1.0, 0.5).unwrap(),
    ]
}

fn matrix_pairs() -> Vec<ExponentPair> {
    [(1.0, 2.0), (2.0, INF), (INF, 1.0), (2.0, 1.0)]
        .into_iter()
        .map(|(p, q)| ExponentPair::distinct(p, q).unwrap())
        .collect()
}

fn dyadic(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|j| 1u64 << j).collect()
}

#[test]
fn lower_bound_never_exceeds_constant_upper_bound() {
    let ns = dyadic(0, 20);
    for spec in matrix_specs() {
        for pair in matrix_pairs() {
            let ub = match pair.branch() {
                Branch::Embedding => BoundForm::UbConstLt,
                _ => BoundForm::UbConstGt,
            };
            let rows = bound_curve(&spec, pair, &ns, &[BoundForm::Lb, ub], RTOL).unwrap();
            for row in rows.chunks(2) {
                assert!(row[0].value <= row[1].value, "{spec} {pair} n={}", row[0].n);
            }
        }
    }
}

#[test]
fn every_form_is_nonincreasing_in_n() {
    let ns: Vec<u64> = (0..=40).map(|j| 1u64 << j).chain([3, 5, 6, 7, 100, 1000]).collect();
    let mut ns = ns;
    ns.sort_unstable();
    for spec in matrix_specs() {
        for pair in matrix_pairs() {
            let forms = BoundForm::for_branch(pair.branch());
            let rows = bound_curve(&spec, pair, &ns, &forms, RTOL).unwrap();
            for (f, form) in forms.iter().enumerate() {
                let values: Vec<f64> = rows.iter().skip(f).step_by(forms.len()).map(|r| r.value.ln()).collect();
                for w in values.windows(2) {
                    assert!(w[1] <= w[0] + 1e-12, "{spec} {pair} {form}: {w:?}");
                }
            }
        }
    }
}

#[test]
fn embedding_branch_is_certified_on_the_matrix() {
    for spec in matrix_specs() {
        for pair in matrix_pairs().into_iter().filter(|p| p.branch() == Branch::Embedding) {
            let forms = BoundForm::for_branch(Branch::Embedding);
            for row in bound_curve(&spec, pair, &dyadic(0, 20), &forms, RTOL).unwrap() {
                assert_eq!(row.certificate, Certificate::Certified, "{spec} {pair} {}", row.form);
                assert!(row.k_scanned.contains(row.argmax_k));
            }
        }
    }
}

fn arb_scalable_spec() -> impl Strategy<Value = SequenceSpec> {
    prop_oneof![
        (0.2f64..5.0, 1.1f64..4.0).prop_map(|(c, b)| SequenceSpec::geometric(c, b).unwrap()),
        (0.2f64..5.0, 0.6f64..3.0).prop_map(|(a, alpha)| SequenceSpec::polynomial(a, alpha).unwrap()),
        (0.2f64..5.0, 0.6f64..2.0, 0.0f64..3.0)
            .prop_map(|(a, alpha, beta)| SequenceSpec::poly_log(a, alpha, beta).unwrap()),
        prop::collection::vec(0.01f64..1.0, 1..12).prop_map(|mut v| {
            v.sort_by(|a, b| b.partial_cmp(a).unwrap());
            SequenceSpec::explicit(v, TailModel::GeometricExtension { ratio: 0.5 }).unwrap()
        }),
    ]
}

fn arb_pair() -> impl Strategy<Value = ExponentPair> {
    let exps = prop::sample::select(vec![0.5, 1.0, 1.5, 2.0, 4.0, INF]);
    (exps.clone(), exps).prop_filter("p != q", |(p, q)| p != q).prop_map(|(p, q)| ExponentPair::distinct(p, q).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn bounds_are_one_homogeneous(spec in arb_scalable_spec(), pair in arb_pair(), c in 0.01f64..100.0, n in 1u64..1_000_000) {
        let scaled = spec.scaled(c).unwrap();
        let forms = BoundForm::for_branch(pair.branch());
        let base = bound_curve(&spec, pair, &[n], &forms, RTOL);
        // non-summable draws are rejected alike for both
        let Ok(base) = base else { return Ok(()) };
        let other = bound_curve(&scaled, pair, &[n], &forms, RTOL).unwrap();
        for (a, b) in base.iter().zip(&other) {
            let shift = b.value.ln() - a.value.ln() - c.ln();
            prop_assert!(shift.abs() < 1e-12, "{} {} {}: shift {}", spec, pair, a.form, shift);
        }
    }

    #[test]
    fn sandwich_holds_for_random_inputs(spec in arb_scalable_spec(), pair in arb_pair(), n in 1u64..u64::MAX / 2) {
        let ub = if pair.branch() == Branch::Embedding { BoundForm::UbConstLt } else { BoundForm::UbConstGt };
        if let Ok(rows) = bound_curve(&spec, pair, &[n], &[BoundForm::Lb, ub], RTOL) {
            prop_assert!(rows[0].value <= rows[1].value);
        }
    }
}
