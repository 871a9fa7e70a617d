use gtzw_core::combinatorics::{
    count_extensions, count_paths_to, dimension_ratio_row_increment, dimension_ratio_row_increment_exact,
    enumerate_extensions, interlaces, is_horizontal_strip, log_weyl_dimension, skew_cells, to_diagram_pair,
    weyl_dimension, Cell, Partition, Path, Signature,
};
use gtzw_core::growth::signatures_in_box;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use proptest::prelude::*;

fn sig(rows: &[i64]) -> Signature {
    Signature::new(rows.to_vec()).unwrap()
}

fn part(rows: &[u64]) -> Partition {
    Partition::new(rows.to_vec()).unwrap()
}

#[test]
fn interlacing_examples() {
    assert!(interlaces(&sig(&[2, 0]), &sig(&[3, 1, 0])).unwrap());
    assert!(!interlaces(&sig(&[2, 0]), &sig(&[1, 1, 0])).unwrap());
    assert!(interlaces(&sig(&[0]), &sig(&[0, -2])).unwrap());
    assert!(interlaces(&sig(&[0]), &sig(&[0])).is_err());
    assert!(Signature::new(vec![0, 1]).is_err());
    assert!(Signature::new(vec![]).is_err());
}

#[test]
fn diagram_pair_examples() {
    let d = to_diagram_pair(&sig(&[3, 1, 0, -2]));
    assert_eq!(d.positive, part(&[3, 1]));
    assert_eq!(d.negative, part(&[2]));
    let z = to_diagram_pair(&sig(&[0, 0]));
    assert!(z.positive.is_empty() && z.negative.is_empty());
    let n = to_diagram_pair(&sig(&[-1, -1]));
    assert!(n.positive.is_empty());
    assert_eq!(n.negative, part(&[1, 1]));
    assert!(n.to_signature(1).is_err());
}

#[test]
fn skew_examples() {
    let cells = skew_cells(&part(&[2, 1]), &part(&[1])).unwrap();
    assert_eq!(cells, vec![Cell::new(1, 2), Cell::new(2, 1)]);
    assert!(is_horizontal_strip(&part(&[2, 1]), &part(&[1])).unwrap());
    assert_eq!(skew_cells(&part(&[2, 2]), &part(&[2])).unwrap(), vec![Cell::new(2, 1), Cell::new(2, 2)]);
    assert!(is_horizontal_strip(&part(&[2, 2]), &part(&[2])).unwrap());
    assert!(!is_horizontal_strip(&part(&[2, 2]), &part(&[1])).unwrap());
    assert!(skew_cells(&part(&[2]), &part(&[2])).unwrap().is_empty());
    assert!(is_horizontal_strip(&part(&[2]), &part(&[2])).unwrap());
    assert!(skew_cells(&part(&[1]), &part(&[2])).is_err());
}

#[test]
fn dimension_examples() {
    assert_eq!(weyl_dimension(&sig(&[0, 0, 0])).unwrap(), BigUint::from(1u32));
    assert_eq!(weyl_dimension(&sig(&[1, 0])).unwrap(), BigUint::from(2u32));
    assert_eq!(weyl_dimension(&sig(&[2, 1, 0])).unwrap(), BigUint::from(8u32));
    assert_eq!(count_paths_to(&sig(&[1, 0])), BigUint::from(2u32));
    assert_eq!(count_paths_to(&sig(&[7])), BigUint::from(1u32));
    assert_eq!(count_paths_to(&sig(&[1, 1])), BigUint::from(1u32));
    assert!((log_weyl_dimension(&sig(&[2, 1, 0])) - 8f64.ln()).abs() < 1e-14);
    assert!(weyl_dimension(&Signature::zero(61)).is_err());
    assert!(log_weyl_dimension(&Signature::zero(200)).abs() < 1e-12);
}

#[test]
fn extension_examples() {
    let one: Vec<_> = enumerate_extensions(&sig(&[0]), 0, 0).unwrap().collect();
    assert_eq!(one, vec![sig(&[0, 0])]);
    let mut four: Vec<_> = enumerate_extensions(&sig(&[0]), 1, -1).unwrap().collect();
    four.sort();
    let mut want = vec![sig(&[1, 0]), sig(&[1, -1]), sig(&[0, 0]), sig(&[0, -1])];
    want.sort();
    assert_eq!(four, want);
    assert_eq!(enumerate_extensions(&sig(&[2, 0]), 2, 0).unwrap().count(), 3);
    assert_eq!(count_extensions(&sig(&[2, 0]), 2, 0), 3);
    assert!(enumerate_extensions(&sig(&[2, 0]), 1, 0).is_err());
}

#[test]
fn row_increment_examples() {
    assert!((dimension_ratio_row_increment(&sig(&[1, 0]), 1).unwrap() - 1.5).abs() < 1e-15);
    assert_eq!(dimension_ratio_row_increment(&sig(&[0]), 1).unwrap(), 1.0);
    let third = dimension_ratio_row_increment_exact(&sig(&[1, 1, 0]), 3).unwrap();
    assert_eq!(third, BigRational::new(BigInt::from(1), BigInt::from(3)));
    assert!(dimension_ratio_row_increment(&sig(&[1, 1]), 2).is_err());
}

#[test]
fn dimension_matches_path_count_exhaustively() {
    for level in 1..=5 {
        for lam in signatures_in_box(level, -3, 3) {
            assert_eq!(weyl_dimension(&lam).unwrap(), count_paths_to(&lam), "{:?}", lam.rows());
        }
    }
}

#[test]
fn increment_ratio_is_exact_weyl_quotient() {
    for level in 1..=5 {
        for lam in signatures_in_box(level, -3, 3) {
            for i in 1..=level {
                let Ok(up) = lam.with_row_shift(i, 1) else { continue };
                let q = BigRational::new(
                    BigInt::from(weyl_dimension(&up).unwrap()),
                    BigInt::from(weyl_dimension(&lam).unwrap()),
                );
                assert_eq!(dimension_ratio_row_increment_exact(&lam, i).unwrap(), q);
            }
        }
    }
}

#[test]
fn path_validation() {
    assert!(Path::new(1, vec![sig(&[1]), sig(&[2, 0]), sig(&[2, 1, 0])]).is_ok());
    assert!(Path::new(1, vec![sig(&[1]), sig(&[0, 0])]).is_err());
    assert!(Path::new(2, vec![sig(&[1])]).is_err());
    let p = Path::new(2, vec![sig(&[1, 0]), sig(&[1, 0, 0])]).unwrap();
    assert_eq!(p.end_level(), 3);
    assert!(p.at(1).is_none());
    assert_eq!(p.at(3), Some(&sig(&[1, 0, 0])));
}

fn arb_signature(max_level: usize, span: i64) -> impl Strategy<Value = Signature> {
    (1..=max_level)
        .prop_flat_map(move |n| prop::collection::vec(-span..=span, n))
        .prop_map(|mut rows| {
            rows.sort_unstable_by(|a, b| b.cmp(a));
            Signature::new(rows).unwrap()
        })
}

proptest! {
    #[test]
    fn diagram_pair_round_trip(lam in arb_signature(8, 6)) {
        let d = to_diagram_pair(&lam);
        prop_assert_eq!(d.to_signature(lam.level()).unwrap(), lam);
    }

    #[test]
    fn dimension_symmetry(lam in arb_signature(7, 5)) {
        prop_assert_eq!(weyl_dimension(&lam).unwrap(), weyl_dimension(&lam.reversed_negated()).unwrap());
    }

    #[test]
    fn interlacing_iff_horizontal_strips(mu in arb_signature(5, 3), shift in prop::collection::vec(-4i64..=4, 6)) {
        let n = mu.level();
        let mut rows: Vec<i64> = (0..=n).map(|i| shift[i]).collect();
        rows.sort_unstable_by(|a, b| b.cmp(a));
        let lam = Signature::new(rows).unwrap();
        let (a, b) = (to_diagram_pair(&mu), to_diagram_pair(&lam));
        let strips = a.positive.rows().len() <= b.positive.rows().len()
            && b.positive.contains(&a.positive)
            && is_horizontal_strip(&b.positive, &a.positive).unwrap()
            && b.negative.contains(&a.negative)
            && is_horizontal_strip(&b.negative, &a.negative).unwrap();
        prop_assert_eq!(interlaces(&mu, &lam).unwrap(), strips);
    }

    #[test]
    fn extensions_all_interlace(mu in arb_signature(4, 3)) {
        let top = mu.row(1) + 2;
        let bottom = mu.row(mu.level()) - 2;
        let all: Vec<_> = enumerate_extensions(&mu, top, bottom).unwrap().collect();
        prop_assert_eq!(all.len() as u128, count_extensions(&mu, top, bottom));
        for lam in &all {
            prop_assert!(interlaces(&mu, lam).unwrap());
        }
    }
}
