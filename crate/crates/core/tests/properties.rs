//! Property tests for the set algebra and measure calculus.

use groth_core::group::catalog;
use groth_core::measures::{convolve_measures, uniform_measure};
use groth_core::subset::{inverse_set, product_set, Subset};
use groth_core::GroupTable;
use proptest::prelude::*;

fn group_and_masks() -> impl Strategy<Value = (GroupTable, u64, u64, u64)> {
    (0usize..catalog().len(), any::<u64>(), any::<u64>(), any::<u64>())
        .prop_map(|(i, a, b, c)| (catalog().swap_remove(i), a, b, c))
}

fn from_mask(group: &GroupTable, mask: u64) -> Subset {
    let mut s = Subset::empty(group);
    for e in 0..group.order().min(64) {
        if mask >> e & 1 == 1 {
            s.insert(e);
        }
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hex_roundtrip((group, m, _, _) in group_and_masks()) {
        let s = from_mask(&group, m);
        let back = Subset::from_hex(&group, &s.to_hex()).unwrap();
        prop_assert_eq!(s.elems(), back.elems());
    }

    #[test]
    fn product_is_associative((group, m1, m2, m3) in group_and_masks()) {
        let (a, b, c) = (from_mask(&group, m1), from_mask(&group, m2), from_mask(&group, m3));
        prop_assume!(!a.is_empty() && !b.is_empty() && !c.is_empty());
        let left = product_set(&group, &product_set(&group, &a, &b).unwrap(), &c).unwrap();
        let right = product_set(&group, &a, &product_set(&group, &b, &c).unwrap()).unwrap();
        prop_assert_eq!(left.to_hex(), right.to_hex());
    }

    #[test]
    fn inverse_antihomomorphism((group, m1, m2, _) in group_and_masks()) {
        let (a, b) = (from_mask(&group, m1), from_mask(&group, m2));
        prop_assume!(!a.is_empty() && !b.is_empty());
        let lhs = inverse_set(&group, &product_set(&group, &a, &b).unwrap()).unwrap();
        let rhs = product_set(
            &group,
            &inverse_set(&group, &b).unwrap(),
            &inverse_set(&group, &a).unwrap(),
        )
        .unwrap();
        prop_assert_eq!(lhs.to_hex(), rhs.to_hex());
    }

    #[test]
    fn convolution_preserves_mass((group, m1, m2, _) in group_and_masks()) {
        let (a, b) = (from_mask(&group, m1), from_mask(&group, m2));
        prop_assume!(!a.is_empty() && !b.is_empty());
        let mu = uniform_measure(&group, &a).unwrap();
        let nu = uniform_measure(&group, &b).unwrap();
        let conv = convolve_measures(&group, &mu, &nu).unwrap();
        prop_assert!((conv.total() - mu.total() * nu.total()).abs() <= 1e-9);
    }
}
