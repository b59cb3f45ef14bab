use std::collections::BTreeMap;

use proptest::prelude::*;
use signrev_core::arith::{IndexVector, Rational};
use signrev_core::identity::{lhs_eq3, rhs_eq3, verify_symbolic, IdentityInstance};
use signrev_core::multipoly::VariableId;

fn all_n(m: usize, max_norm: i64) -> Vec<IndexVector> {
    IndexVector::new(vec![max_norm; m])
        .box_below()
        .into_iter()
        .filter(|n| n.norm() <= max_norm)
        .collect()
}

#[test]
fn symbolic_identity_small_degrees() {
    for m in 1..=2 {
        for n in all_n(m, 3) {
            let r = verify_symbolic(&IdentityInstance::symbolic(n.clone()).unwrap());
            assert!(r.equal, "n={n}: {}", r.difference);
        }
    }
}

#[test]
fn degree_bounds() {
    for m in 1..=3 {
        for n in all_n(m, 3) {
            let inst = IdentityInstance::symbolic(n.clone()).unwrap();
            for side in [lhs_eq3(&inst), rhs_eq3(&inst)] {
                let norm = n.norm() as u32;
                assert_eq!(side.degree_where(VariableId::is_xy), Some(norm), "n={n}");
                // every term is homogeneous of degree |n| in x, y
                for (mono, _) in side.terms() {
                    assert_eq!(mono.degree_where(VariableId::is_xy), norm);
                }
                assert!(side.degree_where(|v| v == VariableId::Alpha).unwrap() <= norm);
                assert!(side.degree_where(|v| v == VariableId::Beta).unwrap() <= norm);
            }
        }
    }
}

fn permuted(inst_n: &IndexVector, perm: &[usize]) -> IndexVector {
    // coordinate i of n moves to position perm[i]
    let mut out = vec![0; inst_n.len()];
    for (i, &p) in perm.iter().enumerate() {
        out[p] = inst_n[i];
    }
    IndexVector::new(out)
}

#[test]
fn permutation_equivariance() {
    let perms: Vec<Vec<usize>> = vec![vec![1, 0], vec![1, 2, 0], vec![2, 0, 1], vec![0, 2, 1]];
    for perm in perms {
        let m = perm.len();
        for n in all_n(m, 3) {
            let a = IdentityInstance::symbolic(n.clone()).unwrap();
            let b = IdentityInstance::symbolic(permuted(&n, &perm)).unwrap();
            let rename = |v: VariableId| match v {
                VariableId::X(i) => VariableId::X(perm[i as usize - 1] as u32 + 1),
                VariableId::Y(i) => VariableId::Y(perm[i as usize - 1] as u32 + 1),
                o => o,
            };
            assert_eq!(
                lhs_eq3(&a).rename(rename).canonical_string(),
                lhs_eq3(&b).canonical_string(),
                "n={n} perm={perm:?}"
            );
            assert_eq!(rhs_eq3(&a).rename(rename).canonical_string(), rhs_eq3(&b).canonical_string());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sides_agree_at_rational_points(
        n in proptest::collection::vec(0i64..3, 1..3),
        vals in proptest::collection::vec((-30i64..30, 1i64..6), 6),
    ) {
        let inst = IdentityInstance::symbolic(IndexVector::new(n.clone())).unwrap();
        let mut vars = vec![VariableId::Alpha, VariableId::Beta];
        for i in 1..=n.len() as u32 {
            vars.push(VariableId::X(i));
            vars.push(VariableId::Y(i));
        }
        let at: BTreeMap<VariableId, Rational> = vars
            .into_iter()
            .zip(vals.into_iter().cycle())
            .map(|(v, (p, q))| (v, Rational::new(p.into(), q.into())))
            .collect();
        prop_assert_eq!(lhs_eq3(&inst).evaluate(&at).unwrap(), rhs_eq3(&inst).evaluate(&at).unwrap());
    }
}
