use chainsmith::construct::{
    brauer_slp, choose_k, fermat_amc, fermat_number, tower_slp, MAX_LIMB_BITS,
};
use chainsmith::{evaluate, Op};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::One;
use proptest::prelude::*;

fn mersenne_double(n: u32) -> BigUint {
    (BigUint::one() << (1usize << n)) - 1u32
}

#[test]
fn tower_length_and_value() {
    for n in 1..=6 {
        let p = tower_slp(n).unwrap();
        assert_eq!(p.len(), n as usize + 2);
        assert_eq!(evaluate(&p).0, BigInt::from(mersenne_double(n)));
    }
}

#[test]
fn fermat_chain_is_the_fermat_product() {
    for n in 1..=5 {
        let p = fermat_amc(n).unwrap();
        assert!(p.len() <= 2 * n as usize);
        assert!(!p.has_subtraction());
        let product: BigUint = (0..n).map(|i| fermat_number(i).unwrap()).product();
        assert_eq!(product, mersenne_double(n));
        assert_eq!(evaluate(&p).0, BigInt::from(product));
    }
}

#[test]
fn fermat_numbers_are_pairwise_coprime() {
    let f: Vec<BigUint> = (0..=6).map(|i| fermat_number(i).unwrap()).collect();
    for i in 0..f.len() {
        for j in i + 1..f.len() {
            assert!(f[i].gcd(&f[j]).is_one(), "F_{i}, F_{j}");
        }
    }
}

fn check_brauer(z: &BigUint, k: Option<u32>) -> Result<(), TestCaseError> {
    let (p, plan) = brauer_slp(z, k).unwrap();
    prop_assert_eq!(evaluate(&p).0, BigInt::from(z.clone()));
    prop_assert!(p.steps().iter().all(|s| s.op != Op::Sub));
    prop_assert!((p.len() as u64) <= plan.length_bound());
    prop_assert_eq!(&plan.value(), z);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn brauer_u64_any_k(z in 1u64.., k in 1u32..=8) {
        check_brauer(&BigUint::from(z), Some(k))?;
    }

    #[test]
    fn brauer_default_k(bytes in proptest::collection::vec(any::<u8>(), 1..48)) {
        let z = BigUint::from_bytes_le(&bytes) + 1u32;
        check_brauer(&z, None)?;
    }

    #[test]
    fn choose_k_is_least_valid(n in 2u64..5000) {
        // least k with n^(2^k) >= 2^n, i.e. 2^k · log₂ n >= n
        let k = choose_k(n).unwrap();
        prop_assert!((1..=MAX_LIMB_BITS).contains(&k));
        let holds = |k: u32| (1u64 << k) as f64 * (n as f64).log2() >= n as f64 - 1e-9;
        prop_assert!(holds(k));
        if k > 1 {
            prop_assert!(!holds(k - 1));
        }
    }
}
