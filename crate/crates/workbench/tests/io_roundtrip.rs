use num_bigint::BigInt;
use proptest::prelude::*;
use stackelberg_core::oracle::GameInstance;
use stackelberg_core::Rational;
use stackelberg_workbench::io::{parse_instance_str, InstanceFile};

fn unit_rational() -> impl Strategy<Value = Rational> {
    (1u64..1_000_000_000_000, any::<u64>())
        .prop_map(|(den, k)| Rational::new(BigInt::from(k % (den + 1)), BigInt::from(den)).unwrap())
}

fn instance() -> impl Strategy<Value = GameInstance> {
    (1usize..5, 1usize..5).prop_flat_map(|(m, n)| {
        let matrix = || proptest::collection::vec(proptest::collection::vec(unit_rational(), n), m);
        (matrix(), matrix()).prop_map(|(l, f)| GameInstance::new(l, f).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn parse_inverts_serialize(g in instance()) {
        let text = serde_json::to_string(&InstanceFile::from_instance(&g)).unwrap();
        prop_assert_eq!(parse_instance_str(&text).unwrap(), g);
    }
}
