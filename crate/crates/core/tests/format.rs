use cstar_core::format::{format_g17, from_json_str, to_canonical_string};
use cstar_core::sampling::{ginibre, random_combination, seeded};
use cstar_core::{
    decide_membership, CMatrix, KrausCombination, MatrixFamily, MembershipVerdict, Mode,
    SolverConfig,
};
use proptest::prelude::*;
use rand::Rng;

fn finite() -> impl Strategy<Value = f64> {
    any::<u64>()
        .prop_map(f64::from_bits)
        .prop_filter("finite", |x| x.is_finite())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn floats_survive_a_round_trip(x in finite()) {
        let text = format_g17(x);
        let back: f64 = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
        prop_assert_eq!(format_g17(back), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn documents_are_byte_stable(seed in any::<u64>(), d in 1usize..4, n in 1usize..4) {
        let mut rng = seeded(seed);
        let fam = MatrixFamily::new((0..n).map(|_| ginibre(&mut rng, d, d)).collect()).unwrap();
        let mode = if rng.random() { Mode::SubUnital } else { Mode::ExactUnital };
        let comb = random_combination(&mut rng, n, d, 3, mode);
        let text = to_canonical_string(&fam).unwrap();
        let back: MatrixFamily = from_json_str(&text).unwrap();
        prop_assert_eq!(&back, &fam);
        prop_assert_eq!(to_canonical_string(&back).unwrap(), text);
        let text = to_canonical_string(&comb).unwrap();
        let back: KrausCombination = from_json_str(&text).unwrap();
        prop_assert_eq!(to_canonical_string(&back).unwrap(), text);
    }
}

#[test]
fn verdicts_are_byte_stable() {
    let mut rng = seeded(41);
    let cfg = SolverConfig::default();
    for _ in 0..6 {
        let d = rng.random_range(1..=3);
        let fam =
            MatrixFamily::new(vec![ginibre(&mut rng, d, d), ginibre(&mut rng, d, d)]).unwrap();
        let target: CMatrix = ginibre(&mut rng, d, d).scale(rng.random_range(0.1..3.0));
        let v = decide_membership(&fam, &target, Mode::SubUnital, &cfg).unwrap();
        let text = to_canonical_string(&v).unwrap();
        let back: MembershipVerdict = from_json_str(&text).unwrap();
        assert_eq!(back, v);
        assert_eq!(to_canonical_string(&back).unwrap(), text);
    }
}
