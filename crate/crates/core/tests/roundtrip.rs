mod common;

use common::arb_quads;
use npop_core::nanopub::assemble;
use npop_core::rdf::{canonical_sort, parse_str, serialize, serialize_to_string, Format, QuadSet};
use proptest::prelude::*;

fn set(quads: impl IntoIterator<Item = npop_core::rdf::Quad>) -> Vec<npop_core::rdf::Quad> {
    canonical_sort(quads)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn nquads_round_trip(quads in arb_quads()) {
        let text = serialize_to_string(quads.iter(), Format::NQuads);
        let back = parse_str(&text, Format::NQuads).unwrap();
        prop_assert_eq!(set(back), set(quads));
    }

    #[test]
    fn trig_round_trip(quads in arb_quads()) {
        let text = serialize_to_string(quads.iter(), Format::TriG);
        let back = parse_str(&text, Format::TriG).unwrap();
        prop_assert_eq!(set(back), set(quads));
    }

    #[test]
    fn serialization_is_a_fixed_point(quads in arb_quads()) {
        for fmt in [Format::NQuads, Format::TriG] {
            let once = serialize(quads.iter(), fmt);
            let back = parse_str(std::str::from_utf8(&once).unwrap(), fmt).unwrap();
            prop_assert_eq!(serialize(back.iter(), fmt), once);
        }
    }

    #[test]
    fn canonical_order_ignores_input_order(quads in arb_quads(), seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut shuffled = quads.clone();
        shuffled.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
        let a: QuadSet = quads.into_iter().collect();
        let b: QuadSet = shuffled.into_iter().collect();
        prop_assert_eq!(
            a.canonical().into_iter().cloned().collect::<Vec<_>>(),
            b.canonical().into_iter().cloned().collect::<Vec<_>>()
        );
    }
}

#[test]
fn generated_nanopubs_survive_both_formats() {
    use rand::SeedableRng;
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let pair = common::snapshot_pair(&mut rng, 40);
    for np in pair.prev.iter().chain(&pair.next) {
        for fmt in [Format::NQuads, Format::TriG] {
            let text = serialize_to_string(np.iter(), fmt);
            let back: Vec<_> = assemble(parse_str(&text, fmt).unwrap().into_iter().map(Ok)).collect::<Result<_, _>>().unwrap();
            assert_eq!(back, vec![np.clone()]);
        }
    }
}
