use credal::io::{load_model, parse_json_document, parse_network_file, NetworkDocument};
use credal::random::{random_instance, RandomConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn generated(seed: u64) -> NetworkDocument {
    let inst = random_instance(&RandomConfig::default(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    NetworkDocument::from_network(&inst.net, &inst.specs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        let doc = generated(seed);
        let text = doc.to_text();
        let back = parse_network_file(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(back.to_text(), text);
        let json = serde_json::to_string(&doc).unwrap();
        prop_assert_eq!(parse_json_document(&json).unwrap(), doc);
    }

    #[test]
    fn arbitrary_text_never_panics(text in "[a-z0-9 {}:;,=.#\n-]{0,200}") {
        let _ = load_model(&text);
    }

    #[test]
    fn damaged_files_are_rejected_with_a_position(seed in any::<u64>(), cut in 0usize..400) {
        let text = generated(seed).to_text();
        let cut = cut.min(text.len());
        let damaged = format!("{}{{ ;", &text[..cut]);
        let e = parse_network_file(&damaged).unwrap_err();
        prop_assert!(e.position.line >= 1 && e.position.column >= 1);
        prop_assert!(!e.message.is_empty());
    }
}

#[test]
fn generated_documents_rebuild_the_same_bounds() {
    use credal::ccm::apply_ccm;
    use credal::type1::bounds_by_enumeration;
    for seed in 0..20 {
        let inst = random_instance(&RandomConfig::default(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let model = load_model(&NetworkDocument::from_network(&inst.net, &inst.specs).to_text()).unwrap();
        let a = bounds_by_enumeration(&apply_ccm(&inst.net, &inst.specs).unwrap(), &inst.query).unwrap();
        let b = bounds_by_enumeration(&model.transform().unwrap(), &inst.query).unwrap();
        assert!((a.lower - b.lower).abs() < 1e-12 && (a.upper - b.upper).abs() < 1e-12);
    }
}
