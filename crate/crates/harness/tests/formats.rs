use mpg_harness::catalog::{g3, gz};
use mpg_harness::format::{parse_game_document, to_json, GameDocument, PolicyDocument};
use proptest::prelude::*;

fn decimal() -> impl Strategy<Value = f64> {
    (1u64..1_000_000_000_000_000, -20i32..20, any::<bool>()).prop_map(|(m, e, neg)| {
        let text = format!("{}{m}e{e}", if neg { "-" } else { "" });
        text.parse().unwrap()
    })
}

proptest! {
    #[test]
    fn payoffs_roundtrip_bit_for_bit(values in proptest::collection::vec(decimal(), 4..=4), discount in decimal()) {
        let mut doc = GameDocument::from_potential(&gz());
        doc.game.payoff[0][0] = values.clone();
        doc.game.discount = discount.abs();
        let back = parse_game_document(&to_json(&doc)).unwrap();
        for (a, b) in back.game.payoff[0][0].iter().zip(&values) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!(back.game.discount.to_bits(), discount.abs().to_bits());
    }

    #[test]
    fn policies_roundtrip_bit_for_bit(p in 0.0f64..1.0) {
        let doc = PolicyDocument { policy: vec![vec![vec![p, 1.0 - p]]] };
        let back: PolicyDocument = serde_json::from_str(&to_json(&doc)).unwrap();
        prop_assert_eq!(back, doc);
    }
}

#[test]
fn random_catalog_game_roundtrips_exactly() {
    let spec = g3(5);
    let text = to_json(&GameDocument::from_potential(&spec));
    let back = parse_game_document(&text)
        .unwrap()
        .into_potential()
        .unwrap();
    assert_eq!(back, spec);
    assert_eq!(to_json(&GameDocument::from_potential(&back)), text);
}

#[test]
fn malformed_documents_are_rejected() {
    let mut doc = GameDocument::from_potential(&gz());
    doc.game.transition[0][1] = vec![0.5];
    assert!(parse_game_document(&to_json(&doc))
        .unwrap()
        .into_potential()
        .is_err());
    assert!(parse_game_document("{\"num_players\": 2}").is_err());
    let text =
        to_json(&GameDocument::from_potential(&gz())).replace("single_state_potential", "zero_sum");
    assert!(parse_game_document(&text).is_err());
}
