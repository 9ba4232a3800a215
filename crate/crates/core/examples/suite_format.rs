//! Build a suite in code, write it in canonical form, and read it back.

use std::collections::BTreeMap;

use discourse_probe::suite::SuiteError;
use discourse_probe::{parse_prediction, parse_suite, serialize_suite, Condition, Item, Phenomenon, TestSuite};

fn main() {
    let items = vec![
        Item {
            item_number: 2,
            tags: BTreeMap::from([("attractor".to_string(), "plural".to_string())]),
            conditions: vec![
                Condition::from_contents("grammatical", ["The keys to the cabinet", "are", "on the table"]),
                Condition::from_contents("ungrammatical", ["The keys to the cabinet", "is", "on the table"]),
            ],
        },
        Item {
            item_number: 1,
            tags: BTreeMap::new(),
            conditions: vec![
                Condition::from_contents("grammatical", ["The woman", "plays", "the guitar"]),
                Condition::from_contents("ungrammatical", ["The woman", "play", "the guitar"]),
            ],
        },
    ];
    let suite = TestSuite::new(
        "agreement",
        Phenomenon::Custom,
        BTreeMap::from([(1, "subject".into()), (2, "verb".into()), (3, "object".into())]),
        vec![parse_prediction("mean(2;ungrammatical) > mean(2;grammatical)").unwrap()],
        items,
    )
    .expect("valid suite");

    // Items come out sorted by number, keys in a fixed order.
    let text = serialize_suite(&suite);
    println!("{text}");
    assert_eq!(parse_suite(&text).unwrap(), suite);

    // Every condition of an item must cover the same regions.
    let mut broken = suite.clone();
    broken.items[0].conditions[1].regions.pop();
    match parse_suite(&serialize_suite(&broken)) {
        Err(e @ SuiteError::InconsistentConditions { .. }) => println!("rejected: {e}"),
        other => panic!("expected a consistency error, got {other:?}"),
    }

    // Type errors carry the JSON path.
    let bad = text.replacen("\"region_number\": 1", "\"region_number\": \"one\"", 1);
    println!("rejected: {}", parse_suite(&bad).unwrap_err());
}
