//! Parse prediction formulas, print them canonically, and inspect errors.

use discourse_probe::prediction::PredictionExpr;
use discourse_probe::{parse_prediction, print_prediction};

fn main() {
    let formulas = [
        "mean(2;shuffled) > mean(2;original)",
        "mean(*;distractor) > mean(*;target)",
        "sum(1,3;b) < sum(1,3;a) & mean(2;b) > mean(2;a) | mean(*;c) > mean(*;a)",
    ];
    for f in formulas {
        let expr = parse_prediction(f).unwrap();
        println!("{f}\n  -> {}", print_prediction(&expr));
        // `&` binds tighter than `|`.
        if let PredictionExpr::Or(lhs, _) = &expr {
            assert!(matches!(**lhs, PredictionExpr::And(..)));
        }
        let conditions: Vec<&str> = expr.aggregates().iter().map(|a| a.condition.as_str()).collect();
        println!("  conditions: {conditions:?}");
    }

    for bad in ["mean(2;a) >", "mean(2 a) > mean(2;b)", "median(1;a) > mean(1;b)", "mean(0;a) > mean(1;b)"] {
        let err = parse_prediction(bad).unwrap_err();
        println!("{bad:?}: {err}");
    }
}
