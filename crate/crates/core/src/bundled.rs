//! Scenario files shipped with the library.

/// `(file name, contents)` for every bundled scenario and grid.
pub const BUNDLED: &[(&str, &str)] = &[
    ("discount-game.json", include_str!("../scenarios/discount-game.json")),
    ("paper-section3.json", include_str!("../scenarios/paper-section3.json")),
    ("prop1-convergence.json", include_str!("../scenarios/prop1-convergence.json")),
    ("prop10-discount.json", include_str!("../scenarios/prop10-discount.json")),
    ("prop2-trust.json", include_str!("../scenarios/prop2-trust.json")),
    ("prop3-rival-literal.json", include_str!("../scenarios/prop3-rival-literal.json")),
    ("prop4-learnability.json", include_str!("../scenarios/prop4-learnability.json")),
    ("prop5-completeness.json", include_str!("../scenarios/prop5-completeness.json")),
    ("prop6-hierarchical.json", include_str!("../scenarios/prop6-hierarchical.json")),
    ("prop7-hierarchical-blindness.json", include_str!("../scenarios/prop7-hierarchical-blindness.json")),
    ("prop8-acceptance.json", include_str!("../scenarios/prop8-acceptance.json")),
    ("prop9-game.json", include_str!("../scenarios/prop9-game.json")),
    ("prop9-suite.json", include_str!("../scenarios/prop9-suite.json")),
    ("section3-standard.json", include_str!("../scenarios/section3-standard.json")),
    ("sweep-prior-grid.json", include_str!("../scenarios/sweep-prior-grid.json")),
    ("sweep-prior-template.json", include_str!("../scenarios/sweep-prior-template.json")),
];

pub fn get(name: &str) -> Option<&'static str> {
    let wanted = name.strip_suffix(".json").unwrap_or(name);
    BUNDLED.iter().find(|(n, _)| n.strip_suffix(".json") == Some(wanted)).map(|(_, text)| *text)
}

/// Names of the runnable scenarios (grids excluded).
pub fn scenario_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).filter(|n| !n.ends_with("-grid.json")).collect()
}
