//! Bundled vocabularies and prompt data for the mock world.

pub const PLACES: &str = include_str!("../data/places.txt");
pub const OBJECTS: &str = include_str!("../data/objects.txt");
pub const MOCK_WORLD: &str = include_str!("../data/mock_world.json");
pub const MOCK_RULES: &str = include_str!("../data/mock_rules.json");
pub const MOCK_RULES_WEAK: &str = include_str!("../data/mock_rules_weak.json");
pub const ROUTING_FEW_SHOT: &str = include_str!("../data/routing_few_shot.txt");
pub const ENTITY_FEW_SHOT: &str = include_str!("../data/entity_few_shot.txt");

pub const IMAGE_TYPES: [&str; 4] = ["photo", "cartoon", "sketch", "painting"];

pub const PEOPLE_COUNTS: [&str; 6] = [
    "are no people",
    "is one person",
    "are two people",
    "are three people",
    "are several people",
    "are many people",
];

/// One label per line; blank lines and `#` comments skipped.
pub fn parse_label_lines(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_vocabularies_have_expected_sizes() {
        assert_eq!(parse_label_lines(PLACES).len(), 365);
        assert_eq!(parse_label_lines(OBJECTS).len(), 600);
    }

    #[test]
    fn comments_and_blanks_skipped() {
        assert_eq!(parse_label_lines("# x\n\n a \nb\n"), vec!["a", "b"]);
    }
}
