//! Compact form, prompt rendering, plan text and token accounting.

mod compact;
mod prompt;

pub use compact::{
    find_matching_parens, parse_compact, to_compact, CompactAtom, CompactError, CompactForm,
    CompactSegment, UnbalancedParens,
};
pub use prompt::{
    render_prompt, PromptError, PromptExample, PromptMode, PromptTemplate, FEW_SHOT_INSTRUCTION,
    ZERO_SHOT_INSTRUCTION,
};

const PUNCT: [char; 5] = ['(', ')', ':', '?', ','];

/// Splits on whitespace, with `( ) : ? ,` as tokens of their own.
pub fn tokenize(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let mut start = 0;
        for (i, c) in word.char_indices() {
            if PUNCT.contains(&c) {
                if start < i {
                    out.push(&word[start..i]);
                }
                out.push(&word[i..i + 1]);
                start = i + 1;
            }
        }
        if start < word.len() {
            out.push(&word[start..]);
        }
    }
    out
}

pub fn token_count(text: &str) -> usize {
    tokenize(text).len()
}

/// Splits model output into action names. Never fails: malformed items are
/// kept for the validator to reject.
pub fn parse_plan_text(text: &str) -> Vec<String> {
    let trimmed = text.trim_start();
    let body = match trimmed.get(..5) {
        Some(label) if label.eq_ignore_ascii_case("plan:") => &trimmed[5..],
        _ => trimmed,
    };
    body.split([',', '\n'])
        .map(|item| {
            let mut s = item.trim();
            while let Some(inner) = s.strip_prefix('(').and_then(|x| x.strip_suffix(')')) {
                s = inner.trim();
            }
            s.split_whitespace()
                .collect::<Vec<_>>()
                .join(" ")
                .to_lowercase()
        })
        .filter(|s| !s.is_empty())
        .collect()
}

/// Renders a plan as one comma-separated line.
pub fn format_plan(plan: &[String]) -> String {
    plan.join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_rule() {
        assert_eq!(token_count(""), 0);
        assert_eq!(tokenize("(at c1 l1)"), ["(", "at", "c1", "l1", ")"]);
        assert_eq!(
            tokenize("(:init ?x,y)"),
            ["(", ":", "init", "?", "x", ",", "y", ")"]
        );
        assert_eq!(token_count("  a\n\tb "), 2);
    }

    #[test]
    fn plan_text_parsing() {
        assert_eq!(
            parse_plan_text("pick-up b1, stack b1 b2"),
            ["pick-up b1", "stack b1 b2"]
        );
        assert_eq!(parse_plan_text("Plan:\n(sail l1 l2)"), ["sail l1 l2"]);
        assert!(parse_plan_text("").is_empty());
        assert_eq!(
            parse_plan_text("(Board  C1 L1)\n\n, ,debark c1 l2"),
            ["board c1 l1", "debark c1 l2"]
        );
        assert_eq!(parse_plan_text("plan"), ["plan"]);
    }

    #[test]
    fn plan_round_trip() {
        let plan = vec!["pick-up b1".to_string(), "stack b1 b2".to_string()];
        assert_eq!(parse_plan_text(&format_plan(&plan)), plan);
    }
}
