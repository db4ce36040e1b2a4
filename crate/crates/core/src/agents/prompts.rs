//! Prompt templates and response clean-up.

pub const ACTOR_SYSTEM: &str = include_str!("../../prompts/actor_system.txt");
pub const ACTOR: &str = include_str!("../../prompts/actor.txt");
pub const CRITIC_SYSTEM: &str = include_str!("../../prompts/critic_system.txt");
pub const CRITIC: &str = include_str!("../../prompts/critic.txt");
pub const TRANSLATOR_SYSTEM: &str = include_str!("../../prompts/translator_system.txt");
pub const TRANSLATOR: &str = include_str!("../../prompts/translator.txt");

/// Markers that tell the three prompt kinds apart.
pub const ACTOR_MARKER: &str = "## Task: design a predicate system";
pub const CRITIC_MARKER: &str = "## Task: review a predicate system";
pub const TRANSLATOR_MARKER: &str = "## Task: translate samples into facts";

/// Substitutes `{name}` slots. Unknown slots are left alone.
pub fn fill(template: &str, slots: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (name, value) in slots {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    out
}

/// The contents of fenced code blocks, or the whole text when there are
/// none.
pub fn strip_fences(text: &str) -> String {
    let mut blocks = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in text.lines() {
        if line.trim_start().starts_with("```") {
            match current.take() {
                Some(lines) => blocks.push(lines.join("\n")),
                None => current = Some(Vec::new()),
            }
        } else if let Some(lines) = current.as_mut() {
            lines.push(line);
        }
    }
    if let Some(lines) = current {
        // Unterminated fence: keep what was there.
        blocks.push(lines.join("\n"));
    }
    if blocks.is_empty() {
        text.trim().to_string()
    } else {
        blocks.join("\n")
    }
}

/// Lowercase identifier for a sample id: non-alphanumerics become `_`, and
/// a leading digit or underscore gets an `s_` prefix.
pub fn slugify(id: &str) -> String {
    let mut s: String = id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect();
    if !s.starts_with(|c: char| c.is_ascii_lowercase()) {
        s = format!("s_{s}");
    }
    s
}
