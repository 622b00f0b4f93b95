use super::{Diagnostic, Diagnostics};

/// Target-language output policy read from `policy.cfg`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Policy {
    pub inverted_question: bool,
    pub inverted_question_mark: String,
}

impl Default for Policy {
    fn default() -> Self {
        Policy { inverted_question: false, inverted_question_mark: "¿".to_string() }
    }
}

/// `key: value` lines; `;` and `#` start comments.
pub fn load_policy(text: &str) -> Result<Policy, Diagnostics> {
    let mut policy = Policy::default();
    let mut diags = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split([';', '#']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            diags.push(Diagnostic::new(n + 1, format!("expected key: value, found '{}'", line)));
            continue;
        };
        let value = value.trim();
        match key.trim() {
            "inverted-question" => match value {
                "yes" => policy.inverted_question = true,
                "no" => policy.inverted_question = false,
                _ => diags.push(Diagnostic::new(n + 1, format!("inverted-question must be yes or no, found '{}'", value))),
            },
            "inverted-question-mark" if !value.is_empty() => policy.inverted_question_mark = value.to_string(),
            other => diags.push(Diagnostic::new(n + 1, format!("unknown policy key '{}'", other))),
        }
    }
    if diags.is_empty() {
        Ok(policy)
    } else {
        Err(Diagnostics(diags))
    }
}
