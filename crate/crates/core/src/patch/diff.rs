//! Unified diffs between two versions of a source file.

pub const CONTEXT: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatchError {
    #[error("malformed diff: {0}")]
    Malformed(String),
    #[error("hunk does not match the original: {0}")]
    HunkMismatch(String),
}

/// Unified diff with three lines of context; empty when the texts agree.
pub fn unified_diff(original: &str, patched: &str, path: &str) -> String {
    if original == patched {
        return String::new();
    }
    diffy::DiffOptions::new()
        .set_context_len(CONTEXT)
        .set_original_filename(path.to_string())
        .set_modified_filename(path.to_string())
        .create_patch(original, patched)
        .to_string()
}

/// Applies a diff produced by [`unified_diff`] to `original`. Trailing
/// `# ...` comment lines are ignored.
pub fn apply_patch(original: &str, diff: &str) -> Result<String, PatchError> {
    let body = strip_trailer(diff);
    if body.trim().is_empty() {
        return Ok(original.to_string());
    }
    let patch = diffy::Patch::from_str(&body).map_err(|e| PatchError::Malformed(e.to_string()))?;
    diffy::apply(original, &patch).map_err(|e| PatchError::HunkMismatch(e.to_string()))
}

/// The diff without the comment trailer written after it.
pub fn strip_trailer(diff: &str) -> String {
    let mut lines: Vec<&str> = diff.split_inclusive('\n').collect();
    while lines.last().is_some_and(|l| l.starts_with("# ")) {
        lines.pop();
    }
    lines.concat()
}

/// Number of `@@` hunks in a diff.
pub fn hunk_count(diff: &str) -> usize {
    diff.lines().filter(|l| l.starts_with("@@")).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_empty() {
        assert_eq!(unified_diff("a\nb\n", "a\nb\n", "x.mj"), "");
    }

    #[test]
    fn single_insert() {
        let d = unified_diff("a\nb\n", "a\nc\nb\n", "x.mj");
        assert_eq!(hunk_count(&d), 1);
        assert_eq!(d.lines().filter(|l| l.starts_with('+') && !l.starts_with("+++")).count(), 1);
        assert!(d.starts_with("--- x.mj\n+++ x.mj\n"), "{d}");
    }

    #[test]
    fn trailer_ignored() {
        let a = "one\ntwo\nthree\n";
        let b = "one\n2\nthree\n";
        let d = format!("{}# verdict: Pass\n", unified_diff(a, b, "x.mj"));
        assert_eq!(apply_patch(a, &d).unwrap(), b);
    }

    #[test]
    fn mismatch_detected() {
        let d = unified_diff("a\nb\nc\n", "a\nB\nc\n", "x.mj");
        assert!(matches!(apply_patch("q\nr\ns\n", &d), Err(PatchError::HunkMismatch(_))));
    }
}
