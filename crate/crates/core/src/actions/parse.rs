use std::ops::Range;

use super::ActionError;

/// Design idea and code extracted from one model response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedGeneration {
    pub description_draft: String,
    pub code: String,
}

const FENCE: &str = "```";

/// Splits a response into its brace-enclosed idea and its code.
///
/// Code is the body of the first ``` fence, or, without fences, the longest
/// block of lines opened by a `def` line. The idea is the first balanced `{...}`
/// group outside that code; without one, the prose outside the code is used.
pub fn parse_generation(llm_text: &str, function_name: &str) -> Result<ParsedGeneration, ActionError> {
    let (code, code_span) = match first_fence(llm_text) {
        Some((body, span)) => (body, span),
        None => longest_def_block(llm_text).ok_or(ActionError::NoCode)?,
    };
    let code = code.trim_matches('\n').trim_end().to_string();
    if code.trim().is_empty() {
        return Err(ActionError::NoCode);
    }
    if !defines_function(&code, function_name) {
        return Err(ActionError::NoFunctionName(function_name.to_string()));
    }
    let outside = mask_range(llm_text, &code_span);
    let description_draft = match first_brace_group(&outside) {
        Some(idea) if !idea.trim().is_empty() => normalize_space(idea),
        _ => normalize_space(&outside.replace(FENCE, " ")),
    };
    if description_draft.is_empty() {
        return Err(ActionError::NoDescription);
    }
    Ok(ParsedGeneration { description_draft, code })
}

/// Body of the first fenced block (language tag dropped) and the byte span of
/// the whole fence. An unterminated fence runs to the end of the text.
fn first_fence(text: &str) -> Option<(&str, Range<usize>)> {
    let open = text.find(FENCE)?;
    let after_tag = match text[open + FENCE.len()..].find('\n') {
        Some(nl) => open + FENCE.len() + nl + 1,
        None => return None,
    };
    match text[after_tag..].find(FENCE) {
        Some(close) => Some((&text[after_tag..after_tag + close], open..after_tag + close + FENCE.len())),
        None => Some((&text[after_tag..], open..text.len())),
    }
}

/// Longest run of lines that starts at an unindented `def` line and continues
/// through blank, indented or further `def` lines.
fn longest_def_block(text: &str) -> Option<(&str, Range<usize>)> {
    let mut best: Option<Range<usize>> = None;
    let mut offset = 0;
    let lines: Vec<(usize, &str)> = text
        .split_inclusive('\n')
        .map(|l| {
            let start = offset;
            offset += l.len();
            (start, l)
        })
        .collect();
    let mut i = 0;
    while i < lines.len() {
        if !lines[i].1.starts_with("def ") {
            i += 1;
            continue;
        }
        let start = lines[i].0;
        let mut end = start + lines[i].1.len();
        let mut j = i + 1;
        while j < lines.len() {
            let l = lines[j].1;
            let continues = l.trim().is_empty() || l.starts_with(' ') || l.starts_with('\t') || l.starts_with("def ");
            if !continues {
                break;
            }
            if !l.trim().is_empty() {
                end = lines[j].0 + l.len();
            }
            j += 1;
        }
        if best.as_ref().is_none_or(|b| end - start > b.len()) {
            best = Some(start..end);
        }
        i = j;
    }
    best.map(|r| (&text[r.clone()], r))
}

fn defines_function(code: &str, name: &str) -> bool {
    code.lines().any(|line| {
        let Some(rest) = line.trim_start().strip_prefix("def ") else {
            return false;
        };
        let rest = rest.trim_start();
        rest.strip_prefix(name).is_some_and(|tail| tail.trim_start().starts_with('('))
    })
}

fn mask_range(text: &str, span: &Range<usize>) -> String {
    let mut out = String::with_capacity(text.len());
    out.push_str(&text[..span.start]);
    out.push('\n');
    out.push_str(&text[span.end..]);
    out
}

/// Content of the first balanced `{...}` group, nested braces included.
fn first_brace_group(text: &str) -> Option<&str> {
    let mut depth = 0usize;
    let mut start = None;
    for (i, ch) in text.char_indices() {
        match ch {
            '{' => {
                if depth == 0 {
                    start = Some(i + 1);
                }
                depth += 1;
            }
            '}' if depth > 0 => {
                depth -= 1;
                if depth == 0 {
                    return start.map(|s| &text[s..i]);
                }
            }
            _ => {}
        }
    }
    None
}

fn normalize_space(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
