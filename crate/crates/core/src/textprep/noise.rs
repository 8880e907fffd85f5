/// True for codepoints in the Unicode emoji and pictograph blocks, plus the
/// joiners and selectors used to build emoji sequences.
pub fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1FAFF   // mahjong .. symbols & pictographs ext-A, incl. flags
        | 0x2600..=0x27BF   // misc symbols, dingbats
        | 0x2300..=0x23FF   // misc technical (watch, hourglass, ...)
        | 0x2B00..=0x2BFF   // arrows, stars
        | 0x2190..=0x21FF   // arrows
        | 0x25A0..=0x25FF   // geometric shapes
        | 0x2100..=0x214F   // letterlike symbols (tm, info)
        | 0x24C2
        | 0x00A9 | 0x00AE
        | 0x3030 | 0x303D | 0x3297 | 0x3299
        | 0x200D            // zero-width joiner
        | 0x20E3            // combining keycap
        | 0xFE00..=0xFE0F   // variation selectors
        | 0xE0020..=0xE007F // tag characters
    )
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Strips URLs, emoji and punctuation. Letters, digits, `_`, apostrophes and
/// hashtag markers survive; whitespace is collapsed and the result trimmed.
pub fn remove_noise(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for run in text.split_whitespace() {
        let run = strip_url(run);
        if run.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        clean_run(run, &mut out);
    }
    collapse_whitespace(&out)
}

/// Cuts a run at the first `scheme://` or `www.` occurrence.
fn strip_url(run: &str) -> &str {
    let mut cut = run.len();
    if let Some(pos) = run.find("://") {
        let scheme_start = run[..pos]
            .char_indices()
            .rev()
            .take_while(|(_, c)| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
            .last()
            .map(|(i, _)| i)
            .unwrap_or(pos);
        cut = cut.min(scheme_start);
    }
    let lower = run.to_ascii_lowercase();
    if let Some(pos) = lower.find("www.") {
        let at_boundary = lower[..pos]
            .chars()
            .next_back()
            .is_none_or(|c| !c.is_alphanumeric());
        if at_boundary {
            cut = cut.min(pos);
        }
    }
    &run[..cut]
}

fn clean_run(run: &str, out: &mut String) {
    let chars: Vec<char> = run.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if is_emoji(c) {
            continue;
        }
        let keep = match c {
            '#' => {
                let starts_word = i == 0 || !is_word_char(chars[i - 1]);
                let next_ok = chars.get(i + 1).is_some_and(|&n| is_word_char(n) && !is_emoji(n));
                starts_word && next_ok
            }
            '\'' | '\u{2019}' => {
                out.push('\'');
                continue;
            }
            c => is_word_char(c),
        };
        if keep {
            out.push(c);
        } else {
            out.push(' ');
        }
    }
}

pub(crate) fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
