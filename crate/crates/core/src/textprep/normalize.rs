use unicode_normalization::UnicodeNormalization;

const TATWEEL: char = '\u{0640}';

pub(crate) fn is_arabic_char(c: char) -> bool {
    matches!(c as u32,
        0x0600..=0x06FF | 0x0750..=0x077F | 0x08A0..=0x08FF | 0xFB50..=0xFDFF | 0xFE70..=0xFEFF)
}

fn is_arabic_diacritic(c: char) -> bool {
    matches!(c as u32, 0x064B..=0x065F | 0x0670 | 0x06D6..=0x06ED)
}

fn fold_char(c: char) -> Option<char> {
    match c {
        TATWEEL => None,
        c if is_arabic_diacritic(c) => None,
        'أ' | 'إ' | 'آ' | 'ٱ' => Some('ا'),
        'ة' => Some('ه'),
        'ى' => Some('ي'),
        '\u{0660}'..='\u{0669}' => char::from_digit(c as u32 - 0x0660, 10),
        '\u{06F0}'..='\u{06F9}' => char::from_digit(c as u32 - 0x06F0, 10),
        c => Some(c),
    }
}

/// NFC, lowercase, Arabic orthographic folding and ASCII digits.
///
/// The language tag is accepted for interface symmetry; folding is decided by
/// script so mixed-script posts normalize consistently.
pub fn normalize(text: &str, _lang: Option<&str>) -> String {
    text.nfc()
        .flat_map(char::to_lowercase)
        .filter_map(fold_char)
        .collect()
}
