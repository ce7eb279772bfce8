//! Rule-based inflectional lemmatizer (plural, `-ed`, `-ing`).

const IRREGULAR: &[(&str, &str)] = &[
    ("children", "child"),
    ("men", "man"),
    ("women", "woman"),
    ("people", "person"),
    ("mice", "mouse"),
    ("feet", "foot"),
    ("teeth", "tooth"),
    ("analyses", "analysis"),
    ("hypotheses", "hypothesis"),
    ("theses", "thesis"),
    ("criteria", "criterion"),
    ("phenomena", "phenomenon"),
    ("indices", "index"),
    ("matrices", "matrix"),
    ("vertices", "vertex"),
    ("used", "use"),
    ("uses", "use"),
    ("using", "use"),
    ("wrote", "write"),
    ("written", "write"),
    ("was", "be"),
    ("were", "be"),
    ("has", "have"),
    ("had", "have"),
];

/// Words that look inflected but are not.
const INVARIANT: &[&str] = &[
    "series", "species", "news", "physics", "mathematics", "economics", "linguistics",
    "genetics", "statistics", "ethics", "robotics", "bioinformatics", "semantics", "thing",
    "string", "during", "embedded", "need", "speed", "seed", "feed", "bed", "red",
];

fn is_vowel_at(w: &[u8], i: usize) -> bool {
    match w[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => true,
        b'y' => i > 0 && !is_vowel_at(w, i - 1),
        _ => false,
    }
}

fn has_vowel(w: &[u8]) -> bool {
    (0..w.len()).any(|i| is_vowel_at(w, i))
}

/// Porter measure: number of vowel-consonant sequences.
fn measure(w: &[u8]) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..w.len() {
        let v = is_vowel_at(w, i);
        if prev_vowel && !v {
            m += 1;
        }
        prev_vowel = v;
    }
    m
}

fn ends_cvc(w: &[u8]) -> bool {
    let n = w.len();
    n >= 3
        && !is_vowel_at(w, n - 3)
        && is_vowel_at(w, n - 2)
        && !is_vowel_at(w, n - 1)
        && !matches!(w[n - 1], b'w' | b'x' | b'y')
}

/// Repair a stem left by removing `-ed` or `-ing`.
fn fix_stem(mut stem: String) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if stem.ends_with("at") || stem.ends_with("bl") || stem.ends_with("iz") {
        stem.push('e');
    } else if n >= 2
        && b[n - 1] == b[n - 2]
        && !is_vowel_at(b, n - 1)
        && !matches!(b[n - 1], b'l' | b's' | b'z')
    {
        stem.pop();
    } else if measure(b) == 1 && ends_cvc(b) {
        stem.push('e');
    }
    stem
}

/// Reduce a lowercase token to its lemma.
pub fn lemmatize(token: &str) -> String {
    if let Some((_, lemma)) = IRREGULAR.iter().find(|(w, _)| *w == token) {
        return (*lemma).to_owned();
    }
    if token.len() < 4 || INVARIANT.contains(&token) || !token.bytes().all(|c| c.is_ascii_lowercase()) {
        return token.to_owned();
    }
    let t = token;
    let strip = |n: usize| t[..t.len() - n].to_owned();

    if let Some(stem) = t.strip_suffix("ies") {
        if stem.len() >= 2 {
            return format!("{stem}y");
        }
    }
    if t.ends_with("sses") {
        return strip(2);
    }
    if ["ches", "shes", "xes", "zes"].iter().any(|s| t.ends_with(s)) {
        return strip(2);
    }
    if ["ss", "us", "is", "ics"].iter().any(|s| t.ends_with(s)) {
        return t.to_owned();
    }
    if t.ends_with('s') {
        return strip(1);
    }
    if let Some(stem) = t.strip_suffix("ied") {
        if stem.len() >= 2 {
            return format!("{stem}y");
        }
    }
    if let Some(stem) = t.strip_suffix("eed") {
        return if measure(stem.as_bytes()) > 0 { strip(1) } else { t.to_owned() };
    }
    for suffix in ["ing", "ed"] {
        if let Some(stem) = t.strip_suffix(suffix) {
            if stem.len() >= 2 && has_vowel(stem.as_bytes()) {
                return fix_stem(stem.to_owned());
            }
            return t.to_owned();
        }
    }
    t.to_owned()
}
