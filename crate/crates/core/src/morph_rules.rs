//! Language-specific morphological rules.
//!
//! Rules are plain string transforms kept as data tables, one table per
//! language. Inflectional rules generate ATTRACT candidates; negating
//! prefixes and suffix swaps generate REPEL candidates.
//!
//! All character-level operations (stripping, ending tests, umlaut
//! replacement) work on Unicode scalar values.
//!
//! Rule tables can be exported to and imported from a line-oriented text
//! format, one rule per line with tab-separated fields:
//!
//! ```text
//! language        de
//! suffix-group-cross-product      en      2       e,st,t,te,test,tet,ten,ge+t     ten
//! repel-prefix    -       0       un,nicht,anti,ir,in,miss
//! repel-suffix-swap       voll    4       los
//! ```
//!
//! Fields are kind, trigger (`-` for none), strip count, comma-separated
//! variants and an optional excluded ending. A variant `ge+t` means prefix
//! `ge` and suffix `t` around the stem. Lines starting with `#` are ignored.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Language {
    En,
    De,
    It,
    Ru,
}

impl Language {
    pub const ALL: [Language; 4] = [Language::En, Language::De, Language::It, Language::Ru];

    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::De => "de",
            Language::It => "it",
            Language::Ru => "ru",
        }
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "en" => Ok(Language::En),
            "de" => Ok(Language::De),
            "it" => Ok(Language::It),
            "ru" => Ok(Language::Ru),
            _ => Err(Error::UnsupportedLanguage(s.to_string())),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleKind {
    /// `w + suffix` for each variant.
    AppendSuffixes,
    /// `w[:-strip] + suffix` for each variant.
    StripThenAppend,
    /// Generate `{w} ∪ {prefix + w[:-strip] + suffix}` and pair every two
    /// distinct members.
    SuffixGroup,
    /// Replace the last `a`/`o`/`u` with its umlaut, then append each variant.
    UmlautPlural,
}

impl RuleKind {
    pub fn name(self) -> &'static str {
        match self {
            RuleKind::AppendSuffixes => "append-suffixes",
            RuleKind::StripThenAppend => "strip-then-append",
            RuleKind::SuffixGroup => "suffix-group-cross-product",
            RuleKind::UmlautPlural => "umlaut-plural",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "append-suffixes" => Some(RuleKind::AppendSuffixes),
            "strip-then-append" => Some(RuleKind::StripThenAppend),
            "suffix-group-cross-product" => Some(RuleKind::SuffixGroup),
            "umlaut-plural" => Some(RuleKind::UmlautPlural),
            _ => None,
        }
    }
}

/// A prefix/suffix pair wrapped around a stem.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Affix {
    pub prefix: String,
    pub suffix: String,
}

impl Affix {
    pub fn suffix(s: &str) -> Self {
        Affix {
            prefix: String::new(),
            suffix: s.to_string(),
        }
    }

    fn wrap(&self, stem: &str) -> String {
        let mut out = String::with_capacity(self.prefix.len() + stem.len() + self.suffix.len());
        out.push_str(&self.prefix);
        out.push_str(stem);
        out.push_str(&self.suffix);
        out
    }
}

impl fmt::Display for Affix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prefix.is_empty() {
            f.write_str(&self.suffix)
        } else {
            write!(f, "{}+{}", self.prefix, self.suffix)
        }
    }
}

impl FromStr for Affix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('+') {
            Some((prefix, suffix)) if !suffix.contains('+') => Ok(Affix {
                prefix: prefix.to_string(),
                suffix: suffix.to_string(),
            }),
            Some(_) => Err(Error::Rule(format!("malformed variant '{s}'"))),
            None => Ok(Affix::suffix(s)),
        }
    }
}

/// One inflectional rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphRule {
    pub kind: RuleKind,
    /// Required word ending; empty matches every word.
    pub trigger: String,
    /// Ending that blocks the rule even when `trigger` matches.
    pub unless: Option<String>,
    /// Number of trailing characters removed to form the stem.
    pub strip: usize,
    pub variants: Vec<Affix>,
}

impl MorphRule {
    pub fn new(kind: RuleKind, trigger: &str, strip: usize, variants: &[&str]) -> Self {
        MorphRule {
            kind,
            trigger: trigger.to_string(),
            unless: None,
            strip,
            variants: variants
                .iter()
                .map(|v| v.parse().expect("builtin variant"))
                .collect(),
        }
    }

    fn unless(mut self, ending: &str) -> Self {
        self.unless = Some(ending.to_string());
        self
    }

    pub fn validate(&self) -> Result<()> {
        let trigger_len = self.trigger.chars().count();
        if !self.trigger.is_empty() && self.strip > trigger_len {
            return Err(Error::Rule(format!(
                "strip {} exceeds trigger '{}'",
                self.strip, self.trigger
            )));
        }
        if self.trigger.is_empty() && self.strip > 0 {
            return Err(Error::Rule("strip requires a trigger".into()));
        }
        if self.kind == RuleKind::AppendSuffixes && self.strip != 0 {
            return Err(Error::Rule("append-suffixes cannot strip".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::Rule(format!(
                "{} rule without variants",
                self.kind.name()
            )));
        }
        Ok(())
    }

    /// Whether the rule fires on `word`. The stem left after stripping must
    /// be nonempty.
    pub fn matches(&self, word: &str) -> bool {
        word.ends_with(self.trigger.as_str())
            && self.unless.as_deref().is_none_or(|u| !word.ends_with(u))
            && word.chars().count() > self.strip
    }

    /// Candidate partners of `word`, in variant order, without duplicates and
    /// never containing `word` itself.
    pub fn apply(&self, word: &str) -> Vec<String> {
        if !self.matches(word) {
            return Vec::new();
        }
        let stem = strip_chars(word, self.strip);
        let base = match self.kind {
            RuleKind::UmlautPlural => match umlaut_last(stem) {
                Some(s) => s,
                None => return Vec::new(),
            },
            _ => stem.to_string(),
        };
        let mut out: Vec<String> = Vec::with_capacity(self.variants.len());
        for affix in &self.variants {
            let candidate = affix.wrap(&base);
            if candidate != word && !out.contains(&candidate) {
                out.push(candidate);
            }
        }
        out
    }

    fn to_line(&self) -> String {
        let variants: Vec<String> = self.variants.iter().map(ToString::to_string).collect();
        let mut line = format!(
            "{}\t{}\t{}\t{}",
            self.kind.name(),
            field_or_dash(&self.trigger),
            self.strip,
            variants.join(",")
        );
        if let Some(u) = &self.unless {
            line.push('\t');
            line.push_str(u);
        }
        line
    }
}

/// Candidate partners of `word` under `rule`.
pub fn apply_rule(rule: &MorphRule, word: &str) -> Vec<String> {
    rule.apply(word)
}

/// `word` with the last `n` characters removed.
pub fn strip_chars(word: &str, n: usize) -> &str {
    if n == 0 {
        return word;
    }
    match word.char_indices().rev().nth(n - 1) {
        Some((idx, _)) => &word[..idx],
        None => "",
    }
}

/// Replace the last occurrence of `a`, `o` or `u` with `ä`, `ö` or `ü`.
pub fn umlaut_last(word: &str) -> Option<String> {
    let (idx, c) = word
        .char_indices()
        .rev()
        .find(|(_, c)| matches!(c, 'a' | 'o' | 'u'))?;
    let replacement = match c {
        'a' => 'ä',
        'o' => 'ö',
        _ => 'ü',
    };
    let mut out = String::with_capacity(word.len() + 1);
    out.push_str(&word[..idx]);
    out.push(replacement);
    out.push_str(&word[idx + c.len_utf8()..]);
    Some(out)
}

fn field_or_dash(s: &str) -> &str {
    if s.is_empty() {
        "-"
    } else {
        s
    }
}

/// The complete rule table for one language.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSet {
    pub language: String,
    pub attract_rules: Vec<MorphRule>,
    pub repel_prefixes: Vec<String>,
    /// `(from, to)`: a word ending in `from` is paired with the same word
    /// ending in `to`.
    pub repel_suffix_swaps: Vec<(String, String)>,
}

impl RuleSet {
    pub fn builtin(language: Language) -> Self {
        match language {
            Language::En => english(),
            Language::De => german(),
            Language::It => italian(),
            Language::Ru => russian(),
        }
    }

    /// Antonym candidates: every prefix prepended, then every applicable
    /// suffix swap.
    pub fn antonym_candidates(&self, word: &str) -> Vec<String> {
        let mut out = Vec::new();
        for prefix in &self.repel_prefixes {
            let candidate = format!("{prefix}{word}");
            if candidate != word && !out.contains(&candidate) {
                out.push(candidate);
            }
        }
        for (from, to) in &self.repel_suffix_swaps {
            if let Some(stem) = word.strip_suffix(from.as_str()) {
                if stem.is_empty() {
                    continue;
                }
                let candidate = format!("{stem}{to}");
                if candidate != word && !out.contains(&candidate) {
                    out.push(candidate);
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        for rule in &self.attract_rules {
            rule.validate()?;
        }
        if self.repel_prefixes.is_empty() {
            return Err(Error::Rule(format!(
                "rule set '{}' has no repel prefixes",
                self.language
            )));
        }
        if self.repel_prefixes.iter().any(String::is_empty) {
            return Err(Error::Rule("empty repel prefix".into()));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("language\t{}\n", self.language);
        for rule in &self.attract_rules {
            out.push_str(&rule.to_line());
            out.push('\n');
        }
        out.push_str(&format!(
            "repel-prefix\t-\t0\t{}\n",
            self.repel_prefixes.join(",")
        ));
        for (from, to) in &self.repel_suffix_swaps {
            out.push_str(&format!(
                "repel-suffix-swap\t{from}\t{}\t{to}\n",
                from.chars().count()
            ));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut set = RuleSet {
            language: String::new(),
            attract_rules: Vec::new(),
            repel_prefixes: Vec::new(),
            repel_suffix_swaps: Vec::new(),
        };
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let bad = |msg: &str| Error::Rule(format!("line {lineno}: {msg}"));
            if fields[0] == "language" {
                let code = fields.get(1).ok_or_else(|| bad("missing language code"))?;
                set.language = code.trim().to_string();
                continue;
            }
            if fields.len() < 4 || fields.len() > 5 {
                return Err(bad("expected 4 or 5 tab-separated fields"));
            }
            let trigger = if fields[1] == "-" { "" } else { fields[1] };
            let strip: usize = fields[2]
                .parse()
                .map_err(|_| bad(&format!("invalid strip count '{}'", fields[2])))?;
            let variants: Vec<&str> = fields[3].split(',').filter(|v| !v.is_empty()).collect();
            match fields[0] {
                "repel-prefix" => {
                    set.repel_prefixes
                        .extend(variants.iter().map(|v| v.to_string()));
                }
                "repel-suffix-swap" => {
                    if trigger.is_empty() || variants.len() != 1 {
                        return Err(bad("suffix swap needs one trigger and one replacement"));
                    }
                    set.repel_suffix_swaps
                        .push((trigger.to_string(), variants[0].to_string()));
                }
                name => {
                    let kind = RuleKind::from_name(name)
                        .ok_or_else(|| bad(&format!("unknown rule kind '{name}'")))?;
                    let rule = MorphRule {
                        kind,
                        trigger: trigger.to_string(),
                        unless: fields
                            .get(4)
                            .filter(|u| !u.is_empty())
                            .map(|u| u.to_string()),
                        strip,
                        variants: variants
                            .iter()
                            .map(|v| v.parse())
                            .collect::<Result<Vec<Affix>>>()?,
                    };
                    rule.validate().map_err(|e| bad(&e.to_string()))?;
                    set.attract_rules.push(rule);
                }
            }
        }
        if set.language.is_empty() {
            return Err(Error::Rule("missing 'language' line".into()));
        }
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// The built-in rule table for a language code (`en`, `de`, `it`, `ru`).
pub fn builtin_rules(language: &str) -> Result<RuleSet> {
    Ok(RuleSet::builtin(language.parse()?))
}

pub fn antonym_candidates(ruleset: &RuleSet, word: &str) -> Vec<String> {
    ruleset.antonym_candidates(word)
}

use RuleKind::{AppendSuffixes as Append, StripThenAppend as StripAppend, SuffixGroup as Group};

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn english() -> RuleSet {
    RuleSet {
        language: "en".into(),
        attract_rules: vec![
            MorphRule::new(Append, "", 0, &["s", "ed", "ing"]),
            MorphRule::new(StripAppend, "e", 1, &["ed", "ing"]),
        ],
        repel_prefixes: strings(&["dis", "il", "un", "in", "im", "ir", "mis", "non", "anti"]),
        repel_suffix_swaps: vec![("ful".into(), "less".into())],
    }
}

fn german() -> RuleSet {
    let mut rules = vec![
        // declension of nouns and adjectives
        MorphRule::new(Group, "", 0, &["e", "em", "en", "er", "es"]),
        // verbs whose stem ends in -t
        MorphRule::new(
            Group,
            "ten",
            2,
            &["e", "st", "et", "ete", "etest", "etet", "eten", "ge+et"],
        ),
        // all other -en verbs
        MorphRule::new(
            Group,
            "en",
            2,
            &["e", "st", "t", "te", "test", "tet", "ten", "ge+t"],
        )
        .unless("ten"),
    ];
    for ending in ["ei", "heit", "keit", "schaft", "ung"] {
        rules.push(MorphRule::new(Append, ending, 0, &["en"]));
    }
    rules.push(MorphRule::new(Append, "in", 0, &["nen"]));
    for vowel in ["a", "i", "o", "u", "y"] {
        rules.push(MorphRule::new(Append, vowel, 0, &["s"]));
    }
    rules.push(MorphRule::new(Append, "e", 0, &["n"]));
    rules.push(MorphRule::new(RuleKind::UmlautPlural, "", 0, &["er"]));
    RuleSet {
        language: "de".into(),
        attract_rules: rules,
        repel_prefixes: strings(&["un", "nicht", "anti", "ir", "in", "miss"]),
        repel_suffix_swaps: vec![("voll".into(), "los".into())],
    }
}

fn italian() -> RuleSet {
    let mut rules = Vec::new();
    // plural and gender
    for vowel in ["a", "e", "o", "i"] {
        rules.push(MorphRule::new(Group, vowel, 1, &["a", "e", "o", "i"]));
    }
    rules.push(MorphRule::new(StripAppend, "ga", 1, &["he"]));
    rules.push(MorphRule::new(StripAppend, "ca", 1, &["he"]));
    rules.push(MorphRule::new(StripAppend, "go", 1, &["hi"]));
    // conjugation and past participles
    rules.push(MorphRule::new(
        Group,
        "are",
        3,
        &[
            "iamo", "ate", "ano", "o", "i", "a", "ato", "ata", "ati", "ate",
        ],
    ));
    rules.push(MorphRule::new(
        Group,
        "ere",
        3,
        &[
            "iamo", "ete", "ono", "o", "i", "e", "uto", "uta", "uti", "ute",
        ],
    ));
    rules.push(MorphRule::new(
        Group,
        "ire",
        3,
        &[
            "iamo", "ite", "ono", "o", "i", "e", "ito", "ita", "iti", "ite",
        ],
    ));
    RuleSet {
        language: "it".into(),
        attract_rules: rules,
        repel_prefixes: strings(&["in", "ir", "im", "anti"]),
        repel_suffix_swaps: Vec::new(),
    }
}

fn russian() -> RuleSet {
    let mut rules = vec![MorphRule::new(Append, "", 0, &["и", "ы"])];
    // plural
    for ending in ["а", "я", "ь"] {
        rules.push(MorphRule::new(StripAppend, ending, 1, &["и", "ы"]));
    }
    rules.push(MorphRule::new(StripAppend, "о", 1, &["а"]));
    rules.push(MorphRule::new(StripAppend, "е", 1, &["я"]));
    // conjugation and participles
    let verb = [
        "у", "ю", "ешь", "ишь", "ет", "ит", "ем", "им", "ете", "ите", "ут", "ют", "ат", "ят",
        "нный", "нная",
    ];
    rules.push(MorphRule::new(Group, "ти", 2, &verb));
    rules.push(MorphRule::new(Group, "ть", 2, &verb));
    // -ить verbs: the same endings attach after dropping the -и- as well
    rules.push(MorphRule::new(Group, "ить", 3, &verb));
    // declension
    rules.push(MorphRule::new(Group, "а", 1, &["е", "у", "ой"]));
    rules.push(MorphRule::new(Group, "я", 1, &["е", "ю", "ей"]));
    rules.push(MorphRule::new(Group, "ы", 1, &["ам", "ами", "ах"]));
    rules.push(MorphRule::new(Group, "и", 1, &["ь", "ям", "ями", "ях"]));
    // adjective comparison and gender
    for ending in ["ый", "ой", "ий"] {
        rules.push(MorphRule::new(StripAppend, ending, 2, &["ь", "ее", "ые"]));
    }
    rules.push(MorphRule::new(StripAppend, "ая", 2, &["ее", "ые", "ый"]));
    rules.push(MorphRule::new(StripAppend, "ое", 2, &["ый", "ые", "ая"]));
    RuleSet {
        language: "ru".into(),
        attract_rules: rules,
        repel_prefixes: strings(&["не", "анти"]),
        repel_suffix_swaps: Vec::new(),
    }
}
