//! Parser for the `name:key=value,...` descriptors used on the command line
//! and in config files (`sigma-root:k=2`, `gamma:k=3`, `bubble:scale=1`).
//!
//! Values may be wrapped in `[...]` to nest a descriptor that itself contains
//! commas. A key listed in `greedy` swallows the rest of the string when its
//! value is not bracketed, so `ricci:inner=quotient:k=2,l=1` parses as a
//! single `inner` parameter.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Descriptor {
    pub name: String,
    params: Vec<(String, String)>,
}

impl Descriptor {
    pub fn parse(text: &str, greedy: &[&str]) -> Result<Self> {
        let text = text.trim();
        let (name, rest) = match text.split_once(':') {
            Some((name, rest)) => (name.trim(), Some(rest)),
            None => (text, None),
        };
        if name.is_empty() {
            return Err(Error::parse(text, "missing descriptor name"));
        }
        let mut params = Vec::new();
        if let Some(mut rest) = rest {
            while !rest.trim().is_empty() {
                let (key, after) = rest
                    .split_once('=')
                    .ok_or_else(|| Error::parse(name, format!("expected key=value in `{rest}`")))?;
                let key = key.trim().to_string();
                let after = after.trim_start();
                let (value, remaining) = if let Some(inner) = after.strip_prefix('[') {
                    let close = matching_bracket(inner)
                        .ok_or_else(|| Error::parse(&key, "unbalanced `[`"))?;
                    let value = &inner[..close];
                    let tail = inner[close + 1..].trim_start();
                    let tail = match tail.strip_prefix(',') {
                        Some(t) => t,
                        None if tail.is_empty() => tail,
                        None => {
                            return Err(Error::parse(&key, format!("unexpected `{tail}`")));
                        }
                    };
                    (value.to_string(), tail)
                } else if greedy.contains(&key.as_str()) {
                    (after.to_string(), "")
                } else {
                    match split_top_level(after) {
                        Some((value, tail)) => (value.to_string(), tail),
                        None => (after.to_string(), ""),
                    }
                };
                if params.iter().any(|(k, _)| *k == key) {
                    return Err(Error::parse(&key, "duplicate key"));
                }
                params.push((key, value.trim().to_string()));
                rest = remaining;
            }
        }
        Ok(Self {
            name: name.to_string(),
            params,
        })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn required(&self, key: &str) -> Result<&str> {
        self.raw(key)
            .ok_or_else(|| Error::parse(key, format!("`{}` requires `{key}=`", self.name)))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let raw = self.required(key)?;
        raw.parse()
            .map_err(|_| Error::parse(key, format!("`{raw}` is not a non-negative integer")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let raw = self.required(key)?;
        parse_f64(key, raw)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            Some(raw) => parse_f64(key, raw),
            None => Ok(default),
        }
    }

    /// Fails if a key outside `allowed` is present.
    pub fn only(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.params {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::parse(
                    k,
                    format!("unknown parameter for `{}`", self.name),
                ));
            }
        }
        Ok(())
    }
}

pub(crate) fn parse_f64(field: &str, raw: &str) -> Result<f64> {
    let value: f64 = raw
        .trim()
        .parse()
        .map_err(|_| Error::parse(field, format!("`{raw}` is not a number")))?;
    if !value.is_finite() {
        return Err(Error::parse(field, "value must be finite"));
    }
    Ok(value)
}

/// Wraps `text` in brackets when it contains a separator.
pub(crate) fn nest(text: &str) -> String {
    if text.contains(',') || text.contains('=') {
        format!("[{text}]")
    } else {
        text.to_string()
    }
}

fn matching_bracket(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '[' => depth += 1,
            ']' if depth == 0 => return Some(i),
            ']' => depth -= 1,
            _ => {}
        }
    }
    None
}

fn split_top_level(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_params() {
        let d = Descriptor::parse("quotient:k=2,l=1", &[]).unwrap();
        assert_eq!(d.name, "quotient");
        assert_eq!(d.usize("k").unwrap(), 2);
        assert_eq!(d.usize("l").unwrap(), 1);
    }

    #[test]
    fn bare_name() {
        let d = Descriptor::parse("inv-power", &[]).unwrap();
        assert_eq!(d.name, "inv-power");
        assert!(d.raw("k").is_none());
    }

    #[test]
    fn greedy_nested() {
        let d = Descriptor::parse("ricci:inner=quotient:k=2,l=1", &["inner"]).unwrap();
        assert_eq!(d.raw("inner"), Some("quotient:k=2,l=1"));
    }

    #[test]
    fn bracketed_nested() {
        let d = Descriptor::parse(
            "shifted:delta=0.5,inner=[quotient:k=2,l=1],inner2=[sigma-root:k=1]",
            &[],
        )
        .unwrap();
        assert_eq!(d.raw("inner"), Some("quotient:k=2,l=1"));
        assert_eq!(d.raw("inner2"), Some("sigma-root:k=1"));
        assert_eq!(d.f64("delta").unwrap(), 0.5);
    }

    #[test]
    fn errors_name_the_field() {
        let err = Descriptor::parse("pucci:k=x", &[])
            .unwrap()
            .usize("k")
            .unwrap_err();
        assert!(matches!(err, Error::Parse { ref field, .. } if field == "k"));
        assert!(Descriptor::parse("gamma:k", &[]).is_err());
        assert!(Descriptor::parse("a:k=1,k=2", &[]).is_err());
        assert!(Descriptor::parse("a:k=[1", &[]).is_err());
    }
}
