//! Small text helpers shared by the line-oriented file formats.
//!
//! Floats are written in Rust's shortest round-trip decimal form, so a value
//! written and parsed back is bit-identical; that property is what makes the
//! golden-file tests byte-exact.

use std::collections::BTreeSet;

/// Shortest decimal representation of `x` that parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Parse a finite float.
pub fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("not a number: {s:?}"))?;
    if !v.is_finite() {
        return Err(format!("non-finite number: {s:?}"));
    }
    Ok(v)
}

/// Parse an unsigned integer.
pub fn parse_u64(s: &str) -> Result<u64, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("not an unsigned integer: {s:?}"))
}

/// Bracketed, comma-separated float vector, e.g. `[1,2.5,3]`; empty is `[]`.
pub fn fmt_vec(v: &[f64]) -> String {
    let mut out = String::with_capacity(2 + v.len() * 8);
    out.push('[');
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_f64(*x));
    }
    out.push(']');
    out
}

/// Inverse of [`fmt_vec`].
pub fn parse_vec(s: &str) -> Result<Vec<f64>, String> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| format!("vector must be bracketed: {s:?}"))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner.split(',').map(parse_f64).collect()
}

/// Comma-separated unsigned integers; empty list is the empty string.
pub fn fmt_ids<'a>(ids: impl IntoIterator<Item = &'a u64>) -> String {
    let mut out = String::new();
    for (i, id) in ids.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&id.to_string());
    }
    out
}

/// Inverse of [`fmt_ids`].
pub fn parse_ids(s: &str) -> Result<Vec<u64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_u64).collect()
}

/// Collapse a set of frame ids into closed runs of consecutive ids.
pub fn to_runs(frames: &BTreeSet<u64>) -> Vec<[u64; 2]> {
    let mut runs: Vec<[u64; 2]> = Vec::new();
    for &f in frames {
        match runs.last_mut() {
            Some(r) if r[1] + 1 == f => r[1] = f,
            _ => runs.push([f, f]),
        }
    }
    runs
}

/// Expand closed runs back into a frame-id set.
pub fn from_runs(runs: &[[u64; 2]]) -> BTreeSet<u64> {
    runs.iter().flat_map(|r| r[0]..=r[1]).collect()
}

/// Split a `# key value` header line into `(key, value)`.
///
/// Returns `None` for lines that are not in key/value form.
pub fn split_header(line: &str) -> Option<(&str, &str)> {
    let rest = line.strip_prefix("# ")?;
    if rest.is_empty() {
        return None;
    }
    Some(rest.split_once(' ').unwrap_or((rest, "")))
}

/// Render a `# key value` header line.
pub fn header_line(key: &str, value: impl std::fmt::Display) -> String {
    format!("# {key} {value}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_bit_exactly() {
        for x in [0.1 + 0.2, 1.0, -0.0, 1e-7, 123456.789, f64::MAX, 5e-324] {
            let back = parse_f64(&fmt_f64(x)).unwrap();
            assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn vectors_round_trip() {
        let v = vec![1.0, 2.5, -3.25];
        assert_eq!(fmt_vec(&v), "[1,2.5,-3.25]");
        assert_eq!(parse_vec("[1,2.5,-3.25]").unwrap(), v);
        assert!(parse_vec("[]").unwrap().is_empty());
        assert!(parse_vec("1,2").is_err());
        assert!(parse_vec("[1,x]").is_err());
    }

    #[test]
    fn runs_collapse_consecutive_ids() {
        let s: BTreeSet<u64> = [1, 2, 3, 5, 7, 8].into_iter().collect();
        let r = to_runs(&s);
        assert_eq!(r, vec![[1, 3], [5, 5], [7, 8]]);
        assert_eq!(from_runs(&r), s);
    }

    #[test]
    fn header_lines_split_on_first_space() {
        assert_eq!(split_header("# pipeline a b c"), Some(("pipeline", "a b c")));
        assert_eq!(split_header("# fps 30"), Some(("fps", "30")));
        assert_eq!(split_header("#fps 30"), None);
        assert_eq!(header_line("fps", 30), "# fps 30");
    }
}
