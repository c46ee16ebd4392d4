//! Integer value lists: `7`, `2,4,8`, `5..25` (inclusive) or `0..10:2`.

pub fn parse_values(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        if part.is_empty() {
            return Err(format!("empty entry in `{s}`"));
        }
        match part.split_once("..") {
            None => out.push(parse_one(part)?),
            Some((lo, rest)) => {
                let (hi, step) = match rest.split_once(':') {
                    Some((hi, step)) => (hi, parse_one(step)?),
                    None => (rest, 1),
                };
                let (lo, hi) = (parse_one(lo)?, parse_one(hi)?);
                if step == 0 {
                    return Err(format!("zero step in `{part}`"));
                }
                if lo > hi {
                    return Err(format!("empty range `{part}`"));
                }
                out.extend((lo..=hi).step_by(step));
            }
        }
    }
    Ok(out)
}

fn parse_one(s: &str) -> Result<usize, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a non-negative integer"))
}

/// Compact form that [`parse_values`] reads back to the same list.
pub fn format_values(values: &[usize]) -> String {
    match values {
        [] => String::new(),
        [one] => one.to_string(),
        [a, b, ..] if b > a && values.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] == b - a) => {
            let last = values[values.len() - 1];
            if b - a == 1 {
                format!("{a}..{last}")
            } else {
                format!("{a}..{last}:{}", b - a)
            }
        }
        _ => values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
    }
}
