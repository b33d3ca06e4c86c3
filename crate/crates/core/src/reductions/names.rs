//! Reversible encoding of tile and state names into identifier suffixes.
//!
//! ASCII letters and digits are kept, `_` becomes `__`, and any other
//! character becomes `_x<hex>_`.

pub fn encode_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.chars() {
        match c {
            'a'..='z' | 'A'..='Z' | '0'..='9' => out.push(c),
            '_' => out.push_str("__"),
            _ => out.push_str(&format!("_x{:x}_", c as u32)),
        }
    }
    out
}

pub fn decode_name(encoded: &str) -> Option<String> {
    let mut out = String::new();
    let mut chars = encoded.chars();
    while let Some(c) = chars.next() {
        if c != '_' {
            out.push(c);
            continue;
        }
        match chars.next()? {
            '_' => out.push('_'),
            'x' => {
                let hex: String = chars.by_ref().take_while(|&h| h != '_').collect();
                out.push(char::from_u32(u32::from_str_radix(&hex, 16).ok()?)?);
            }
            _ => return None,
        }
    }
    Some(out)
}
