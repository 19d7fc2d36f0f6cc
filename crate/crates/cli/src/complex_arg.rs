use num_complex::Complex64;

/// Parses `a`, `bi`, `a+bi` or `a-bi` (also `j` for the imaginary unit),
/// with optional scientific notation in either part.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("`{s}` is not a complex number (expected a+bi)");
    if t.is_empty() {
        return Err(bad());
    }
    let z = match t.strip_suffix(['i', 'j']) {
        None => Complex64::new(t.parse::<f64>().map_err(|_| bad())?, 0.0),
        Some(body) => {
            // the sign separating the parts is the last + or - that does not
            // start the string or follow an exponent marker
            let bytes = body.as_bytes();
            let split = (1..bytes.len())
                .rev()
                .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
            let (re, im) = match split {
                Some(k) => (body[..k].parse::<f64>().map_err(|_| bad())?, &body[k..]),
                None => (0.0, body),
            };
            let im = match im {
                "" | "+" => 1.0,
                "-" => -1.0,
                other => other.parse::<f64>().map_err(|_| bad())?,
            };
            Complex64::new(re, im)
        }
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(bad())
    }
}
