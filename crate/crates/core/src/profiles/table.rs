//! Plain-text tables of sampled profiles.
//!
//! ```text
//! # profile <name> domain <a> <b>
//! t,value,d1,d2
//! ```
//! Numbers use 17 significant digits, so parsing restores the sampled values exactly.

use std::fmt::Write as _;

use super::Profile;
use crate::error::{invalid, LabError, Result};

/// Parsed sample table.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileTable {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    /// `[t, value, d1, d2]` rows.
    pub rows: Vec<[f64; 4]>,
}

impl ProfileTable {
    /// Sample `profile` at `n >= 2` uniform points of `[lo, hi]`.
    pub fn sample(profile: &Profile, lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(lo < hi) {
            return Err(invalid("table needs n >= 2 and lo < hi"));
        }
        let rows = (0..n)
            .map(|i| {
                let t = if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                };
                profile.eval(t).map(|j| [t, j.value, j.d1, j.d2])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: profile.name().to_string(),
            lo,
            hi,
            rows,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# profile {} domain {:.16e} {:.16e}\n",
            self.name, self.lo, self.hi
        );
        s.push_str("t,value,d1,d2\n");
        for r in &self.rows {
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", r[0], r[1], r[2], r[3]);
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, msg: &str| LabError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 6 || parts[0] != "#" || parts[1] != "profile" || parts[3] != "domain" {
            return Err(err(1, "expected '# profile <name> domain <a> <b>'"));
        }
        let num = |s: &str, line: usize| s.parse::<f64>().map_err(|_| err(line, "bad number"));
        let lo = num(parts[4], 1)?;
        let hi = num(parts[5], 1)?;
        let mut rows = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() || line == "t,value,d1,d2" {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(err(i + 1, "expected 4 columns"));
            }
            rows.push([
                num(f[0], i + 1)?,
                num(f[1], i + 1)?,
                num(f[2], i + 1)?,
                num(f[3], i + 1)?,
            ]);
        }
        Ok(Self {
            name: parts[2].to_string(),
            lo,
            hi,
            rows,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::exp_profile;

    #[test]
    fn header_and_row_format() {
        let t = ProfileTable::sample(&exp_profile(1.0).unwrap(), 0.0, 1.0, 2).unwrap();
        let text = t.to_text();
        let mut lines = text.lines();
        assert!(lines
            .next()
            .unwrap()
            .starts_with("# profile exp(ell=1) domain 0.0000000000000000e0 "));
        assert_eq!(lines.next().unwrap(), "t,value,d1,d2");
        assert_eq!(
            lines.next().unwrap(),
            "0.0000000000000000e0,1.0000000000000000e0,-1.0000000000000000e0,1.0000000000000000e0"
        );
    }

    #[test]
    fn malformed_rejected() {
        assert!(ProfileTable::parse("").is_err());
        assert!(ProfileTable::parse("# profile x domain 0 1\n1,2,3\n").is_err());
        assert!(ProfileTable::parse("# prof x domain 0 1\n").is_err());
    }
}
