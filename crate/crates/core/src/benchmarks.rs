//! Parametric benchmark families and the plain-text instance format.
//!
//! Instance files start with a policy line, `o` (oriented: no rotation) or
//! `u` (unoriented), followed by one `W H` pair per line. Blank lines and
//! lines starting with `#` are ignored.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::Instance;

pub const MAX_CUSTOM_RECTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    ConsecutiveSquares,
    UnorientedConsecutive,
    OrientedEqualPerimeter,
    UnorientedDoublePerimeter,
    HighPrecision,
    DoublyScaled,
    UniqueDimensions,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::ConsecutiveSquares,
        Family::UnorientedConsecutive,
        Family::OrientedEqualPerimeter,
        Family::UnorientedDoublePerimeter,
        Family::HighPrecision,
        Family::DoublyScaled,
        Family::UniqueDimensions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::ConsecutiveSquares => "consecutive-squares",
            Family::UnorientedConsecutive => "unoriented-consecutive",
            Family::OrientedEqualPerimeter => "oriented-equal-perimeter",
            Family::UnorientedDoublePerimeter => "unoriented-double-perimeter",
            Family::HighPrecision => "high-precision",
            Family::DoublyScaled => "doubly-scaled",
            Family::UniqueDimensions => "unique-dimensions",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let key = match key.as_str() {
            "squares" => "consecutive-squares",
            "consecutive" => "unoriented-consecutive",
            "equal-perimeter" => "oriented-equal-perimeter",
            "double-perimeter" => "unoriented-double-perimeter",
            "hp" => "high-precision",
            other => other,
        };
        Family::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown benchmark family '{s}'")))
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Least common multiple of `1..=n`.
pub fn lcm_up_to(n: u64) -> Result<u64> {
    (1..=n).try_fold(1u64, |acc, k| {
        (acc / gcd(acc, k))
            .checked_mul(k)
            .ok_or(Error::PrecisionExceeded("lcm"))
    })
}

pub fn generate(family: Family, n: usize) -> Result<Instance> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let k = n as u64;
    let (dims, oriented, scale): (Vec<(u64, u64)>, bool, u64) = match family {
        // Rotating a square changes nothing, so the family is stored oriented.
        Family::ConsecutiveSquares => ((1..=k).map(|i| (i, i)).collect(), true, 1),
        Family::UnorientedConsecutive => ((1..=k).map(|i| (i, i + 1)).collect(), false, 1),
        Family::OrientedEqualPerimeter => ((1..=k).map(|i| (i, k + 1 - i)).collect(), true, 1),
        Family::UnorientedDoublePerimeter => ((1..=k).map(|i| (i, 2 * k - i)).collect(), false, 1),
        Family::HighPrecision => {
            let scale = lcm_up_to(k + 1)?;
            ((1..=k).map(|i| (scale / i, scale / (i + 1))).collect(), false, scale)
        }
        Family::DoublyScaled => ((1..=k).map(|i| (2 * i, 2 * i + 2)).collect(), false, 1),
        Family::UniqueDimensions => ((1..=k).map(|i| (2 * i - 1, 2 * i)).collect(), false, 1),
    };
    Ok(Instance::new(&dims, oriented)?
        .with_scale(scale)
        .with_label(family.name()))
}

pub fn parse_custom(text: &str) -> Result<Instance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (policy_line, policy) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing orientation line".into(),
    })?;
    let oriented = match policy {
        "o" | "O" => true,
        "u" | "U" => false,
        other => {
            return Err(Error::Parse {
                line: policy_line,
                message: format!("expected 'o' or 'u', found '{other}'"),
            })
        }
    };

    let mut dims = Vec::new();
    let mut last_line = policy_line;
    for (line, content) in lines {
        last_line = line;
        let fields: Vec<&str> = content.split_whitespace().collect();
        let [w, h] = fields[..] else {
            return Err(Error::Parse {
                line,
                message: format!("expected 'W H', found '{content}'"),
            });
        };
        let parse = |s: &str| {
            s.parse::<u64>().map_err(|e| Error::Parse {
                line,
                message: format!("bad dimension '{s}': {e}"),
            })
        };
        let (w, h) = (parse(w)?, parse(h)?);
        if w == 0 || h == 0 {
            return Err(Error::Parse {
                line,
                message: "dimensions must be positive".into(),
            });
        }
        dims.push((w, h));
        if dims.len() > MAX_CUSTOM_RECTS {
            return Err(Error::Parse {
                line,
                message: format!("more than {MAX_CUSTOM_RECTS} rectangles"),
            });
        }
    }
    if dims.is_empty() {
        return Err(Error::Parse {
            line: last_line + 1,
            message: "no rectangles listed".into(),
        });
    }
    Instance::new(&dims, oriented).map_err(|e| match e {
        Error::PrecisionExceeded(_) => e,
        other => Error::Parse {
            line: last_line,
            message: other.to_string(),
        },
    })
}

/// Renders an instance in the text format accepted by [`parse_custom`].
pub fn to_text(instance: &Instance) -> String {
    let mut out = String::from(if instance.oriented { "o\n" } else { "u\n" });
    for r in instance.rects() {
        out.push_str(&format!("{} {}\n", r.width, r.height));
    }
    out
}
