//! Parametric ideal boundary curves on the unit sphere of the Klein model.
//! Accepted spellings: `circle`, `ellipse(a,b)` / `ellipse:a:b`,
//! `wavy(m,amp)` / `wavy:m:amp`.

use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BoundaryCurve {
    /// Equatorial round circle.
    Circle,
    /// Normalized ellipse direction (a cos, b sin, 0).
    Ellipse { a: f64, b: f64 },
    /// Height z = amp cos(m theta) over the equator, radius sqrt(1 - z^2).
    Wavy { m: u32, amp: f64 },
}

impl BoundaryCurve {
    /// Unit direction at curve parameter theta.
    pub fn at(&self, theta: f64) -> DVector<f64> {
        match *self {
            BoundaryCurve::Circle => {
                DVector::from_column_slice(&[theta.cos(), theta.sin(), 0.0])
            }
            BoundaryCurve::Ellipse { a, b } => {
                let v = DVector::from_column_slice(&[a * theta.cos(), b * theta.sin(), 0.0]);
                let n = v.norm();
                v / n
            }
            BoundaryCurve::Wavy { m, amp } => {
                let z = amp * (m as f64 * theta).cos();
                let w = (1.0 - z * z).sqrt();
                DVector::from_column_slice(&[w * theta.cos(), w * theta.sin(), z])
            }
        }
    }

    /// Uniform parameter samples over one period.
    pub fn sample(&self, n: usize) -> Vec<DVector<f64>> {
        (0..n)
            .map(|i| self.at(i as f64 / n as f64 * std::f64::consts::TAU))
            .collect()
    }
}

fn parse_args(body: &str) -> Result<Vec<f64>> {
    body.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad curve parameter {s:?}: {e}")))
        })
        .collect()
}

impl FromStr for BoundaryCurve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = if let Some(open) = s.find('(') {
            let close = s
                .rfind(')')
                .ok_or_else(|| Error::Parse(format!("unbalanced parentheses in {s:?}")))?;
            (s[..open].trim(), parse_args(&s[open + 1..close])?)
        } else if let Some((name, rest)) = s.split_once(':') {
            (name.trim(), parse_args(&rest.replace(':', ","))?)
        } else {
            (s, Vec::new())
        };
        match (name, args.as_slice()) {
            ("circle", []) => Ok(BoundaryCurve::Circle),
            ("ellipse", [a, b]) if *a > 0.0 && *b > 0.0 => {
                Ok(BoundaryCurve::Ellipse { a: *a, b: *b })
            }
            ("wavy", [m, amp]) if *m >= 1.0 && m.fract() == 0.0 && amp.abs() < 1.0 => {
                Ok(BoundaryCurve::Wavy {
                    m: *m as u32,
                    amp: *amp,
                })
            }
            _ => Err(Error::Parse(format!("unrecognized boundary curve {s:?}"))),
        }
    }
}

impl TryFrom<String> for BoundaryCurve {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BoundaryCurve> for String {
    fn from(c: BoundaryCurve) -> String {
        c.to_string()
    }
}

impl std::fmt::Display for BoundaryCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryCurve::Circle => write!(f, "circle"),
            BoundaryCurve::Ellipse { a, b } => write!(f, "ellipse({a},{b})"),
            BoundaryCurve::Wavy { m, amp } => write!(f, "wavy({m},{amp})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_spellings() {
        assert_eq!("circle".parse::<BoundaryCurve>().unwrap(), BoundaryCurve::Circle);
        assert_eq!(
            "wavy(3,0.1)".parse::<BoundaryCurve>().unwrap(),
            BoundaryCurve::Wavy { m: 3, amp: 0.1 }
        );
        assert_eq!(
            "wavy:3:0.1".parse::<BoundaryCurve>().unwrap(),
            BoundaryCurve::Wavy { m: 3, amp: 0.1 }
        );
        assert_eq!(
            "ellipse(2,1.5)".parse::<BoundaryCurve>().unwrap(),
            BoundaryCurve::Ellipse { a: 2.0, b: 1.5 }
        );
        assert!("wavy(0.5,0.1)".parse::<BoundaryCurve>().is_err());
        assert!("helix(1)".parse::<BoundaryCurve>().is_err());
    }

    #[test]
    fn samples_are_unit_directions() {
        for curve in [
            BoundaryCurve::Circle,
            BoundaryCurve::Ellipse { a: 2.0, b: 1.0 },
            BoundaryCurve::Wavy { m: 3, amp: 0.1 },
        ] {
            for p in curve.sample(64) {
                assert!((p.norm() - 1.0).abs() < 1e-14, "{curve}");
            }
        }
    }

    #[test]
    fn wavy_oscillates_m_times() {
        let c = BoundaryCurve::Wavy { m: 3, amp: 0.2 };
        let zs: Vec<f64> = c.sample(512).iter().map(|p| p[2]).collect();
        let crossings = zs
            .windows(2)
            .filter(|w| (w[0] > 0.0) != (w[1] > 0.0))
            .count();
        assert_eq!(crossings, 6, "three full periods");
    }
}
