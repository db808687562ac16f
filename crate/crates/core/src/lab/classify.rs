use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::tolerances;

/// Region of the `(p, q, s)` phase diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionKind {
    ConcaveKnown,
    ConvexKnown,
    ConjecturedConvex,
    NotConvexNotConcave,
    Unclassified,
}

impl RegionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionKind::ConcaveKnown => "ConcaveKnown",
            RegionKind::ConvexKnown => "ConvexKnown",
            RegionKind::ConjecturedConvex => "ConjecturedConvex",
            RegionKind::NotConvexNotConcave => "NotConvexNotConcave",
            RegionKind::Unclassified => "Unclassified",
        }
    }

    /// The direction a Known label asserts.
    pub fn known_direction(&self) -> Option<Direction> {
        match self {
            RegionKind::ConcaveKnown => Some(Direction::Concave),
            RegionKind::ConvexKnown => Some(Direction::Convex),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Convex,
    Concave,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Convex => "convex",
            Direction::Concave => "concave",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub kind: RegionKind,
    pub citation: String,
}

impl RegionLabel {
    fn new(kind: RegionKind, citation: &str) -> Self {
        Self {
            kind,
            citation: citation.to_string(),
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind.as_str(), self.citation)
    }
}

/// Reduces `(p, q, s)` to `s > 0`, `p >= q` using `(p,q,s) ~ (-p,-q,-s)` and `(p,q) ~ (q,p)`.
pub fn normalize(p: f64, q: f64, s: f64) -> Result<(f64, f64, f64)> {
    if !(p.is_finite() && q.is_finite() && s.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "non-finite exponents ({p}, {q}, {s})"
        )));
    }
    if s == 0.0 {
        return Err(Error::InvalidParameter("s = 0 is not classified".into()));
    }
    let (p, q, s) = if s < 0.0 { (-p, -q, -s) } else { (p, q, s) };
    Ok(if p >= q { (p, q, s) } else { (q, p, s) })
}

/// `a <= b` up to the boundary slack, so that boundary points keep the Known label.
fn le(a: f64, b: f64) -> bool {
    if b == f64::INFINITY {
        return true;
    }
    a <= b + tolerances().boundary_slack * b.abs().max(1.0)
}

fn ge(a: f64, b: f64) -> bool {
    if b == f64::INFINITY {
        return false;
    }
    a + tolerances().boundary_slack * b.abs().max(1.0) >= b
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    ge(x, lo) && le(x, hi)
}

fn recip(x: f64) -> f64 {
    if x == 0.0 {
        f64::INFINITY
    } else {
        1.0 / x
    }
}

/// Classifies joint convexity/concavity of `Ψ_{p,q,s}` for arbitrary `K`.
pub fn classify(p: f64, q: f64, s: f64) -> Result<RegionLabel> {
    let (p, q, s) = normalize(p, q, s)?;
    use RegionKind::*;

    // Concave square.
    if ge(q, 0.0) && le(p, 1.0) && le(s, recip(p + q)) {
        return Ok(RegionLabel::new(ConcaveKnown, "Theorem-2(1)"));
    }
    // Convex square with both exponents non-positive.
    if ge(q, -1.0) && le(p, 0.0) {
        return Ok(RegionLabel::new(ConvexKnown, "Theorem-2(2)"));
    }
    let mixed = within(p, 1.0, 2.0) && within(q, -1.0, 0.0);
    if mixed {
        let bound = if le(p, 1.0) {
            recip(q + 1.0)
        } else if ge(p, 2.0) {
            recip(2.0 + q)
        } else {
            recip(p - 1.0).min(recip(q + 1.0))
        };
        if ge(s, bound) {
            return Ok(RegionLabel::new(ConvexKnown, "Theorem-2(3)"));
        }
        // B drops out on q = 0 and the functional is Υ_{p,s}.
        if ge(q, 0.0) && ge(s, recip(p)) {
            return Ok(RegionLabel::new(ConvexKnown, "Proposition-5(3)"));
        }
        if (s - 1.0).abs() <= tolerances().boundary_slack && ge(p + q, 1.0) {
            return Ok(RegionLabel::new(ConvexKnown, "Ando(s=1)"));
        }
        let excluded = (p - 1.0).abs() <= tolerances().boundary_slack
            && (q + 1.0).abs() <= tolerances().boundary_slack;
        if !excluded && ge(s, recip(p + q)) {
            return Ok(RegionLabel::new(ConjecturedConvex, "Conjecture-2"));
        }
    }
    let in_concave_necessary = ge(q, 0.0) && le(p, 1.0) && le(s, recip(p + q));
    let in_convex_necessary = (ge(q, -1.0) && le(p, 0.0)) || (mixed && ge(s, recip(p + q)));
    if !in_concave_necessary && !in_convex_necessary {
        return Ok(RegionLabel::new(NotConvexNotConcave, "Proposition-3"));
    }
    Ok(RegionLabel::new(Unclassified, "none"))
}

/// Classifies convexity/concavity of `Υ_{p,s}` for arbitrary `K`. Here the
/// sufficient and necessary conditions coincide.
pub fn classify_upsilon(p: f64, s: f64) -> Result<RegionLabel> {
    if !(p.is_finite() && s.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "non-finite exponents ({p}, {s})"
        )));
    }
    if s == 0.0 {
        return Err(Error::InvalidParameter("s = 0 is not classified".into()));
    }
    let (p, s) = if s < 0.0 { (-p, -s) } else { (p, s) };
    use RegionKind::*;
    if within(p, 0.0, 1.0) && le(s, recip(p)) {
        return Ok(RegionLabel::new(ConcaveKnown, "Proposition-5(1)"));
    }
    if within(p, -1.0, 0.0) {
        return Ok(RegionLabel::new(ConvexKnown, "Proposition-5(2)"));
    }
    if within(p, 1.0, 2.0) && ge(s, recip(p)) {
        return Ok(RegionLabel::new(ConvexKnown, "Proposition-5(3)"));
    }
    Ok(RegionLabel::new(NotConvexNotConcave, "Proposition-6"))
}
