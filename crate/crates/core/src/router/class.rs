use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The renderers available in the bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RendererClass {
    /// Nearest loudspeaker.
    Ap1Nearest,
    /// Vector-base amplitude panning.
    Ap3Vbap,
    /// 2D ambisonic mode matching of the given order.
    AmbiMm(u32),
    /// Delay-and-gain wave field synthesis.
    WfsGainDelay,
    /// Single-zone pressure matching.
    PmSingleZone,
    /// Decorrelated, equal-power diffuse rendering.
    Diffuse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RendererFamily {
    GainDelay,
    FilterBased,
    Decorrelating,
}

impl RendererClass {
    pub fn family(&self) -> RendererFamily {
        match self {
            Self::Ap1Nearest | Self::Ap3Vbap | Self::AmbiMm(_) | Self::WfsGainDelay => {
                RendererFamily::GainDelay
            }
            Self::PmSingleZone => RendererFamily::FilterBased,
            Self::Diffuse => RendererFamily::Decorrelating,
        }
    }

    /// Same renderer ignoring parameters such as ambisonic order.
    pub fn same_kind(&self, other: &RendererClass) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

impl fmt::Display for RendererClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ap1Nearest => f.write_str("AP1_Nearest"),
            Self::Ap3Vbap => f.write_str("AP3_VBAP"),
            Self::AmbiMm(n) => write!(f, "Ambi_MM({n})"),
            Self::WfsGainDelay => f.write_str("WFS_GainDelay"),
            Self::PmSingleZone => f.write_str("PM_SingleZone"),
            Self::Diffuse => f.write_str("Diffuse"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown renderer class '{0}'")]
pub struct UnknownRenderer(pub String);

impl FromStr for RendererClass {
    type Err = UnknownRenderer;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match RendererRequest::from_str(s)? {
            RendererRequest::Exact(c) => Ok(c),
            RendererRequest::AmbiHighest => Err(UnknownRenderer(s.to_string())),
        }
    }
}

impl TryFrom<String> for RendererClass {
    type Error = UnknownRenderer;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<RendererClass> for String {
    fn from(c: RendererClass) -> String {
        c.to_string()
    }
}

/// A renderer named in metadata or selection tables. `Ambi_MM` without an
/// order asks for the highest order the layout supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RendererRequest {
    Exact(RendererClass),
    AmbiHighest,
}

impl RendererRequest {
    pub fn matches(&self, class: &RendererClass) -> bool {
        match self {
            Self::Exact(c) => c == class,
            Self::AmbiHighest => matches!(class, RendererClass::AmbiMm(_)),
        }
    }
}

impl fmt::Display for RendererRequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exact(c) => c.fmt(f),
            Self::AmbiHighest => f.write_str("Ambi_MM"),
        }
    }
}

impl FromStr for RendererRequest {
    type Err = UnknownRenderer;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let exact = match t {
            "AP1_Nearest" | "AP1" => RendererClass::Ap1Nearest,
            "AP3_VBAP" | "VBAP" => RendererClass::Ap3Vbap,
            "WFS_GainDelay" | "WFS" => RendererClass::WfsGainDelay,
            "PM_SingleZone" | "PM" => RendererClass::PmSingleZone,
            "Diffuse" => RendererClass::Diffuse,
            "Ambi_MM" => return Ok(Self::AmbiHighest),
            _ => {
                let order = t
                    .strip_prefix("Ambi_MM(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|n| n.trim().parse::<u32>().ok())
                    .filter(|n| *n >= 1)
                    .ok_or_else(|| UnknownRenderer(s.to_string()))?;
                RendererClass::AmbiMm(order)
            }
        };
        Ok(Self::Exact(exact))
    }
}

impl TryFrom<String> for RendererRequest {
    type Error = UnknownRenderer;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<RendererRequest> for String {
    fn from(r: RendererRequest) -> String {
        r.to_string()
    }
}
