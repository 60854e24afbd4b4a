//! Grid functions on uniform 1D meshes with explicit exterior models.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::NonlocalError;

/// Uniform nodes `x_lo + i·h`, `i = 0..nodes`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    x_lo: f64,
    x_hi: f64,
    h: f64,
    nodes: usize,
}

impl Mesh {
    pub fn new(x_lo: f64, x_hi: f64, nodes: usize) -> Result<Self, NonlocalError> {
        if nodes < 2 {
            return Err(NonlocalError::InvalidMesh(format!("need at least 2 nodes, got {nodes}")));
        }
        if !(x_lo.is_finite() && x_hi.is_finite() && x_hi > x_lo) {
            return Err(NonlocalError::InvalidMesh(format!("invalid bounds [{x_lo}, {x_hi}]")));
        }
        Ok(Self { x_lo, x_hi, h: (x_hi - x_lo) / (nodes - 1) as f64, nodes })
    }

    /// Mesh through explicit coordinates; spacing must be uniform to 1e−14 relative.
    pub fn from_nodes(xs: &[f64]) -> Result<Self, NonlocalError> {
        if xs.len() < 2 {
            return Err(NonlocalError::InvalidMesh("need at least 2 nodes".into()));
        }
        let mesh = Self::new(xs[0], xs[xs.len() - 1], xs.len())?;
        let scale = mesh.x_hi().abs().max(mesh.x_lo.abs()).max(mesh.h);
        for (i, &x) in xs.iter().enumerate() {
            if (x - mesh.x(i)).abs() > 1e-14 * scale.max(1.0) * (xs.len() as f64) {
                return Err(NonlocalError::InvalidMesh(format!("node {i} at {x} breaks uniform spacing")));
            }
        }
        Ok(mesh)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }

    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nodes {
            self.x_hi
        } else {
            self.x_lo + i as f64 * self.h
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.x(i)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_lo && x <= self.x_hi()
    }

    /// Segment index and local coordinate in `[0, 1]` for a point of the mesh.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        if !self.contains(x) {
            return None;
        }
        let t = (x - self.x_lo) / self.h;
        let i = (t.floor() as usize).min(self.nodes - 2);
        Some((i, (t - i as f64).clamp(0.0, 1.0)))
    }

    /// Index of a node located at `x` within `tol·h`, if any.
    pub fn node_at(&self, x: f64, tol: f64) -> Option<usize> {
        let t = (x - self.x_lo) / self.h;
        let i = t.round();
        if i < 0.0 || i > (self.nodes - 1) as f64 || (t - i).abs() > tol {
            return None;
        }
        Some(i as usize)
    }
}

type ClosureFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A callable exterior model with a label and an asymptotic growth exponent
/// `b` such that `|u(x)| ≲ |x|^b` for large `|x|`.
#[derive(Clone)]
pub struct AnalyticClosure {
    label: String,
    growth: f64,
    func: ClosureFn,
}

impl AnalyticClosure {
    pub fn new(label: impl Into<String>, growth: f64, func: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), growth, func: Arc::new(func) }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("constant({c})"), 0.0, move |_| c)
    }

    pub fn affine(slope: f64, intercept: f64) -> Self {
        let growth = if slope == 0.0 { 0.0 } else { 1.0 };
        Self::new(format!("affine({slope},{intercept})"), growth, move |x| slope * x + intercept)
    }

    /// Even power `amplitude·|x|^exponent`.
    pub fn power(amplitude: f64, exponent: f64) -> Self {
        Self::new(format!("power({amplitude},{exponent})"), exponent, move |x: f64| amplitude * x.abs().powf(exponent))
    }

    /// Rebuild one of the named closures from its label.
    pub fn parse(label: &str) -> Option<Self> {
        let open = label.find('(')?;
        let name = &label[..open];
        let args: Vec<f64> = label[open + 1..label.len().checked_sub(1)?]
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .ok()?;
        match (name, args.as_slice()) {
            ("constant", [c]) => Some(Self::constant(*c)),
            ("affine", [m, c]) => Some(Self::affine(*m, *c)),
            ("power", [a, b]) => Some(Self::power(*a, *b)),
            _ => None,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn growth(&self) -> f64 {
        self.growth
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.func)(x)
    }
}

impl fmt::Debug for AnalyticClosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticClosure").field("label", &self.label).field("growth", &self.growth).finish()
    }
}

/// How a grid function continues outside its mesh.
#[derive(Debug, Clone)]
pub enum Exterior {
    AnalyticClosure(AnalyticClosure),
    /// Nearest-edge value up to `|x| ≤ radius`, zero beyond.
    ZeroBeyond { radius: f64 },
    /// Even power law `amplitude·|x|^exponent`.
    PowerTail { amplitude: f64, exponent: f64 },
}

impl Exterior {
    pub fn zero() -> Self {
        Exterior::ZeroBeyond { radius: 0.0 }
    }

    /// Growth exponent at infinity; `None` when the exterior vanishes eventually.
    pub fn growth(&self) -> Option<f64> {
        match self {
            Exterior::AnalyticClosure(c) => Some(c.growth),
            Exterior::ZeroBeyond { .. } => None,
            Exterior::PowerTail { amplitude, exponent } => {
                if *amplitude == 0.0 {
                    None
                } else {
                    Some(*exponent)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ExteriorSidecar {
    AnalyticClosure { label: String, growth: f64 },
    ZeroBeyond { radius: f64 },
    PowerTail { amplitude: f64, exponent: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sidecar {
    schema_version: u32,
    nodes: usize,
    x_lo: f64,
    x_hi: f64,
    exterior: ExteriorSidecar,
}

/// Piecewise-linear function on a uniform mesh plus an exterior model.
#[derive(Debug, Clone)]
pub struct GridFunction {
    mesh: Mesh,
    values: Arc<Vec<f64>>,
    exterior: Exterior,
}

impl GridFunction {
    pub fn new(mesh: Mesh, values: Vec<f64>, exterior: Exterior) -> Result<Self, NonlocalError> {
        if values.len() != mesh.nodes() {
            return Err(NonlocalError::InvalidMesh(format!(
                "{} values for {} nodes",
                values.len(),
                mesh.nodes()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(NonlocalError::InvalidInput("grid values must be finite".into()));
        }
        Ok(Self { mesh, values: Arc::new(values), exterior })
    }

    /// Samples `f` on the mesh; the exterior is `f` itself.
    pub fn from_closure(mesh: Mesh, closure: AnalyticClosure) -> Self {
        let values = mesh.coords().iter().map(|&x| closure.eval(x)).collect();
        Self { mesh, values: Arc::new(values), exterior: Exterior::AnalyticClosure(closure) }
    }

    pub fn from_fn(mesh: Mesh, f: impl Fn(f64) -> f64, exterior: Exterior) -> Result<Self, NonlocalError> {
        let values = mesh.coords().iter().map(|&x| f(x)).collect();
        Self::new(mesh, values, exterior)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exterior(&self) -> &Exterior {
        &self.exterior
    }

    pub fn with_exterior(&self, exterior: Exterior) -> Self {
        Self { mesh: self.mesh, values: Arc::clone(&self.values), exterior }
    }

    /// Value of the exterior model at a point outside the mesh.
    pub fn exterior_value(&self, x: f64) -> f64 {
        match &self.exterior {
            Exterior::AnalyticClosure(c) => c.eval(x),
            Exterior::ZeroBeyond { radius } => {
                if x.abs() > *radius {
                    0.0
                } else if x < self.mesh.x_lo() {
                    self.values[0]
                } else {
                    self.values[self.values.len() - 1]
                }
            }
            Exterior::PowerTail { amplitude, exponent } => amplitude * x.abs().powf(*exponent),
        }
    }

    /// Linear interpolation on the mesh, exterior model elsewhere.
    pub fn value_at(&self, x: f64) -> f64 {
        match self.mesh.locate(x) {
            Some((i, t)) => {
                if t == 0.0 {
                    self.values[i]
                } else if t == 1.0 {
                    self.values[i + 1]
                } else {
                    self.values[i] * (1.0 - t) + self.values[i + 1] * t
                }
            }
            None => self.exterior_value(x),
        }
    }

    pub fn growth(&self) -> Option<f64> {
        self.exterior.growth()
    }

    /// Points beyond which the exterior vanishes identically, if any.
    pub(crate) fn support_radius(&self) -> Option<f64> {
        match &self.exterior {
            Exterior::ZeroBeyond { radius } => Some(radius.max(self.mesh.x_lo().abs()).max(self.mesh.x_hi().abs())),
            Exterior::PowerTail { amplitude, .. } if *amplitude == 0.0 => {
                Some(self.mesh.x_lo().abs().max(self.mesh.x_hi().abs()))
            }
            _ => None,
        }
    }

    /// `u + c`, with the exterior shifted accordingly.
    pub fn offset(&self, c: f64) -> Self {
        if c == 0.0 {
            return self.clone();
        }
        let values = self.values.iter().map(|v| v + c).collect();
        let base = self.clone();
        let growth = self.growth().unwrap_or(0.0).max(0.0);
        let closure = AnalyticClosure::new(format!("offset({c})"), growth, move |x| base.exterior_value(x) + c);
        Self { mesh: self.mesh, values: Arc::new(values), exterior: Exterior::AnalyticClosure(closure) }
    }

    /// Pointwise `self − other` on a shared mesh.
    pub fn difference(&self, other: &GridFunction) -> Result<Self, NonlocalError> {
        if self.mesh != other.mesh {
            return Err(NonlocalError::InvalidMesh("difference needs identical meshes".into()));
        }
        let values = self.values.iter().zip(other.values.iter()).map(|(a, b)| a - b).collect();
        let (a, b) = (self.clone(), other.clone());
        let growth = match (self.growth(), other.growth()) {
            (None, None) => None,
            (x, y) => Some(x.unwrap_or(f64::NEG_INFINITY).max(y.unwrap_or(f64::NEG_INFINITY))),
        };
        let exterior = match growth {
            None => match (self.support_radius(), other.support_radius()) {
                (Some(r1), Some(r2)) => {
                    let r = r1.max(r2);
                    Exterior::AnalyticClosure(AnalyticClosure::new(format!("difference(support {r})"), 0.0, move |x| {
                        if x.abs() > r {
                            0.0
                        } else {
                            a.exterior_value(x) - b.exterior_value(x)
                        }
                    }))
                }
                _ => unreachable!("exteriors without growth have bounded support"),
            },
            Some(g) => Exterior::AnalyticClosure(AnalyticClosure::new("difference", g, move |x| {
                a.exterior_value(x) - b.exterior_value(x)
            })),
        };
        Ok(Self { mesh: self.mesh, values: Arc::new(values), exterior })
    }

    /// Writes `x,value` rows to `stem.csv` and the exterior description to `stem.json`.
    pub fn write(&self, stem: &Path) -> Result<(), NonlocalError> {
        let csv = stem.with_extension("csv");
        let mut out = std::io::BufWriter::new(std::fs::File::create(&csv)?);
        writeln!(out, "x,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{:.17e},{:.17e}", self.mesh.x(i), v)?;
        }
        out.flush()?;
        let exterior = match &self.exterior {
            Exterior::AnalyticClosure(c) => ExteriorSidecar::AnalyticClosure { label: c.label.clone(), growth: c.growth },
            Exterior::ZeroBeyond { radius } => ExteriorSidecar::ZeroBeyond { radius: *radius },
            Exterior::PowerTail { amplitude, exponent } => {
                ExteriorSidecar::PowerTail { amplitude: *amplitude, exponent: *exponent }
            }
        };
        let sidecar = Sidecar {
            schema_version: 1,
            nodes: self.mesh.nodes(),
            x_lo: self.mesh.x_lo(),
            x_hi: self.mesh.x_hi(),
            exterior,
        };
        std::fs::write(stem.with_extension("json"), serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }

    /// Reads a function written by [`GridFunction::write`]. Analytic exteriors
    /// must carry one of the labels understood by [`AnalyticClosure::parse`].
    pub fn read(stem: &Path) -> Result<Self, NonlocalError> {
        let sidecar: Sidecar = serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json"))?)?;
        let file = std::io::BufReader::new(std::fs::File::open(stem.with_extension("csv"))?);
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (k, line) in file.lines().enumerate() {
            let line = line?;
            if k == 0 {
                if line.trim() != "x,value" {
                    return Err(NonlocalError::InvalidInput(format!("unexpected header '{line}'")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64, NonlocalError> {
                s.ok_or_else(|| NonlocalError::InvalidInput(format!("short row '{line}'")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| NonlocalError::InvalidInput(e.to_string()))
            };
            xs.push(parse(parts.next())?);
            vs.push(parse(parts.next())?);
        }
        let mesh = Mesh::from_nodes(&xs)?;
        if mesh.nodes() != sidecar.nodes {
            return Err(NonlocalError::InvalidInput("sidecar node count does not match CSV".into()));
        }
        let exterior = match sidecar.exterior {
            ExteriorSidecar::AnalyticClosure { label, .. } => Exterior::AnalyticClosure(
                AnalyticClosure::parse(&label)
                    .ok_or_else(|| NonlocalError::InvalidInput(format!("cannot rebuild closure '{label}'")))?,
            ),
            ExteriorSidecar::ZeroBeyond { radius } => Exterior::ZeroBeyond { radius },
            ExteriorSidecar::PowerTail { amplitude, exponent } => Exterior::PowerTail { amplitude, exponent },
        };
        Self::new(mesh, vs, exterior)
    }
}

/// An interval `(center − radius, center + radius)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: f64,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: f64, radius: f64) -> Result<Self, NonlocalError> {
        if !(radius > 0.0 && radius.is_finite() && center.is_finite()) {
            return Err(NonlocalError::InvalidInput(format!("ball radius {radius} must be positive")));
        }
        Ok(Self { center, radius })
    }

    pub fn lo(&self) -> f64 {
        self.center - self.radius
    }

    pub fn hi(&self) -> f64 {
        self.center + self.radius
    }

    pub fn measure(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { center: self.center, radius: self.radius * factor }
    }

    pub fn contains_ball(&self, other: &Ball) -> bool {
        other.lo() >= self.lo() - 1e-14 && other.hi() <= self.hi() + 1e-14
    }
}
