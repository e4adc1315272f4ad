//! Randomly shifted rank-1 lattice rules.
//!
//! Point `n` of an `N`-point rule with generating vector `z` and shift `delta`
//! is `frac(n * z / N + delta)`. Points are produced on demand by index, so a
//! rule never materialises its `N x d` coordinates.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::gaussian;

/// Smallest coordinate handed to the quantile transform when clamping.
pub const CLAMP_EPS: f64 = 1.0 / (1u64 << 53) as f64;

/// Name of the built-in vector behind [`GeneratingVector::default_builtin`].
pub const DEFAULT_BUILTIN: &str = "lat33002";

/// Integer generating vector `z` of a rank-1 lattice rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratingVector {
    components: Vec<u64>,
    n_max: u64,
    source: String,
}

impl GeneratingVector {
    /// Components must lie in `1..n_max`.
    pub fn new(components: Vec<u64>, n_max: u64) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::invalid(format!("n_max must be at least 2, got {n_max}")));
        }
        if components.is_empty() {
            return Err(Error::invalid("no components"));
        }
        if let Some((j, &c)) = components.iter().enumerate().find(|(_, &c)| c == 0 || c >= n_max) {
            return Err(Error::invalid(format!(
                "component out of range: z[{}] = {c} not in 1..{n_max}",
                j + 1
            )));
        }
        Ok(GeneratingVector {
            components,
            n_max,
            source: "explicit".to_owned(),
        })
    }

    /// Reads the text format: first data line `n_max`, then one component
    /// per line. Lines starting with `#` and blank lines are ignored.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut z = Self::parse(&text, path)?;
        z.source = path.display().to_string();
        Ok(z)
    }

    /// Parses the generating-vector text format; `origin` only labels errors.
    pub fn parse(text: &str, origin: impl AsRef<Path>) -> Result<Self> {
        let origin = origin.as_ref();
        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_owned(),
            line,
            message,
        };
        let mut n_max = None;
        let mut components = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let value: i128 = line
                .parse()
                .map_err(|_| parse_err(i + 1, format!("malformed line {line:?}")))?;
            match n_max {
                None => {
                    if value < 2 || value > u64::MAX as i128 {
                        return Err(parse_err(i + 1, format!("n_max out of range: {value}")));
                    }
                    n_max = Some(value as u64);
                }
                Some(n) => {
                    if value < 1 || value >= n as i128 {
                        return Err(parse_err(
                            i + 1,
                            format!("component out of range: {value} not in 1..{n}"),
                        ));
                    }
                    components.push(value as u64);
                }
            }
        }
        let n_max = n_max.ok_or_else(|| parse_err(0, "missing n_max header".to_owned()))?;
        if components.is_empty() {
            return Err(parse_err(0, "no components".to_owned()));
        }
        Ok(GeneratingVector {
            components,
            n_max,
            source: origin.display().to_string(),
        })
    }

    /// Korobov vector `z_j = a^(j-1) mod n`.
    pub fn korobov(a: u64, n: u64, d: usize) -> Result<Self> {
        if n < 2 || d == 0 || a == 0 {
            return Err(Error::invalid(format!(
                "korobov vector needs a >= 1, n >= 2, d >= 1 (a = {a}, n = {n}, d = {d})"
            )));
        }
        if gcd(a, n) != 1 {
            return Err(Error::invalid(format!("korobov parameter {a} is not coprime to {n}")));
        }
        let mut components = Vec::with_capacity(d);
        let mut power = 1u64;
        for _ in 0..d {
            components.push(power);
            power = ((power as u128 * a as u128) % n as u128) as u64;
        }
        Ok(GeneratingVector {
            components,
            n_max: n,
            source: format!("korobov:{a}"),
        })
    }

    /// A vector shipped with the library, each embedded for
    /// `N = 2^10 .. 2^20` in up to 64 dimensions: `"lat33002"` (the first 64
    /// components of the published `lattice-33002-1024-1048576.9125`),
    /// `"invsq"` (greedy search, weights `1/j^2`) or `"const005"` (greedy
    /// search, weights `0.05`).
    pub fn builtin(name: &str) -> Result<Self> {
        let text = match name {
            "invsq" => include_str!("../data/lattice-invsq-2p20.txt"),
            "const005" => include_str!("../data/lattice-const005-2p20.txt"),
            "lat33002" => include_str!("../data/lattice-33002-2p20.txt"),
            _ => {
                return Err(Error::invalid(format!(
                    "unknown built-in lattice {name:?} (expected lat33002, invsq or const005)"
                )))
            }
        };
        Ok(Self::parse(text, name)?.with_source(format!("builtin:{name}")))
    }

    /// The built-in vector used when none is specified.
    pub fn default_builtin() -> Self {
        Self::builtin(DEFAULT_BUILTIN).expect("shipped lattice parses")
    }

    pub fn components(&self) -> &[u64] {
        &self.components
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn d_max(&self) -> usize {
        self.components.len()
    }

    /// Where the vector came from (file path, `korobov:<a>`, ...).
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Random shift in `[0, 1)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Shift(Vec<f64>);

impl Shift {
    pub fn new(delta: Vec<f64>) -> Result<Self> {
        if delta.iter().any(|&x| !(0.0..1.0).contains(&x)) {
            return Err(Error::invalid("shift components must lie in [0, 1)"));
        }
        Ok(Shift(delta))
    }

    pub fn zero(d: usize) -> Self {
        Shift(vec![0.0; d])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// `r` independent uniform shifts. Shift `i` is drawn from ChaCha20 stream `i`
/// of `seed`, so shift `i` does not depend on `r`.
pub fn draw_shifts(r: usize, d: usize, seed: u64) -> Vec<Shift> {
    (0..r)
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            Shift((0..d).map(|_| rng.random::<f64>()).collect())
        })
        .collect()
}

/// Randomly shifted rank-1 lattice rule with `n` points in `[0, 1)^d`.
#[derive(Debug, Clone)]
pub struct LatticeRule {
    z: Vec<u64>,
    n: u64,
    shift: Shift,
}

impl LatticeRule {
    pub fn new(z: &GeneratingVector, n: usize, d: usize, shift: Shift) -> Result<Self> {
        let n = n as u64;
        if n == 0 {
            return Err(Error::invalid("lattice rule needs at least one point"));
        }
        if n > z.n_max() {
            return Err(Error::Capacity(format!(
                "N = {n} exceeds n_max = {} of {}",
                z.n_max(),
                z.source()
            )));
        }
        if n > 1 << 32 {
            return Err(Error::Capacity(format!("N = {n} exceeds 2^32")));
        }
        if d > z.d_max() {
            return Err(Error::Capacity(format!(
                "dimension {d} exceeds d_max = {} of {}",
                z.d_max(),
                z.source()
            )));
        }
        if shift.dim() != d {
            return Err(Error::invalid(format!(
                "shift has dimension {}, rule has {d}",
                shift.dim()
            )));
        }
        Ok(LatticeRule {
            z: z.components()[..d].iter().map(|&c| c % n).collect(),
            n,
            shift,
        })
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// Writes point `index` into `out[..d]`.
    #[inline]
    pub fn point(&self, index: usize, out: &mut [f64]) {
        debug_assert!((index as u64) < self.n);
        let n = self.n;
        let inv = 1.0 / n as f64;
        let idx = index as u64;
        let mask = n.is_power_of_two().then(|| n - 1);
        for ((o, &zj), &dj) in out.iter_mut().zip(&self.z).zip(self.shift.as_slice()) {
            let k = match mask {
                Some(m) => idx.wrapping_mul(zj) & m,
                None => (idx * zj) % n,
            };
            let x = k as f64 * inv + dj;
            *o = if x >= 1.0 { x - 1.0 } else { x };
        }
    }
}

/// A point set in `R^d` addressable by index.
pub trait PointSet: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn dim(&self) -> usize;

    fn point(&self, index: usize, out: &mut [f64]) -> Result<()>;
}

/// Applies a univariate quantile to every coordinate of `unit`.
///
/// With `clamp`, coordinates equal to 0 (or 1) are moved to [`CLAMP_EPS`]
/// (or `1 - CLAMP_EPS`) first; without it they are an error.
pub fn transform_point<Q>(unit: &[f64], out: &mut [f64], quantile: Q, clamp: bool) -> Result<()>
where
    Q: Fn(f64) -> f64,
{
    for (o, &u) in out.iter_mut().zip(unit) {
        let u = if u > 0.0 && u < 1.0 {
            u
        } else if clamp && u == 0.0 {
            CLAMP_EPS
        } else if clamp && u == 1.0 {
            1.0 - CLAMP_EPS
        } else {
            return Err(Error::invalid(format!(
                "coordinate {u} is outside (0, 1); the quantile diverges"
            )));
        };
        *o = quantile(u);
    }
    Ok(())
}

/// Lattice points mapped to `R^d` by the standard normal quantile.
#[derive(Debug, Clone)]
pub struct NormalLattice {
    rule: LatticeRule,
    clamp: bool,
}

impl NormalLattice {
    pub fn new(rule: LatticeRule) -> Self {
        NormalLattice { rule, clamp: true }
    }

    /// Turns clamping of zero coordinates off; such points then fail.
    pub fn without_clamping(mut self) -> Self {
        self.clamp = false;
        self
    }

    pub fn rule(&self) -> &LatticeRule {
        &self.rule
    }
}

impl PointSet for NormalLattice {
    fn len(&self) -> usize {
        self.rule.len()
    }

    fn dim(&self) -> usize {
        self.rule.dim()
    }

    #[inline]
    fn point(&self, index: usize, out: &mut [f64]) -> Result<()> {
        self.rule.point(index, out);
        for o in out.iter_mut() {
            let u = *o;
            if u == 0.0 && !self.clamp {
                return Err(Error::invalid(format!(
                    "lattice point {index} has a zero coordinate and clamping is off"
                )));
            }
            *o = gaussian::quantile_unchecked(if u == 0.0 { CLAMP_EPS } else { u });
        }
        Ok(())
    }
}

/// An explicit list of points, mostly for tests and small examples.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitPoints {
    dim: usize,
    coords: Vec<f64>,
}

impl ExplicitPoints {
    pub fn new(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::invalid("points have inconsistent dimensions"));
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::invalid("points must be finite"));
        }
        Ok(ExplicitPoints {
            dim,
            coords: points.iter().flatten().copied().collect(),
        })
    }
}

impl PointSet for ExplicitPoints {
    fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn point(&self, index: usize, out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(&self.coords[index * self.dim..(index + 1) * self.dim]);
        Ok(())
    }
}

impl fmt::Display for GeneratingVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n_max {}, d_max {})", self.source, self.n_max, self.d_max())
    }
}
