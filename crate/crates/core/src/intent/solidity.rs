//! Fist detection on binary hand masks.
//!
//! Spread fingers leave concavities between them, so the ratio of set pixels
//! to the lattice points covered by their convex hull ("solidity") drops
//! well below 1. A closed fist is close to convex.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MaskError {
    #[error("hand mask has no set pixels")]
    Empty,
    #[error("hand mask is {width}x{height} but carries {len} pixels")]
    SizeMismatch { width: u32, height: u32, len: usize },
    #[error("malformed mask encoding: {0}")]
    Encoding(String),
}

/// Row-major binary occupancy of a hand region of interest.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HandMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl HandMask {
    pub fn new(width: u32, height: u32, bits: Vec<bool>) -> Result<Self, MaskError> {
        if bits.len() != width as usize * height as usize {
            return Err(MaskError::SizeMismatch {
                width,
                height,
                len: bits.len(),
            });
        }
        Ok(HandMask { width, height, bits })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let bits = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        HandMask { width, height, bits }
    }

    /// Parses rows like `"#.."`, `'#'` or `'1'` meaning set.
    pub fn from_rows(rows: &[&str]) -> Result<Self, MaskError> {
        let height = rows.len() as u32;
        let width = rows.first().map_or(0, |r| r.chars().count()) as u32;
        let bits: Vec<bool> = rows
            .iter()
            .flat_map(|r| r.chars().map(|c| c == '#' || c == '1'))
            .collect();
        HandMask::new(width, height, bits)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        x < self.width && y < self.height && self.bits[(y * self.width + x) as usize]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Pixel coordinates of every set bit.
    pub fn set_points(&self) -> Vec<(i64, i64)> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| ((i as u32 % self.width) as i64, (i as u32 / self.width) as i64))
            .collect()
    }

    /// Quarter turn clockwise.
    pub fn rotate90(&self) -> HandMask {
        let (w, h) = (self.width, self.height);
        HandMask::from_fn(h, w, |x, y| self.get(y, h - 1 - x))
    }

    /// Embeds the mask in a larger canvas at offset `(dx, dy)`.
    pub fn translate(&self, dx: u32, dy: u32) -> HandMask {
        HandMask::from_fn(self.width + dx, self.height + dy, |x, y| {
            x >= dx && y >= dy && self.get(x - dx, y - dy)
        })
    }

    /// Run-length text form: `"{w}x{h}:{runs}"`, runs alternating unset/set
    /// starting with unset.
    pub fn encode(&self) -> String {
        let mut out = format!("{}x{}:", self.width, self.height);
        let mut runs = Vec::new();
        let mut current = false;
        let mut run = 0u64;
        for &b in &self.bits {
            if b == current {
                run += 1;
            } else {
                runs.push(run);
                current = b;
                run = 1;
            }
        }
        runs.push(run);
        let joined: Vec<String> = runs.iter().map(u64::to_string).collect();
        out.push_str(&joined.join(","));
        out
    }

    pub fn decode(s: &str) -> Result<Self, MaskError> {
        let bad = |msg: &str| MaskError::Encoding(format!("{msg} in `{s}`"));
        let (dims, runs) = s.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let (w, h) = dims.split_once('x').ok_or_else(|| bad("missing 'x'"))?;
        let width: u32 = w.trim().parse().map_err(|_| bad("bad width"))?;
        let height: u32 = h.trim().parse().map_err(|_| bad("bad height"))?;
        let total = width as usize * height as usize;
        let mut bits = Vec::with_capacity(total);
        let mut value = false;
        for run in runs.split(',').filter(|r| !r.is_empty()) {
            let n: usize = run.trim().parse().map_err(|_| bad("bad run length"))?;
            if bits.len() + n > total {
                return Err(bad("runs overflow the mask"));
            }
            bits.extend(std::iter::repeat_n(value, n));
            value = !value;
        }
        if bits.len() != total {
            return Err(bad("runs do not fill the mask"));
        }
        HandMask::new(width, height, bits)
    }
}

impl fmt::Display for HandMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

impl FromStr for HandMask {
    type Err = MaskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        HandMask::decode(s)
    }
}

impl Serialize for HandMask {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.encode())
    }
}

impl<'de> Deserialize<'de> for HandMask {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        HandMask::decode(&s).map_err(serde::de::Error::custom)
    }
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull (monotone chain), counter-clockwise, without collinear points.
/// Degenerate inputs give one point or the two ends of a segment.
pub fn convex_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    fn chain<'a>(points: impl Iterator<Item = &'a (i64, i64)>) -> Vec<(i64, i64)> {
        let mut out: Vec<(i64, i64)> = Vec::new();
        for &p in points {
            while out.len() >= 2 && cross(out[out.len() - 2], out[out.len() - 1], p) <= 0 {
                out.pop();
            }
            out.push(p);
        }
        out.pop();
        out
    }
    let mut hull = chain(pts.iter());
    hull.extend(chain(pts.iter().rev()));
    hull
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Lattice points inside or on a convex lattice polygon, by Pick's theorem:
/// `interior = area - boundary / 2 + 1`.
pub fn hull_lattice_points(hull: &[(i64, i64)]) -> u64 {
    match hull.len() {
        0 => 0,
        1 => 1,
        2 => gcd(hull[1].0 - hull[0].0, hull[1].1 - hull[0].1) as u64 + 1,
        n => {
            let mut twice_area = 0i64;
            let mut boundary = 0i64;
            for i in 0..n {
                let a = hull[i];
                let b = hull[(i + 1) % n];
                twice_area += a.0 * b.1 - b.0 * a.1;
                boundary += gcd(b.0 - a.0, b.1 - a.1);
            }
            let twice_area = twice_area.abs();
            let interior = (twice_area - boundary + 2) / 2;
            (interior + boundary) as u64
        }
    }
}

/// Set pixels over lattice points covered by their convex hull, in `[0, 1]`.
pub fn mask_solidity(mask: &HandMask) -> Result<f64, MaskError> {
    let points = mask.set_points();
    if points.is_empty() {
        return Err(MaskError::Empty);
    }
    let covered = hull_lattice_points(&convex_hull(&points));
    Ok(points.len() as f64 / covered as f64)
}

pub fn fist_detect(mask: &HandMask, solidity_threshold: f64) -> Result<bool, MaskError> {
    Ok(mask_solidity(mask)? >= solidity_threshold)
}
