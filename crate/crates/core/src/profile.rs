//! The ordered state space: grid functions with the pointwise cone order.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// One axis of a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(LabError::InvalidArgument(format!(
                "axis needs at least 3 nodes, got {n}"
            )));
        }
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(LabError::InvalidArgument(format!(
                "axis extent [{min}, {max}] is empty"
            )));
        }
        Ok(Self { min, max, n })
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.min + i as f64 * self.spacing()
    }
}

/// A uniform 1-D or 2-D grid. In 2-D, node `(i, j)` is stored at `j * nx + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn line(min: f64, max: f64, n: usize) -> Result<Self> {
        Ok(Self {
            axes: vec![Axis::new(min, max, n)?],
        })
    }

    pub fn rect(x: (f64, f64, usize), y: (f64, f64, usize)) -> Result<Self> {
        Ok(Self {
            axes: vec![Axis::new(x.0, x.1, x.2)?, Axis::new(y.0, y.1, y.2)?],
        })
    }

    pub fn from_axes(axes: Vec<Axis>) -> Result<Self> {
        match axes.len() {
            1 => Self::line(axes[0].min, axes[0].max, axes[0].n),
            2 => Self::rect(
                (axes[0].min, axes[0].max, axes[0].n),
                (axes[1].min, axes[1].max, axes[1].n),
            ),
            d => Err(LabError::InvalidArgument(format!("grids are 1-D or 2-D, got {d} axes"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nx(&self) -> usize {
        self.axes[0].n
    }

    pub fn ny(&self) -> usize {
        self.axes.get(1).map_or(1, |a| a.n)
    }

    /// Coordinates of node `idx`.
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let nx = self.nx();
        let x = self.axes[0].coord(idx % nx);
        let y = self.axes.get(1).map_or(0.0, |a| a.coord(idx / nx));
        [x, y]
    }

    /// Euclidean distance of node `idx` from the origin.
    pub fn radius(&self, idx: usize) -> f64 {
        let [x, y] = self.coords(idx);
        x.hypot(y)
    }

    /// True for nodes on the outer edge of the grid.
    pub fn is_edge(&self, idx: usize) -> bool {
        let nx = self.nx();
        let i = idx % nx;
        if i == 0 || i == nx - 1 {
            return true;
        }
        if self.dim() == 2 {
            let j = idx / nx;
            return j == 0 || j == self.ny() - 1;
        }
        false
    }
}

/// A grid function; a point of the ordered state space.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    grid: Grid,
    values: Vec<f64>,
}

impl Profile {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::InvalidArgument(format!(
                "profile has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LabError::InvalidArgument(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![c; n],
        }
    }

    /// Samples `f(x, y)` at every node (y = 0 on 1-D grids).
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let [x, y] = grid.coords(i);
                f(x, y)
            })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access for integrators; callers keep values finite.
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Profile> {
        Profile::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Profile, f: impl Fn(f64, f64) -> f64) -> Result<Profile> {
        same_grid(self, other)?;
        Profile::new(
            self.grid.clone(),
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn same_grid(u: &Profile, v: &Profile) -> Result<()> {
    if u.grid != v.grid {
        return Err(LabError::GridMismatch);
    }
    Ok(())
}

/// `u <= v + tol` at every node.
pub fn leq(u: &Profile, v: &Profile, tol: f64) -> Result<bool> {
    same_grid(u, v)?;
    Ok(u.values.iter().zip(&v.values).all(|(a, b)| *a <= *b + tol))
}

/// Largest amount by which `u` exceeds `v` (zero when `u <= v`).
pub fn order_violation(u: &Profile, v: &Profile) -> Result<f64> {
    same_grid(u, v)?;
    Ok(u.values.iter().zip(&v.values).fold(0.0, |m, (a, b)| m.max(a - b)))
}

/// Pointwise minimum, the greatest lower bound in the cone order.
pub fn wedge(u: &Profile, v: &Profile) -> Result<Profile> {
    u.zip_with(v, f64::min)
}

pub fn sup_distance(u: &Profile, v: &Profile) -> Result<f64> {
    same_grid(u, v)?;
    Ok(u.values
        .iter()
        .zip(&v.values)
        .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

/// A finite nonempty set of profiles on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSet {
    profiles: Vec<Profile>,
}

impl ProfileSet {
    pub fn new(profiles: Vec<Profile>) -> Result<Self> {
        let first = profiles
            .first()
            .ok_or_else(|| LabError::InvalidArgument("profile set must be nonempty".into()))?;
        if profiles.iter().any(|p| p.grid != first.grid) {
            return Err(LabError::GridMismatch);
        }
        Ok(Self { profiles })
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn grid(&self) -> &Grid {
        &self.profiles[0].grid
    }

    /// Largest pairwise sup-distance within the set.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in self.profiles.iter().enumerate() {
            for q in &self.profiles[i + 1..] {
                d = d.max(sup_distance(p, q).unwrap_or(f64::INFINITY));
            }
        }
        d
    }
}

/// `max{ sup_{a in A} d(a, B), sup_{b in B} d(b, A) }` with the sup-distance.
pub fn hausdorff(a: &ProfileSet, b: &ProfileSet) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(LabError::GridMismatch);
    }
    let directed = |from: &ProfileSet, to: &ProfileSet| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for p in &from.profiles {
            let mut best = f64::INFINITY;
            for q in &to.profiles {
                best = best.min(sup_distance(p, q)?);
            }
            worst = worst.max(best);
        }
        Ok(worst)
    };
    Ok(directed(a, b)?.max(directed(b, a)?))
}

/// Writes one node per row: coordinates, then value.
pub fn write_csv<W: Write>(profile: &Profile, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if profile.grid.dim() == 1 {
        w.write_record(["x", "value"])?;
    } else {
        w.write_record(["x", "y", "value"])?;
    }
    for (i, v) in profile.values.iter().enumerate() {
        let [x, y] = profile.grid.coords(i);
        if profile.grid.dim() == 1 {
            w.write_record([x.to_string(), v.to_string()])?;
        } else {
            w.write_record([x.to_string(), y.to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads the CSV layout of [`write_csv`] back onto a known grid.
pub fn read_csv<R: Read>(grid: Grid, input: R) -> Result<Profile> {
    let mut r = csv::Reader::from_reader(input);
    let col = grid.dim();
    let mut values = Vec::with_capacity(grid.len());
    for rec in r.records() {
        let rec = rec?;
        let v: f64 = rec
            .get(col)
            .ok_or_else(|| LabError::Format("missing value column".into()))?
            .parse()
            .map_err(|e| LabError::Format(format!("bad value: {e}")))?;
        values.push(v);
    }
    Profile::new(grid, values)
}

/// Binary layout, all little-endian: `u32` dimension count, then per axis
/// `f64 min, f64 max, u64 n`, then the node values as `f64`, x fastest.
pub fn to_bytes(profile: &Profile) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + 24 * profile.grid.dim() + 8 * profile.values.len());
    out.extend_from_slice(&(profile.grid.dim() as u32).to_le_bytes());
    for a in &profile.grid.axes {
        out.extend_from_slice(&a.min.to_le_bytes());
        out.extend_from_slice(&a.max.to_le_bytes());
        out.extend_from_slice(&(a.n as u64).to_le_bytes());
    }
    for v in &profile.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<Profile> {
    let mut cursor = bytes;
    let mut take = |n: usize| -> Result<&[u8]> {
        if cursor.len() < n {
            return Err(LabError::Format("truncated profile payload".into()));
        }
        let (head, rest) = cursor.split_at(n);
        cursor = rest;
        Ok(head)
    };
    let dims = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    if !(1..=2).contains(&dims) {
        return Err(LabError::Format(format!("unsupported dimension {dims}")));
    }
    let mut axes = Vec::with_capacity(dims);
    for _ in 0..dims {
        let min = f64::from_le_bytes(take(8)?.try_into().unwrap());
        let max = f64::from_le_bytes(take(8)?.try_into().unwrap());
        let n = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
        axes.push(Axis::new(min, max, n)?);
    }
    let grid = Grid::from_axes(axes)?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        values.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
    }
    if !cursor.is_empty() {
        return Err(LabError::Format("trailing bytes after profile payload".into()));
    }
    Profile::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(values: &[f64]) -> Profile {
        let n = values.len().max(3);
        let mut v = values.to_vec();
        v.resize(n, *values.last().unwrap());
        Profile::new(Grid::line(0.0, 1.0, n).unwrap(), v).unwrap()
    }

    fn consts(c: f64) -> Profile {
        Profile::constant(Grid::line(0.0, 1.0, 3).unwrap(), c)
    }

    #[test]
    fn order_examples() {
        assert!(leq(&consts(0.0), &consts(1.0), 0.0).unwrap());
        let u = line(&[0.3, 0.1, 0.2]);
        assert!(leq(&u, &u, 0.0).unwrap());
        let a = line(&[0.0, 2.0, 0.0]);
        let b = line(&[1.0, 1.0, 1.0]);
        assert!(!leq(&a, &b, 0.0).unwrap());
        assert!(!leq(&b, &a, 0.0).unwrap());
        assert!(leq(&a, &b, 1.0).unwrap());
    }

    #[test]
    fn wedge_examples() {
        let u = line(&[1.0, 2.0, 3.0]);
        let v = line(&[2.0, 1.0, 3.0]);
        assert_eq!(wedge(&u, &v).unwrap().values(), &[1.0, 1.0, 3.0]);
        assert_eq!(wedge(&u, &u).unwrap(), u);
        let w = line(&[0.0, 0.5, 1.0]);
        assert_eq!(wedge(&w, &u).unwrap(), w);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(sup_distance(&consts(0.0), &consts(1.0)).unwrap(), 1.0);
        assert_eq!(sup_distance(&consts(0.5), &consts(0.5)).unwrap(), 0.0);
        let u = line(&[0.0, 3.0, 1.0]);
        let v = line(&[1.0, 1.0, 1.0]);
        assert_eq!(sup_distance(&u, &v).unwrap(), 2.0);
    }

    #[test]
    fn hausdorff_examples() {
        let a = ProfileSet::new(vec![consts(0.0), consts(3.0)]).unwrap();
        let b = ProfileSet::new(vec![consts(1.0)]).unwrap();
        // d(0,B)=1, d(3,B)=2, d(1,A)=1
        assert_eq!(hausdorff(&a, &b).unwrap(), 2.0);
        let u = ProfileSet::new(vec![consts(0.2)]).unwrap();
        assert_eq!(hausdorff(&u, &u).unwrap(), 0.0);
        let z = ProfileSet::new(vec![consts(0.0)]).unwrap();
        let o = ProfileSet::new(vec![consts(1.0)]).unwrap();
        assert_eq!(hausdorff(&z, &o).unwrap(), 1.0);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = Profile::constant(Grid::line(0.0, 1.0, 3).unwrap(), 0.0);
        let b = Profile::constant(Grid::line(0.0, 2.0, 3).unwrap(), 0.0);
        assert_eq!(leq(&a, &b, 0.0), Err(LabError::GridMismatch));
        assert!(wedge(&a, &b).is_err());
        assert!(sup_distance(&a, &b).is_err());
        assert!(ProfileSet::new(vec![a, b]).is_err());
    }

    #[test]
    fn grid_invariants() {
        assert!(Grid::line(0.0, 1.0, 2).is_err());
        assert!(Grid::line(1.0, 1.0, 5).is_err());
        let g = Grid::rect((-1.0, 1.0, 5), (-2.0, 2.0, 3)).unwrap();
        assert_eq!(g.len(), 15);
        assert_eq!(g.coords(0), [-1.0, -2.0]);
        assert_eq!(g.coords(7), [0.0, 0.0]);
        assert!(g.is_edge(5) && !g.is_edge(7));
    }

    #[test]
    fn csv_and_binary_roundtrip() {
        let g = Grid::rect((-1.0, 1.0, 4), (0.0, 1.0, 3)).unwrap();
        let p = Profile::from_fn(g.clone(), |x, y| x * x + 0.1 * y);
        let mut buf = Vec::new();
        write_csv(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,y,value\n"));
        let back = read_csv(g, buf.as_slice()).unwrap();
        assert_eq!(back, p);

        let bytes = to_bytes(&p);
        assert_eq!(bytes.len(), 4 + 2 * 24 + 12 * 8);
        assert_eq!(&bytes[..4], &2u32.to_le_bytes());
        assert_eq!(from_bytes(&bytes).unwrap(), p);
        assert!(from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }
}
