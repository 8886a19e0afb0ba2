//! Point processes in a rectangular window.
//!
//! A [`Window`] is either a torus (distances wrap around, which emulates an
//! infinite homogeneous field) or a plain rectangle used for ingested
//! topologies. Points are stored in window coordinates `[0, width) x [0, height)`.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    width: f64,
    height: f64,
    toroidal: bool,
}

impl Window {
    pub fn new(width: f64, height: f64, toroidal: bool) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::invalid(
                "width",
                format!("must be positive, got {width}"),
            ));
        }
        if !(height.is_finite() && height > 0.0) {
            return Err(Error::invalid(
                "height",
                format!("must be positive, got {height}"),
            ));
        }
        Ok(Window {
            width,
            height,
            toroidal,
        })
    }

    /// Square torus of side `side`.
    pub fn torus(side: f64) -> Result<Self> {
        Self::new(side, side, true)
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn is_toroidal(&self) -> bool {
        self.toroidal
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn center(&self) -> Point {
        Point::new(self.width / 2.0, self.height / 2.0)
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    /// Largest radius for which a disk on the torus does not overlap itself.
    pub fn max_toroidal_radius(&self) -> f64 {
        0.5 * self.width.min(self.height)
    }

    /// Squared distance, wrapping around on a torus.
    pub fn distance_sq(&self, a: Point, b: Point) -> f64 {
        let mut dx = (a.x - b.x).abs();
        let mut dy = (a.y - b.y).abs();
        if self.toroidal {
            dx = dx.min(self.width - dx);
            dy = dy.min(self.height - dy);
        }
        dx * dx + dy * dy
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point::new(
            rng.random::<f64>() * self.width,
            rng.random::<f64>() * self.height,
        )
    }

    /// Wraps a point back into the torus; identity for plain windows.
    pub fn wrap(&self, p: Point) -> Point {
        if !self.toroidal {
            return p;
        }
        Point::new(p.x.rem_euclid(self.width), p.y.rem_euclid(self.height))
    }

    fn check_radius(&self, radius: f64) -> Result<()> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(
                "radius",
                format!("must be positive, got {radius}"),
            ));
        }
        if self.toroidal && radius > self.max_toroidal_radius() {
            return Err(Error::invalid(
                "radius",
                format!(
                    "{radius} exceeds half the torus span {}",
                    self.max_toroidal_radius()
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointSource {
    Synthetic,
    Ingested,
}

/// Cache locations inside a window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSet {
    points: Vec<Point>,
    window: Window,
    source: PointSource,
}

impl PointSet {
    pub fn new(points: Vec<Point>, window: Window, source: PointSource) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !window.contains(**p)) {
            return Err(Error::invalid(
                "points",
                format!("({}, {}) lies outside the window", p.x, p.y),
            ));
        }
        Ok(PointSet {
            points,
            window,
            source,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn source(&self) -> PointSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points per unit area of the window.
    pub fn density(&self) -> f64 {
        self.points.len() as f64 / self.window.area()
    }

    /// Union with another point set on the same window.
    pub fn union(&self, other: &PointSet) -> Result<PointSet> {
        if self.window != other.window {
            return Err(Error::invalid(
                "window",
                "point sets live on different windows",
            ));
        }
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        Ok(PointSet {
            points,
            window: self.window,
            source: self.source,
        })
    }
}

/// Homogeneous Poisson process of intensity `density` on `window`.
pub fn sample_poisson<R: Rng + ?Sized>(
    density: f64,
    window: Window,
    rng: &mut R,
) -> Result<PointSet> {
    if !(density.is_finite() && density > 0.0) {
        return Err(Error::invalid(
            "density",
            format!("must be positive, got {density}"),
        ));
    }
    let mean = density * window.area();
    let count = Poisson::new(mean)
        .map_err(|e| Error::invalid("density", e.to_string()))?
        .sample(rng) as usize;
    let points = (0..count).map(|_| window.sample_uniform(rng)).collect();
    Ok(PointSet {
        points,
        window,
        source: PointSource::Synthetic,
    })
}

/// Keeps each point independently with probability `keep_prob`.
pub fn thin<R: Rng + ?Sized>(points: &PointSet, keep_prob: f64, rng: &mut R) -> Result<PointSet> {
    if !(0.0..=1.0).contains(&keep_prob) {
        return Err(Error::invalid(
            "keep_prob",
            format!("must lie in [0, 1], got {keep_prob}"),
        ));
    }
    let kept = points
        .points
        .iter()
        .copied()
        .filter(|_| rng.random_bool(keep_prob))
        .collect();
    Ok(PointSet {
        points: kept,
        window: points.window,
        source: points.source,
    })
}

/// Points within distance `radius` of `center` (boundary included).
pub fn count_in_range(points: &PointSet, center: Point, radius: f64) -> Result<usize> {
    points.window.check_radius(radius)?;
    let r2 = radius * radius;
    Ok(points
        .points
        .iter()
        .filter(|p| points.window.distance_sq(**p, center) <= r2)
        .count())
}

/// Uniform bucket grid over a point set for repeated range and nearest
/// queries.
#[derive(Debug, Clone)]
pub struct GridIndex<'a> {
    set: &'a PointSet,
    nx: usize,
    ny: usize,
    cell_w: f64,
    cell_h: f64,
    buckets: Vec<Vec<u32>>,
}

impl<'a> GridIndex<'a> {
    /// Builds a grid whose cells are roughly `cell` on a side, coarsened so
    /// that there are at most about two cells per point.
    pub fn new(set: &'a PointSet, cell: f64) -> Self {
        let w = set.window.width;
        let h = set.window.height;
        let cell = cell.max((w * h / (2.0 * set.points.len().max(1) as f64)).sqrt());
        let cap = |span: f64| ((span / cell).floor() as usize).clamp(1, 4096);
        let nx = cap(w);
        let ny = cap(h);
        let cell_w = w / nx as f64;
        let cell_h = h / ny as f64;
        let mut buckets = vec![Vec::new(); nx * ny];
        for (i, p) in set.points.iter().enumerate() {
            let (cx, cy) = cell_of(p, cell_w, cell_h, nx, ny);
            buckets[cy * nx + cx].push(i as u32);
        }
        GridIndex {
            set,
            nx,
            ny,
            cell_w,
            cell_h,
            buckets,
        }
    }

    pub fn point_set(&self) -> &PointSet {
        self.set
    }

    /// Calls `visit(index, distance_sq)` for every point within `radius`.
    pub fn for_each_within(&self, center: Point, radius: f64, mut visit: impl FnMut(usize, f64)) {
        let window = &self.set.window;
        let r2 = radius * radius;
        let xs = axis_cells(center.x, radius, self.cell_w, self.nx, window.toroidal);
        let ys = axis_cells(center.y, radius, self.cell_h, self.ny, window.toroidal);
        for &cy in &ys {
            for &cx in &xs {
                for &i in &self.buckets[cy * self.nx + cx] {
                    let d2 = window.distance_sq(self.set.points[i as usize], center);
                    if d2 <= r2 {
                        visit(i as usize, d2);
                    }
                }
            }
        }
    }

    pub fn count_within(&self, center: Point, radius: f64) -> usize {
        let mut n = 0;
        self.for_each_within(center, radius, |_, _| n += 1);
        n
    }

    /// Closest point to `center` and its squared distance.
    pub fn nearest(&self, center: Point) -> Option<(usize, f64)> {
        if self.set.is_empty() {
            return None;
        }
        let window = &self.set.window;
        let (ccx, ccy) = cell_of(&center, self.cell_w, self.cell_h, self.nx, self.ny);
        let cell_min = self.cell_w.min(self.cell_h);
        let mut best: Option<(usize, f64)> = None;
        let consider = |i: u32, best: &mut Option<(usize, f64)>| {
            let d2 = window.distance_sq(self.set.points[i as usize], center);
            if best.is_none_or(|(_, b)| d2 < b) {
                *best = Some((i as usize, d2));
            }
        };
        let mut ring = 0usize;
        loop {
            if 2 * ring + 1 >= self.nx.min(self.ny) {
                // Ring would wrap onto itself or leave the grid: finish exhaustively.
                for i in 0..self.set.points.len() as u32 {
                    consider(i, &mut best);
                }
                return best;
            }
            let r = ring as isize;
            for dy in -r..=r {
                for dx in -r..=r {
                    if dx.abs() != r && dy.abs() != r {
                        continue;
                    }
                    let Some(cell) = self.offset_cell(ccx, ccy, dx, dy) else {
                        continue;
                    };
                    for &i in &self.buckets[cell] {
                        consider(i, &mut best);
                    }
                }
            }
            if let Some((_, b)) = best {
                let reach = ring as f64 * cell_min;
                if b <= reach * reach {
                    return best;
                }
            }
            ring += 1;
        }
    }

    fn offset_cell(&self, cx: usize, cy: usize, dx: isize, dy: isize) -> Option<usize> {
        let shift = |c: usize, d: isize, n: usize| -> Option<usize> {
            let v = c as isize + d;
            if self.set.window.toroidal {
                Some(v.rem_euclid(n as isize) as usize)
            } else if v < 0 || v >= n as isize {
                None
            } else {
                Some(v as usize)
            }
        };
        Some(shift(cy, dy, self.ny)? * self.nx + shift(cx, dx, self.nx)?)
    }
}

fn cell_of(p: &Point, cell_w: f64, cell_h: f64, nx: usize, ny: usize) -> (usize, usize) {
    let cx = ((p.x / cell_w).floor().max(0.0) as usize).min(nx - 1);
    let cy = ((p.y / cell_h).floor().max(0.0) as usize).min(ny - 1);
    (cx, cy)
}

/// Cell indices along one axis touched by `[c - r, c + r]`, each once.
fn axis_cells(c: f64, r: f64, cell: f64, n: usize, toroidal: bool) -> Vec<usize> {
    let lo = ((c - r) / cell).floor() as isize;
    let hi = ((c + r) / cell).floor() as isize;
    if toroidal {
        if hi - lo + 1 >= n as isize {
            return (0..n).collect();
        }
        (lo..=hi)
            .map(|i| i.rem_euclid(n as isize) as usize)
            .collect()
    } else {
        let lo = lo.max(0);
        let hi = hi.min(n as isize - 1);
        (lo..=hi).map(|i| i as usize).collect()
    }
}

/// Reads a positions file: one `x,y` pair per line in planar meters relative
/// to an origin corner, with an optional header line.
///
/// The window is `area` when given, otherwise the bounding box of the data
/// anchored at the origin. Coordinates outside the window are rejected.
pub fn load_positions(path: impl AsRef<Path>, area: Option<(f64, f64)>) -> Result<PointSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut points = Vec::new();
    let mut first_content = true;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let is_first = std::mem::take(&mut first_content);
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match fields.as_slice() {
            [a, b] => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()),
            _ => None,
        };
        let Some((x, y)) = parsed else {
            if is_first {
                continue;
            }
            return Err(parse_err(
                lineno + 1,
                format!("expected `x,y`, found `{line}`"),
            ));
        };
        if !(x.is_finite() && y.is_finite()) {
            return Err(parse_err(lineno + 1, "coordinates must be finite".into()));
        }
        if x < 0.0 || y < 0.0 {
            return Err(parse_err(
                lineno + 1,
                format!("({x}, {y}) lies before the origin corner"),
            ));
        }
        points.push(Point::new(x, y));
    }
    if points.is_empty() {
        return Err(parse_err(0, "no positions found".into()));
    }
    let window = match area {
        Some((w, h)) => Window::new(w, h, false)?,
        None => {
            let w = points.iter().map(|p| p.x).fold(0.0, f64::max);
            let h = points.iter().map(|p| p.y).fold(0.0, f64::max);
            Window::new(w, h, false)?
        }
    };
    PointSet::new(points, window, PointSource::Ingested).map_err(|e| match e {
        Error::InvalidParameter { reason, .. } => parse_err(0, reason),
        other => other,
    })
}

/// Writes points as `x,y` lines with a header.
pub fn write_positions(points: &PointSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("x,y\n");
    for p in &points.points {
        out.push_str(&format!("{},{}\n", p.x, p.y));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
