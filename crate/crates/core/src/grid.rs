//! Uniform tensor grids over rectangles and embedded discs.
//!
//! Disc boundaries are snapped to the grid: an in-disc node with an
//! out-of-disc 4-neighbour is a boundary node. This is first-order geometry.

use crate::error::{Error, Result};
use crate::prelude::*;
use alloc::format;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disc { center: [f64; 2], radius: f64 },
}

impl Domain {
    /// Euclidean diameter.
    pub fn diameter(&self) -> f64 {
        match *self {
            Domain::Rectangle { x0, x1, y0, y1 } => (x1 - x0).hypot(y1 - y0),
            Domain::Disc { radius, .. } => 2.0 * radius,
        }
    }

    /// Center and radius of the smallest disc containing the domain.
    pub fn circumcircle(&self) -> ([f64; 2], f64) {
        match *self {
            Domain::Rectangle { x0, x1, y0, y1 } => {
                ([0.5 * (x0 + x1), 0.5 * (y0 + y1)], 0.5 * (x1 - x0).hypot(y1 - y0))
            }
            Domain::Disc { center, radius } => (center, radius),
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            Domain::Rectangle { x0, x1, y0, y1 } => p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1,
            Domain::Disc { center, radius } => {
                (p[0] - center[0]).hypot(p[1] - center[1]) <= radius * (1.0 + 1e-12)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    Boundary,
    Exterior,
}

/// A boundary node with its outward unit normal and arc-length weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode {
    pub node: usize,
    pub normal: [f64; 2],
    pub weight: f64,
}

const NO_SLOT: u32 = u32::MAX;

/// Space-time grid: `nx × ny` nodes, `nt` steps of size `t_final / nt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    domain: Domain,
    nx: usize,
    ny: usize,
    x0: f64,
    y0: f64,
    hx: f64,
    hy: f64,
    nt: usize,
    t_final: f64,
    kinds: Vec<NodeKind>,
    boundary: Vec<BoundaryNode>,
    interior: Vec<usize>,
    interior_slot: Vec<u32>,
    area_weights: Vec<f64>,
}

impl Grid {
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize, t_final: f64, nt: usize) -> Result<Self> {
        check_sizes(nx, ny, nt, t_final)?;
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::Argument(format!("degenerate rectangle [{x0},{x1}]x[{y0},{y1}]")));
        }
        let hx = (x1 - x0) / (nx - 1) as f64;
        let hy = (y1 - y0) / (ny - 1) as f64;
        let mut kinds = vec![NodeKind::Interior; nx * ny];
        let mut boundary = Vec::new();
        let mut area_weights = vec![0.0; nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                let k = iy * nx + ix;
                let on_x = ix == 0 || ix == nx - 1;
                let on_y = iy == 0 || iy == ny - 1;
                let wx = if on_x { 0.5 * hx } else { hx };
                let wy = if on_y { 0.5 * hy } else { hy };
                area_weights[k] = wx * wy;
                if on_x || on_y {
                    kinds[k] = NodeKind::Boundary;
                    let mut n = [0.0, 0.0];
                    if ix == 0 {
                        n[0] -= 1.0;
                    }
                    if ix == nx - 1 {
                        n[0] += 1.0;
                    }
                    if iy == 0 {
                        n[1] -= 1.0;
                    }
                    if iy == ny - 1 {
                        n[1] += 1.0;
                    }
                    let len = n[0].hypot(n[1]);
                    let weight = match (on_x, on_y) {
                        (true, true) => 0.5 * (hx + hy),
                        (true, false) => hy,
                        _ => hx,
                    };
                    boundary.push(BoundaryNode { node: k, normal: [n[0] / len, n[1] / len], weight });
                }
            }
        }
        Ok(Self::assemble(Domain::Rectangle { x0, x1, y0, y1 }, nx, ny, x0, y0, hx, hy, nt, t_final, kinds, boundary, area_weights))
    }

    /// Disc embedded in its bounding square `[c − R, c + R]²`.
    pub fn disc(center: [f64; 2], radius: f64, nx: usize, ny: usize, t_final: f64, nt: usize) -> Result<Self> {
        check_sizes(nx, ny, nt, t_final)?;
        if !(radius > 0.0) {
            return Err(Error::Argument(format!("disc radius {radius} must be positive")));
        }
        let domain = Domain::Disc { center, radius };
        let x0 = center[0] - radius;
        let y0 = center[1] - radius;
        let hx = 2.0 * radius / (nx - 1) as f64;
        let hy = 2.0 * radius / (ny - 1) as f64;
        let inside = |ix: isize, iy: isize| -> bool {
            if ix < 0 || iy < 0 || ix >= nx as isize || iy >= ny as isize {
                return false;
            }
            domain.contains([x0 + ix as f64 * hx, y0 + iy as f64 * hy])
        };
        let mut kinds = vec![NodeKind::Exterior; nx * ny];
        let mut area_weights = vec![0.0; nx * ny];
        let mut boundary = Vec::new();
        let mut angles = Vec::new();
        for iy in 0..ny {
            for ix in 0..nx {
                let (i, j) = (ix as isize, iy as isize);
                if !inside(i, j) {
                    continue;
                }
                let k = iy * nx + ix;
                area_weights[k] = hx * hy;
                if inside(i - 1, j) && inside(i + 1, j) && inside(i, j - 1) && inside(i, j + 1) {
                    kinds[k] = NodeKind::Interior;
                } else {
                    kinds[k] = NodeKind::Boundary;
                    let dx = x0 + ix as f64 * hx - center[0];
                    let dy = y0 + iy as f64 * hy - center[1];
                    let len = dx.hypot(dy);
                    if len == 0.0 {
                        return Err(Error::Geometry("disc too coarse: center node on boundary".into()));
                    }
                    boundary.push(BoundaryNode { node: k, normal: [dx / len, dy / len], weight: 0.0 });
                    angles.push(dy.atan2(dx));
                }
            }
        }
        if boundary.len() < 3 {
            return Err(Error::Geometry("disc resolved by fewer than 3 boundary nodes".into()));
        }
        // arc-length weights from the angular gaps between sorted boundary nodes
        let mut order: Vec<usize> = (0..boundary.len()).collect();
        order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]));
        let m = order.len();
        for pos in 0..m {
            let prev = angles[order[(pos + m - 1) % m]];
            let next = angles[order[(pos + 1) % m]];
            let mut gap = next - prev;
            if gap <= 0.0 {
                gap += 2.0 * core::f64::consts::PI;
            }
            boundary[order[pos]].weight = 0.5 * gap * radius;
        }
        Ok(Self::assemble(domain, nx, ny, x0, y0, hx, hy, nt, t_final, kinds, boundary, area_weights))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        domain: Domain,
        nx: usize,
        ny: usize,
        x0: f64,
        y0: f64,
        hx: f64,
        hy: f64,
        nt: usize,
        t_final: f64,
        kinds: Vec<NodeKind>,
        boundary: Vec<BoundaryNode>,
        area_weights: Vec<f64>,
    ) -> Self {
        let mut interior = Vec::new();
        let mut interior_slot = vec![NO_SLOT; nx * ny];
        for (k, kind) in kinds.iter().enumerate() {
            if *kind == NodeKind::Interior {
                interior_slot[k] = interior.len() as u32;
                interior.push(k);
            }
        }
        Self { domain, nx, ny, x0, y0, hx, hy, nt, t_final, kinds, boundary, interior, interior_slot, area_weights }
    }

    /// Same spatial layout with a different time discretization.
    pub fn with_time(&self, t_final: f64, nt: usize) -> Result<Self> {
        check_sizes(self.nx, self.ny, nt, t_final)?;
        let mut g = self.clone();
        g.t_final = t_final;
        g.nt = nt;
        Ok(g)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn hx(&self) -> f64 {
        self.hx
    }
    pub fn hy(&self) -> f64 {
        self.hy
    }
    pub fn origin(&self) -> [f64; 2] {
        [self.x0, self.y0]
    }
    pub fn nt(&self) -> usize {
        self.nt
    }
    /// Number of time levels, `nt + 1`.
    pub fn levels(&self) -> usize {
        self.nt + 1
    }
    pub fn t_final(&self) -> f64 {
        self.t_final
    }
    pub fn dt(&self) -> f64 {
        self.t_final / self.nt as f64
    }
    pub fn time(&self, level: usize) -> f64 {
        if level == self.nt {
            self.t_final
        } else {
            level as f64 * self.dt()
        }
    }
    pub fn n_nodes(&self) -> usize {
        self.nx * self.ny
    }
    pub fn node(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }
    pub fn ij(&self, node: usize) -> (usize, usize) {
        (node % self.nx, node / self.nx)
    }
    pub fn coords(&self, node: usize) -> [f64; 2] {
        let (ix, iy) = self.ij(node);
        [self.x0 + ix as f64 * self.hx, self.y0 + iy as f64 * self.hy]
    }
    pub fn kind(&self, node: usize) -> NodeKind {
        self.kinds[node]
    }
    pub fn is_active(&self, node: usize) -> bool {
        self.kinds[node] != NodeKind::Exterior
    }
    pub fn boundary(&self) -> &[BoundaryNode] {
        &self.boundary
    }
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }
    /// Position of an interior node in [`Grid::interior`].
    pub fn interior_slot(&self, node: usize) -> Option<usize> {
        match self.interior_slot[node] {
            NO_SLOT => None,
            s => Some(s as usize),
        }
    }
    /// Spatial quadrature weight (trapezoidal on rectangles, cell area on discs).
    pub fn area_weight(&self, node: usize) -> f64 {
        self.area_weights[node]
    }
    pub fn area_weights(&self) -> &[f64] {
        &self.area_weights
    }
    pub fn area(&self) -> f64 {
        self.area_weights.iter().sum()
    }
    /// Trapezoidal weight of a time level.
    pub fn time_weight(&self, level: usize) -> f64 {
        if level == 0 || level == self.nt {
            0.5 * self.dt()
        } else {
            self.dt()
        }
    }
    /// Fine neighbour lookup returning `None` outside the array or domain.
    pub fn neighbor(&self, node: usize, dx: isize, dy: isize) -> Option<usize> {
        let (ix, iy) = self.ij(node);
        let jx = ix as isize + dx;
        let jy = iy as isize + dy;
        if jx < 0 || jy < 0 || jx >= self.nx as isize || jy >= self.ny as isize {
            return None;
        }
        let k = jy as usize * self.nx + jx as usize;
        if self.is_active(k) {
            Some(k)
        } else {
            None
        }
    }
}

fn check_sizes(nx: usize, ny: usize, nt: usize, t_final: f64) -> Result<()> {
    if nx < 3 || ny < 3 {
        return Err(Error::Argument(format!("grid needs at least 3x3 nodes, got {nx}x{ny}")));
    }
    if nt == 0 || !(t_final > 0.0) {
        return Err(Error::Argument(format!("need nt >= 1 and T > 0, got nt = {nt}, T = {t_final}")));
    }
    Ok(())
}
