use alloc::collections::VecDeque;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::matrix::{normalized, MAX_DIM};

/// Ghost cells added on every side of the bounding box.
pub const PADDING: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum DomainShape {
    /// `|x| < 1` in the plane.
    UnitDisk,
    /// `|x| < 1` in three dimensions.
    UnitBall3d,
    /// `|x_i| < half_side` in the plane.
    Square { half_side: f64 },
    /// `|x_i| < half_widths[i]`.
    Rectangle { half_widths: Vec<f64> },
    /// Cells flagged by the caller.
    ExplicitMask,
}

/// Boundary cell of the mask with an outward unit normal estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCell {
    pub index: usize,
    pub normal: [f64; MAX_DIM],
}

/// Face between a cell of the mask and one outside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFace {
    /// Inside cell adjacent to the face.
    pub cell: usize,
    pub axis: usize,
    /// `+1` if the outward normal points along `+e_axis`.
    pub sign: i8,
    pub center: [f64; MAX_DIM],
    pub area: f64,
}

impl BoundaryFace {
    pub fn normal(&self) -> [f64; MAX_DIM] {
        let mut n = [0.0; MAX_DIM];
        n[self.axis] = self.sign as f64;
        n
    }
}

/// Uniform cell-centred grid over a padded bounding box with a mask of the
/// domain `Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    shape: DomainShape,
    d: usize,
    n: usize,
    spacing: f64,
    /// Lower corner of the padded box.
    origin: [f64; MAX_DIM],
    dims: [usize; MAX_DIM],
    mask: Vec<bool>,
    inside: Vec<usize>,
    boundary: Vec<BoundaryCell>,
    faces: Vec<BoundaryFace>,
}

impl GridDomain {
    /// Unit disk on `[-1, 1]²` with `n` cells per side.
    pub fn unit_disk(n: usize) -> Result<Self> {
        Self::analytic(DomainShape::UnitDisk, 2, n, &[1.0, 1.0])
    }

    /// Unit ball on `[-1, 1]³` with `n` cells per side.
    pub fn unit_ball(n: usize) -> Result<Self> {
        Self::analytic(DomainShape::UnitBall3d, 3, n, &[1.0, 1.0, 1.0])
    }

    pub fn square(n: usize, half_side: f64) -> Result<Self> {
        if !(half_side > 0.0 && half_side.is_finite()) {
            return Err(invalid("square half side must be positive"));
        }
        Self::analytic(
            DomainShape::Square { half_side },
            2,
            n,
            &[half_side, half_side],
        )
    }

    /// Box `∏ (−a_i, a_i)` with `n` cells along the first axis; the other
    /// half widths must be commensurate with the resulting spacing.
    pub fn rectangle(n: usize, half_widths: &[f64]) -> Result<Self> {
        let d = half_widths.len();
        if !(2..=MAX_DIM).contains(&d) {
            return Err(invalid("rectangle dimension must be 2..=4"));
        }
        if half_widths.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(invalid("rectangle half widths must be positive"));
        }
        Self::analytic(
            DomainShape::Rectangle {
                half_widths: half_widths.to_vec(),
            },
            d,
            n,
            half_widths,
        )
    }

    /// Domain given by a mask on a `counts`-shaped grid with the given
    /// spacing and lower corner; padding is added around it.
    pub fn from_mask(
        counts: &[usize],
        spacing: f64,
        lower_corner: &[f64],
        mask: &[bool],
    ) -> Result<Self> {
        let d = counts.len();
        if !(2..=MAX_DIM).contains(&d) || lower_corner.len() != d {
            return Err(invalid("mask dimension must be 2..=4"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(invalid("spacing must be positive"));
        }
        let total: usize = counts.iter().product();
        if mask.len() != total {
            return Err(invalid("mask length does not match grid counts"));
        }
        let mut dims = [1; MAX_DIM];
        let mut origin = [0.0; MAX_DIM];
        for a in 0..d {
            dims[a] = counts[a] + 2 * PADDING;
            origin[a] = lower_corner[a] - PADDING as f64 * spacing;
        }
        let mut grid = GridDomain {
            shape: DomainShape::ExplicitMask,
            d,
            n: counts[0],
            spacing,
            origin,
            dims,
            mask: alloc::vec![false; dims[..d].iter().product()],
            inside: Vec::new(),
            boundary: Vec::new(),
            faces: Vec::new(),
        };
        for (k, &m) in mask.iter().enumerate() {
            if m {
                let mut rem = k;
                let mut idx = [0; MAX_DIM];
                for a in 0..d {
                    idx[a] = rem % counts[a] + PADDING;
                    rem /= counts[a];
                }
                let i = grid.index(&idx[..d]);
                grid.mask[i] = true;
            }
        }
        grid.finish()?;
        Ok(grid)
    }

    fn analytic(shape: DomainShape, d: usize, n: usize, half: &[f64]) -> Result<Self> {
        if n < 4 {
            return Err(invalid("need at least 4 cells per side"));
        }
        let spacing = 2.0 * half[0] / n as f64;
        let mut dims = [1; MAX_DIM];
        let mut origin = [0.0; MAX_DIM];
        for a in 0..d {
            let cells = 2.0 * half[a] / spacing;
            let rounded = cells.round();
            if (cells - rounded).abs() > 1e-9 * cells {
                return Err(invalid(
                    "half widths are not commensurate with the grid spacing",
                ));
            }
            dims[a] = rounded as usize + 2 * PADDING;
            origin[a] = -half[a] - PADDING as f64 * spacing;
        }
        let total = dims[..d].iter().product();
        let mut grid = GridDomain {
            shape,
            d,
            n,
            spacing,
            origin,
            dims,
            mask: alloc::vec![false; total],
            inside: Vec::new(),
            boundary: Vec::new(),
            faces: Vec::new(),
        };
        for i in 0..total {
            let x = grid.center(i);
            grid.mask[i] = grid.shape_contains(&x[..d]);
        }
        grid.finish()?;
        Ok(grid)
    }

    fn shape_contains(&self, x: &[f64]) -> bool {
        match &self.shape {
            DomainShape::UnitDisk | DomainShape::UnitBall3d => {
                x.iter().map(|v| v * v).sum::<f64>() < 1.0
            }
            DomainShape::Square { half_side } => x.iter().all(|v| v.abs() < *half_side),
            DomainShape::Rectangle { half_widths } => {
                x.iter().zip(half_widths).all(|(v, a)| v.abs() < *a)
            }
            DomainShape::ExplicitMask => false,
        }
    }

    /// Distance from `x` to `∂Ω` for the analytic shapes (positive inside).
    pub fn analytic_boundary_distance(&self, x: &[f64]) -> Option<f64> {
        match &self.shape {
            DomainShape::UnitDisk | DomainShape::UnitBall3d => {
                Some(1.0 - x.iter().map(|v| v * v).sum::<f64>().sqrt())
            }
            DomainShape::Square { half_side } => Some(
                x.iter()
                    .map(|v| half_side - v.abs())
                    .fold(f64::INFINITY, f64::min),
            ),
            DomainShape::Rectangle { half_widths } => Some(
                x.iter()
                    .zip(half_widths)
                    .map(|(v, a)| a - v.abs())
                    .fold(f64::INFINITY, f64::min),
            ),
            DomainShape::ExplicitMask => None,
        }
    }

    fn finish(&mut self) -> Result<()> {
        self.inside = (0..self.mask.len()).filter(|&i| self.mask[i]).collect();
        if self.inside.is_empty() {
            return Err(invalid("domain mask is empty"));
        }
        if !self.is_connected() {
            return Err(invalid("domain mask is not connected"));
        }
        let d = self.d;
        let s = self.spacing;
        let area = s.powi(d as i32 - 1);
        let mut boundary = Vec::new();
        let mut faces = Vec::new();
        for &i in &self.inside {
            let mut outward = [0.0; MAX_DIM];
            let mut on_boundary = false;
            for a in 0..d {
                for dir in [-1i32, 1] {
                    let outside = match self.neighbor(i, a, dir) {
                        Some(j) => !self.mask[j],
                        None => true,
                    };
                    if outside {
                        on_boundary = true;
                        outward[a] += dir as f64;
                        let mut center = self.center(i);
                        center[a] += 0.5 * dir as f64 * s;
                        faces.push(BoundaryFace {
                            cell: i,
                            axis: a,
                            sign: dir as i8,
                            center,
                            area,
                        });
                    }
                }
            }
            if on_boundary {
                let x = self.center(i);
                let normal = match &self.shape {
                    DomainShape::UnitDisk | DomainShape::UnitBall3d => normalized(&x[..d]),
                    DomainShape::Square { .. } | DomainShape::Rectangle { .. } => {
                        normalized(&outward[..d])
                    }
                    DomainShape::ExplicitMask => {
                        normalized(&self.distance_gradient(i)).or(normalized(&outward[..d]))
                    }
                };
                let normal = normal.or(normalized(&outward[..d])).unwrap_or_else(|| {
                    let mut e = [0.0; MAX_DIM];
                    e[0] = 1.0;
                    e
                });
                boundary.push(BoundaryCell { index: i, normal });
            }
        }
        self.boundary = boundary;
        self.faces = faces;
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let mut seen = alloc::vec![false; self.mask.len()];
        let mut queue = VecDeque::new();
        queue.push_back(self.inside[0]);
        seen[self.inside[0]] = true;
        let mut count = 0;
        while let Some(i) = queue.pop_front() {
            count += 1;
            for a in 0..self.d {
                for dir in [-1, 1] {
                    if let Some(j) = self.neighbor(i, a, dir) {
                        if self.mask[j] && !seen[j] {
                            seen[j] = true;
                            queue.push_back(j);
                        }
                    }
                }
            }
        }
        count == self.inside.len()
    }

    /// Signed distance (positive inside) from a cell centre to the mask
    /// boundary, searched over a window of `WINDOW` cells.
    fn signed_distance(&self, i: usize) -> f64 {
        const WINDOW: i64 = 5;
        let d = self.d;
        let inside = self.mask[i];
        let base = self.multi(i);
        let mut best = f64::INFINITY;
        let side = (2 * WINDOW + 1) as usize;
        let total = side.pow(d as u32);
        for k in 0..total {
            let mut rem = k;
            let mut off = [0i64; MAX_DIM];
            let mut idx = [0usize; MAX_DIM];
            let mut valid = true;
            for a in 0..d {
                off[a] = (rem % side) as i64 - WINDOW;
                rem /= side;
                let v = base[a] as i64 + off[a];
                if v < 0 || v >= self.dims[a] as i64 {
                    valid = false;
                    break;
                }
                idx[a] = v as usize;
            }
            let other_inside = if valid {
                self.mask[self.index(&idx[..d])]
            } else {
                false
            };
            if other_inside != inside {
                let r = off[..d]
                    .iter()
                    .map(|o| (*o * *o) as f64)
                    .sum::<f64>()
                    .sqrt();
                best = best.min(r);
            }
        }
        // The interface lies halfway between cell centres of opposite type.
        let dist = (best - 0.5).max(0.0) * self.spacing;
        if inside {
            dist
        } else {
            -dist
        }
    }

    /// Outward direction `−∇(signed distance)` at a cell by central
    /// differences over two cells, which smooths the staircase.
    fn distance_gradient(&self, i: usize) -> [f64; MAX_DIM] {
        let mut g = [0.0; MAX_DIM];
        for a in 0..self.d {
            let step = |dir: i32| {
                self.neighbor(i, a, dir)
                    .and_then(|j| self.neighbor(j, a, dir))
                    .map(|j| self.signed_distance(j))
            };
            g[a] = match (step(1), step(-1)) {
                (Some(p), Some(m)) => m - p,
                _ => 0.0,
            };
        }
        g
    }

    pub fn shape(&self) -> &DomainShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Cells per side of the bounding box (first axis).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Padded cell counts per axis.
    pub fn dims(&self) -> &[usize] {
        &self.dims[..self.d]
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for a in (0..self.d).rev() {
            idx = idx * self.dims[a] + multi[a];
        }
        idx
    }

    pub fn multi(&self, index: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        let mut rem = index;
        for a in 0..self.d {
            out[a] = rem % self.dims[a];
            rem /= self.dims[a];
        }
        out
    }

    pub fn center(&self, index: usize) -> [f64; MAX_DIM] {
        let m = self.multi(index);
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.d {
            x[a] = self.origin[a] + (m[a] as f64 + 0.5) * self.spacing;
        }
        x
    }

    /// Neighbour `dir` (±1) steps along `axis`, if on the grid.
    pub fn neighbor(&self, index: usize, axis: usize, dir: i32) -> Option<usize> {
        let m = self.multi(index);
        let v = m[axis] as i64 + dir as i64;
        if v < 0 || v >= self.dims[axis] as i64 {
            return None;
        }
        let mut stride = 1;
        for a in 0..axis {
            stride *= self.dims[a];
        }
        Some((index as i64 + dir as i64 * stride as i64) as usize)
    }

    pub fn contains(&self, index: usize) -> bool {
        self.mask[index]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Indices of the cells in `Ω`, increasing.
    pub fn inside(&self) -> &[usize] {
        &self.inside
    }

    pub fn boundary_cells(&self) -> &[BoundaryCell] {
        &self.boundary
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.faces
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.d as i32)
    }

    /// `|Ω|` measured on the grid.
    pub fn measure(&self) -> f64 {
        self.inside.len() as f64 * self.cell_volume()
    }

    /// `|∂Ω|` measured on the staircase boundary.
    pub fn boundary_measure(&self) -> f64 {
        self.faces.iter().map(|f| f.area).sum()
    }

    /// Largest `|x|` over cell centres of `Ω`.
    pub fn radius(&self) -> f64 {
        self.inside
            .iter()
            .map(|&i| crate::matrix::norm(&self.center(i)[..self.d]))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_grid_layout() {
        let g = GridDomain::unit_disk(64).unwrap();
        assert_eq!(g.dims(), &[70, 70]);
        assert!((g.spacing() * 64.0 - 2.0).abs() < 1e-15);
        let area = g.measure();
        assert!((area - core::f64::consts::PI).abs() < 0.05);
        for b in g.boundary_cells() {
            assert!((crate::matrix::norm(&b.normal[..2]) - 1.0).abs() < 1e-14);
        }
        // Σ n·x over staircase faces is d|Ω| exactly.
        let flux: f64 = g
            .boundary_faces()
            .iter()
            .map(|f| f.sign as f64 * f.center[f.axis] * f.area)
            .sum();
        assert!((flux - 2.0 * area).abs() < 1e-12);
    }

    #[test]
    fn mask_normals_point_outward() {
        let n = 40;
        let s = 2.0 / n as f64;
        let mut mask = alloc::vec![false; n * n];
        for j in 0..n {
            for i in 0..n {
                let x = -1.0 + (i as f64 + 0.5) * s;
                let y = -1.0 + (j as f64 + 0.5) * s;
                mask[i + n * j] = x * x + y * y < 0.8;
            }
        }
        let g = GridDomain::from_mask(&[n, n], s, &[-1.0, -1.0], &mask).unwrap();
        for b in g.boundary_cells() {
            let x = g.center(b.index);
            let r = crate::matrix::norm(&x[..2]);
            let cos = (b.normal[0] * x[0] + b.normal[1] * x[1]) / r;
            assert!(cos > 0.9, "{cos}");
        }
    }

    #[test]
    fn disconnected_mask_is_rejected() {
        let mut mask = alloc::vec![false; 36];
        mask[7] = true;
        mask[28] = true;
        assert!(GridDomain::from_mask(&[6, 6], 1.0, &[0.0, 0.0], &mask).is_err());
    }
}
