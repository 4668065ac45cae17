//! Sampling masks and supercover rasterization of curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kinematics::Curve;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingMask {
    dims: Vec<usize>,
    flags: Vec<bool>,
}

impl SamplingMask {
    pub fn new(dims: Vec<usize>, flags: Vec<bool>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if dims.is_empty() || n != flags.len() {
            return Err(Error::Shape(format!(
                "{} flags for dims {:?}",
                flags.len(),
                dims
            )));
        }
        Ok(SamplingMask { dims, flags })
    }

    pub fn empty(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        SamplingMask { dims, flags: vec![false; n] }
    }

    pub fn full(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        SamplingMask { dims, flags: vec![true; n] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    /// Number of measured cells `m`.
    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn get(&self, flat: usize) -> bool {
        self.flags[flat]
    }

    pub fn set(&mut self, flat: usize) {
        self.flags[flat] = true;
    }

    pub fn union_with(&mut self, other: &SamplingMask) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::Shape("mask dims differ".into()));
        }
        for (a, &b) in self.flags.iter_mut().zip(&other.flags) {
            *a |= b;
        }
        Ok(())
    }

    /// `true` when every cell of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &SamplingMask) -> bool {
        self.dims == other.dims && self.flags.iter().zip(&other.flags).all(|(&a, &b)| !a || b)
    }

    /// Flat indices of the measured cells, ascending.
    pub fn indices(&self) -> Vec<usize> {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i))
            .collect()
    }
}

/// `r = N / m`.
pub fn acceleration_factor(mask: &SamplingMask) -> Result<f64> {
    let m = mask.count();
    if m == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(mask.len() as f64 / m as f64)
}

fn check_grid(c: &Curve, grid: &Grid) -> Result<()> {
    if c.dim() != grid.ndim() {
        return Err(Error::Shape(format!(
            "curve is {}-D but the grid has {} axes",
            c.dim(),
            grid.ndim()
        )));
    }
    Ok(())
}

/// Cells containing at least one curve sample.
pub fn bin_samples(c: &Curve, grid: &Grid) -> Result<SamplingMask> {
    check_grid(c, grid)?;
    let mut mask = SamplingMask::empty(grid.dims().to_vec());
    for p in c.points() {
        if let Some(f) = grid.locate(p) {
            mask.set(f);
        }
    }
    Ok(mask)
}

/// Supercover rasterization: every cell whose closed box meets a segment
/// between consecutive samples.
///
/// Work happens in cell coordinates, where cell `i` is `[i, i + 1]`. Along a
/// segment the set of touching cells can only change where a coordinate hits
/// an integer, so the segment is evaluated at those crossings and at the
/// midpoints between them. Coordinates that sit exactly on an integer touch
/// both adjacent cells. Cells outside the grid are dropped with a warning.
pub fn rasterize_mask(c: &Curve, grid: &Grid) -> Result<SamplingMask> {
    check_grid(c, grid)?;
    let d = grid.ndim();
    let dims = grid.dims();
    let mut mask = SamplingMask::empty(dims.to_vec());
    let mut clipped = false;
    let to_cells = |p: &[f64]| -> Vec<f64> { (0..d).map(|a| grid.to_cell_coord(a, p[a])).collect() };

    let mark = |u: &[f64], mask: &mut SamplingMask, clipped: &mut bool| {
        // per-axis candidate indices: one, or two on a boundary
        let mut choices: Vec<[i64; 2]> = Vec::with_capacity(d);
        let mut counts = Vec::with_capacity(d);
        for &x in u {
            let f = x.floor();
            if x == f {
                choices.push([f as i64 - 1, f as i64]);
                counts.push(2);
            } else {
                choices.push([f as i64, f as i64]);
                counts.push(1);
            }
        }
        let combos: usize = counts.iter().product();
        'combo: for m in 0..combos {
            let mut flat = 0usize;
            let mut rem = m;
            for a in 0..d {
                let i = choices[a][rem % counts[a]];
                rem /= counts[a];
                if i < 0 || i >= dims[a] as i64 {
                    *clipped = true;
                    continue 'combo;
                }
                flat = flat * dims[a] + i as usize;
            }
            mask.set(flat);
        }
    };

    let mut prev = to_cells(c.point(0));
    mark(&prev, &mut mask, &mut clipped);
    let mut events: Vec<(f64, usize, f64)> = Vec::new();
    let mut u = vec![0.0; d];
    for i in 1..c.len() {
        let next = to_cells(c.point(i));
        // crossings (t, axis, integer value) strictly inside the segment
        events.clear();
        for a in 0..d {
            let (p, q) = (prev[a], next[a]);
            if p == q {
                continue;
            }
            let (lo, hi) = if p < q { (p, q) } else { (q, p) };
            let mut m = lo.floor() + 1.0;
            while m < hi {
                events.push(((m - p) / (q - p), a, m));
                m += 1.0;
            }
        }
        events.sort_by(|x, y| x.0.total_cmp(&y.0));
        let at = |t: f64, u: &mut [f64]| {
            for a in 0..d {
                u[a] = if prev[a] == next[a] { prev[a] } else { prev[a] + t * (next[a] - prev[a]) };
            }
        };
        let mut t_prev = 0.0;
        let mut k = 0;
        while k < events.len() {
            // group crossings that coincide (vertex/edge passes)
            let t = events[k].0;
            let mut j = k;
            while j < events.len() && (events[j].0 - t).abs() <= 1e-12 {
                j += 1;
            }
            at(0.5 * (t_prev + t), &mut u);
            mark(&u, &mut mask, &mut clipped);
            at(t, &mut u);
            for e in &events[k..j] {
                u[e.1] = e.2;
            }
            mark(&u, &mut mask, &mut clipped);
            t_prev = t;
            k = j;
        }
        at(0.5 * (t_prev + 1.0), &mut u);
        mark(&u, &mut mask, &mut clipped);
        mark(&next, &mut mask, &mut clipped);
        prev = next;
    }
    if clipped {
        log::warn!("curve leaves the k-space grid; cells outside were clipped");
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid {
        Grid::isotropic(n, 2, n as f64).unwrap()
    }

    #[test]
    fn row_sweep_marks_one_row() {
        let g = grid(8);
        // k-space row through cell centres of row 5 (ky = 1), columns 0..8
        let pts: Vec<[f64; 2]> = (0..8).map(|j| [1.0, j as f64 - 4.0]).collect();
        let c = Curve::from_points(&pts, 1.0).unwrap();
        let m = rasterize_mask(&c, &g).unwrap();
        assert_eq!(m.count(), 8);
        for j in 0..8 {
            assert!(m.get(g.flatten(&[5, j])));
        }
    }

    #[test]
    fn static_curve_is_one_cell() {
        let g = grid(16);
        let c = Curve::from_points(&[[0.2, -3.3]; 5], 1.0).unwrap();
        let m = rasterize_mask(&c, &g).unwrap();
        assert_eq!(m.count(), 1);
        assert_eq!(acceleration_factor(&m).unwrap(), 256.0);
    }

    #[test]
    fn boundary_line_touches_both_sides() {
        let g = grid(4);
        // ky = -0.5 is the boundary between rows 1 and 2; kx from centre of col 1 to col 2
        let c = Curve::from_points(&[[-1.0, -0.5], [-0.5, -0.5], [0.0, -0.5]], 1.0).unwrap();
        let m = rasterize_mask(&c, &g).unwrap();
        let mut expect: Vec<usize> = [[1, 1], [1, 2], [2, 1], [2, 2]]
            .iter()
            .map(|i| g.flatten(i))
            .collect();
        expect.sort();
        assert_eq!(m.indices(), expect);
    }

    #[test]
    fn diagonal_through_vertices() {
        let g = grid(4);
        // the main diagonal from corner to corner touches 3n − 2 closed cells
        let (lo, hi) = g.extent(0);
        let c = Curve::from_points(&[[lo, lo], [0.0, 0.0], [hi, hi]], 1.0).unwrap();
        let m = rasterize_mask(&c, &g).unwrap();
        assert_eq!(m.count(), 10);
    }

    #[test]
    fn superset_of_sample_binning() {
        let g = grid(32);
        let pts: Vec<[f64; 2]> = (0..50)
            .map(|i| {
                let t = i as f64 * 0.37;
                [10.0 * t.cos() * (t / 20.0), 12.0 * t.sin() * (t / 20.0)]
            })
            .collect();
        let c = Curve::from_points(&pts, 1.0).unwrap();
        let a = bin_samples(&c, &g).unwrap();
        let b = rasterize_mask(&c, &g).unwrap();
        assert!(a.is_subset_of(&b));
        assert!(b.count() > a.count());
    }

    #[test]
    fn acceleration_factor_values() {
        assert_eq!(acceleration_factor(&SamplingMask::full(vec![4, 4])).unwrap(), 1.0);
        let mut m = SamplingMask::empty(vec![4, 4]);
        for i in 0..8 {
            m.set(i);
        }
        assert_eq!(acceleration_factor(&m).unwrap(), 2.0);
        assert!(matches!(
            acceleration_factor(&SamplingMask::empty(vec![2, 2])),
            Err(Error::EmptyMask)
        ));
    }
}
