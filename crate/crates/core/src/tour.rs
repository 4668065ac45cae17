//! Approximate shortest tours through drawn k-space points.
//!
//! Construction is greedy nearest-neighbour (lowest index wins ties), followed
//! by first-improvement local search with 2-opt and Or-opt moves restricted to
//! k-nearest candidate lists. Open paths are handled by adding a dummy city at
//! distance zero from every point and cutting the closed tour there; a fixed
//! first city is obtained by making the dummy expensive to reach from anyone
//! else.

use std::num::NonZero;
use std::time::Instant;

use kiddo::{ImmutableKdTree, SquaredEuclidean};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::density::PointCloud;
use crate::error::{Error, Result};
use crate::kinematics::{dist, Curve};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tour {
    pub order: Vec<usize>,
    pub open_ended: bool,
}

impl Tour {
    pub fn is_permutation(&self, n: usize) -> bool {
        if self.order.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        self.order.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
    }

    pub fn length(&self, pc: &PointCloud) -> f64 {
        let mut len: f64 = self
            .order
            .windows(2)
            .map(|w| dist(pc.point(w[0]), pc.point(w[1])))
            .sum();
        if !self.open_ended && self.order.len() > 1 {
            len += dist(pc.point(*self.order.last().unwrap()), pc.point(self.order[0]));
        }
        len
    }

    pub fn reversed(&self) -> Tour {
        Tour {
            order: self.order.iter().rev().copied().collect(),
            open_ended: self.open_ended,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TspBudget {
    pub max_2opt_passes: usize,
    /// Wall-clock cap; results are only reproducible when it is not reached.
    pub time_limit_s: Option<f64>,
}

impl Default for TspBudget {
    fn default() -> Self {
        TspBudget {
            max_2opt_passes: 1000,
            time_limit_s: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TspOptions {
    pub budget: TspBudget,
    pub open: bool,
    /// Force the path to begin at this point index.
    pub start: Option<usize>,
    /// Size of the candidate neighbour lists.
    pub neighbors: usize,
    pub or_opt: bool,
}

impl Default for TspOptions {
    fn default() -> Self {
        TspOptions {
            budget: TspBudget::default(),
            open: true,
            start: None,
            neighbors: 16,
            or_opt: true,
        }
    }
}

/// Per-pass bookkeeping from the local search.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TspStats {
    pub nearest_neighbor_length: f64,
    /// Tour length after each improvement pass.
    pub pass_lengths: Vec<f64>,
    pub hit_time_limit: bool,
}

/// Uniform bucket grid for nearest-neighbour queries.
struct BucketIndex<'a> {
    pc: &'a PointCloud,
    lo: Vec<f64>,
    side: f64,
    shape: Vec<usize>,
    buckets: Vec<Vec<usize>>,
    /// Position of each point inside its bucket.
    slot: Vec<usize>,
}

impl<'a> BucketIndex<'a> {
    fn new(pc: &'a PointCloud) -> Self {
        let d = pc.dim;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in pc.iter() {
            for a in 0..d {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let volume: f64 = (0..d).map(|a| (hi[a] - lo[a]).max(1e-300)).product();
        // About two points per bucket.
        let mut side = (2.0 * volume / pc.len() as f64).powf(1.0 / d as f64);
        let max_extent = (0..d).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
        if !(side > 0.0) || !side.is_finite() {
            side = max_extent.max(1.0);
        }
        side = side.max(max_extent / 4096.0).max(1e-300);
        let shape: Vec<usize> = (0..d)
            .map(|a| ((hi[a] - lo[a]) / side).floor() as usize + 1)
            .collect();
        let mut idx = BucketIndex {
            pc,
            lo,
            side,
            buckets: vec![Vec::new(); shape.iter().product()],
            shape,
            slot: vec![0; pc.len()],
        };
        for i in 0..pc.len() {
            let b = idx.bucket_of(pc.point(i));
            idx.slot[i] = idx.buckets[b].len();
            idx.buckets[b].push(i);
        }
        idx
    }

    fn coords(&self, p: &[f64]) -> Vec<usize> {
        (0..p.len())
            .map(|a| {
                (((p[a] - self.lo[a]) / self.side).floor().max(0.0) as usize).min(self.shape[a] - 1)
            })
            .collect()
    }

    fn bucket_of(&self, p: &[f64]) -> usize {
        self.coords(p)
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&c, &n)| acc * n + c)
    }

    fn remove(&mut self, i: usize) {
        let b = self.bucket_of(self.pc.point(i));
        let k = self.slot[i];
        let v = &mut self.buckets[b];
        debug_assert_eq!(v[k], i);
        v.swap_remove(k);
        if let Some(&moved) = v.get(k) {
            self.slot[moved] = k;
        }
    }

    /// Visits every bucket at Chebyshev ring `r` around `center`.
    fn for_ring(&self, center: &[usize], r: usize, mut f: impl FnMut(&[usize])) {
        let d = center.len();
        let r = r as isize;
        let mut cur = vec![0isize; d];
        fn rec(
            a: usize,
            d: usize,
            r: isize,
            on_ring: bool,
            center: &[usize],
            shape: &[usize],
            cur: &mut Vec<isize>,
            buckets: &[Vec<usize>],
            f: &mut dyn FnMut(&[usize]),
        ) {
            if a == d {
                if on_ring {
                    let flat = cur
                        .iter()
                        .zip(shape)
                        .fold(0usize, |acc, (&c, &n)| acc * n + c as usize);
                    f(&buckets[flat]);
                }
                return;
            }
            for off in -r..=r {
                let c = center[a] as isize + off;
                if c < 0 || c >= shape[a] as isize {
                    continue;
                }
                // Remaining axes must reach the ring if this one does not.
                let hits = on_ring || off.abs() == r;
                if !hits && a + 1 == d {
                    continue;
                }
                cur[a] = c;
                rec(a + 1, d, r, hits, center, shape, cur, buckets, f);
            }
        }
        rec(0, d, r, false, center, &self.shape, &mut cur, &self.buckets, &mut f);
    }

    fn max_ring(&self) -> usize {
        self.shape.iter().copied().max().unwrap_or(1)
    }

    /// Nearest remaining point to `q`; ties go to the lowest index.
    fn nearest(&self, q: &[f64]) -> Option<usize> {
        let center = self.coords(q);
        let mut best: Option<(f64, usize)> = None;
        for r in 0..=self.max_ring() {
            self.for_ring(&center, r, |bucket| {
                for &j in bucket {
                    let dj = dist(q, self.pc.point(j));
                    let better = match best {
                        None => true,
                        Some((bd, bi)) => dj < bd || (dj == bd && j < bi),
                    };
                    if better {
                        best = Some((dj, j));
                    }
                }
            });
            if let Some((bd, _)) = best {
                if bd < r as f64 * self.side {
                    break;
                }
            }
        }
        best.map(|(_, j)| j)
    }

    /// The `k` nearest other points to point `i`, closest first.
    fn k_nearest(&self, i: usize, k: usize) -> Vec<usize> {
        let q = self.pc.point(i);
        let center = self.coords(q);
        let mut found: Vec<(f64, usize)> = Vec::new();
        for r in 0..=self.max_ring() {
            self.for_ring(&center, r, |bucket| {
                for &j in bucket {
                    if j != i {
                        found.push((dist(q, self.pc.point(j)), j));
                    }
                }
            });
            if found.len() >= k {
                found.sort_by(|a, b| a.partial_cmp(b).unwrap());
                if found[k - 1].0 < r as f64 * self.side {
                    break;
                }
            }
        }
        found.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // A fresh vector: collecting in place would keep the whole search buffer alive.
        found.iter().take(k).map(|&(_, j)| j).collect()
    }
}

fn knn_kdtree<const K: usize>(pc: &PointCloud, k: usize) -> Vec<Vec<usize>> {
    let pts: Vec<[f64; K]> = pc.iter().map(|p| std::array::from_fn(|a| p[a])).collect();
    let tree: ImmutableKdTree<f64, K> = ImmutableKdTree::new_from_slice(&pts);
    let want = NonZero::new(k + 1).expect("k + 1 > 0");
    pts.iter()
        .enumerate()
        .map(|(i, q)| {
            let mut found: Vec<(f64, usize)> = tree
                .nearest_n::<SquaredEuclidean>(q, want)
                .into_iter()
                .map(|nb| (nb.distance, nb.item as usize))
                .filter(|&(_, j)| j != i)
                .collect();
            found.sort_by(|a, b| a.partial_cmp(b).unwrap());
            found.iter().take(k).map(|&(_, j)| j).collect()
        })
        .collect()
}

/// The `k` nearest other points of every point, closest first, ties by index.
fn neighbor_lists(pc: &PointCloud, index: &BucketIndex, k: usize) -> Vec<Vec<usize>> {
    match pc.dim {
        1 => knn_kdtree::<1>(pc, k),
        2 => knn_kdtree::<2>(pc, k),
        3 => knn_kdtree::<3>(pc, k),
        4 => knn_kdtree::<4>(pc, k),
        _ => (0..pc.len()).map(|i| index.k_nearest(i, k)).collect(),
    }
}

/// Closed-tour local search state over `m` nodes (possibly with a dummy).
struct LocalSearch<'a> {
    pc: &'a PointCloud,
    n: usize,
    dummy: Option<usize>,
    fixed_start: Option<usize>,
    far: f64,
    tour: Vec<usize>,
    pos: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
}

const EPS: f64 = 1e-12;

impl LocalSearch<'_> {
    fn d(&self, a: usize, b: usize) -> f64 {
        match self.dummy {
            Some(z) if a == z || b == z => {
                let other = if a == z { b } else { a };
                match self.fixed_start {
                    Some(s) if other != s && other != z => self.far,
                    _ => 0.0,
                }
            }
            _ => dist(self.pc.point(a), self.pc.point(b)),
        }
    }

    fn m(&self) -> usize {
        self.tour.len()
    }

    fn succ(&self, a: usize) -> usize {
        self.tour[(self.pos[a] + 1) % self.m()]
    }

    fn pred(&self, a: usize) -> usize {
        self.tour[(self.pos[a] + self.m() - 1) % self.m()]
    }

    fn length(&self) -> f64 {
        (0..self.m())
            .map(|i| self.d(self.tour[i], self.tour[(i + 1) % self.m()]))
            .sum()
    }

    /// Reverses the cyclic run of positions `i..=j`, or its complement when shorter.
    fn reverse(&mut self, i: usize, j: usize) {
        let m = self.m();
        let len = (j + m - i) % m + 1;
        let (mut a, mut b, len) = if 2 * len > m {
            ((j + 1) % m, (i + m - 1) % m, m - len)
        } else {
            (i, j, len)
        };
        for _ in 0..len / 2 {
            self.tour.swap(a, b);
            self.pos[self.tour[a]] = a;
            self.pos[self.tour[b]] = b;
            a = (a + 1) % m;
            b = (b + m - 1) % m;
        }
    }

    fn candidates(&self, a: usize) -> Vec<usize> {
        match self.dummy {
            Some(z) if a == z => match self.fixed_start {
                Some(s) => vec![s],
                None => (0..self.n).collect(),
            },
            Some(z) => {
                let mut c = self.neighbors[a].clone();
                c.push(z);
                c
            }
            None => self.neighbors[a].clone(),
        }
    }

    fn try_two_opt(&mut self, a: usize) -> bool {
        for c in self.candidates(a) {
            // successor variant: edges (a, succ a), (c, succ c) -> (a, c), (succ a, succ c)
            let b = self.succ(a);
            let dac = self.d(a, c);
            let dab = self.d(a, b);
            if c != b && c != a {
                let dd = self.succ(c);
                if dd != a {
                    let gain = dab + self.d(c, dd) - dac - self.d(b, dd);
                    if gain > EPS {
                        self.reverse(self.pos[b], self.pos[c]);
                        return true;
                    }
                }
            }
            // predecessor variant
            let pb = self.pred(a);
            if c != pb && c != a {
                let pd = self.pred(c);
                if pd != a {
                    let gain = self.d(pb, a) + self.d(pd, c) - dac - self.d(pb, pd);
                    if gain > EPS {
                        self.reverse(self.pos[c], self.pos[pb]);
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Moves a run of 1..=3 cities starting at `a` next to one of its candidates.
    fn try_or_opt(&mut self, a: usize) -> bool {
        let m = self.m();
        if m < 5 {
            return false;
        }
        for seg_len in 1..=3usize {
            if seg_len + 2 > m {
                break;
            }
            let i = self.pos[a];
            let seg: Vec<usize> = (0..seg_len).map(|k| self.tour[(i + k) % m]).collect();
            let first = seg[0];
            let last = seg[seg_len - 1];
            let p = self.pred(first);
            let nx = self.succ(last);
            let removal = self.d(p, first) + self.d(last, nx) - self.d(p, nx);
            if removal <= EPS {
                continue;
            }
            for &(end, other) in &[(first, last), (last, first)] {
                for c in self.candidates(end) {
                    if seg.contains(&c) {
                        continue;
                    }
                    for e in [self.succ(c), self.pred(c)] {
                        if seg.contains(&e) {
                            continue;
                        }
                        // insert between c and e with `end` adjacent to c
                        let add = self.d(c, end) + self.d(other, e) - self.d(c, e);
                        if removal - add > EPS {
                            self.apply_or_move(&seg, c, e, end == first);
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    fn apply_or_move(&mut self, seg: &[usize], c: usize, e: usize, first_next_to_c: bool) {
        let mut rest: Vec<usize> = Vec::with_capacity(self.m());
        let start = self.pos[seg[seg.len() - 1]] + 1;
        for k in 0..self.m() - seg.len() {
            rest.push(self.tour[(start + k) % self.m()]);
        }
        // orient the inserted run so that it reads c -> ... -> e along `rest`
        let ci = rest.iter().position(|&x| x == c).unwrap();
        let ei = rest.iter().position(|&x| x == e).unwrap();
        let forward = (ci + 1) % rest.len() == ei;
        let mut run: Vec<usize> = seg.to_vec();
        // reading c -> run -> e, run must begin next to c
        let begins_with_first = first_next_to_c;
        if !begins_with_first {
            run.reverse();
        }
        let mut out = Vec::with_capacity(self.m());
        if forward {
            out.extend_from_slice(&rest[..=ci]);
            out.extend_from_slice(&run);
            out.extend_from_slice(&rest[ci + 1..]);
        } else {
            // e precedes c: e -> reversed(run) -> c
            run.reverse();
            out.extend_from_slice(&rest[..=ei]);
            out.extend_from_slice(&run);
            out.extend_from_slice(&rest[ei + 1..]);
        }
        self.tour = out;
        for (k, &x) in self.tour.iter().enumerate() {
            self.pos[x] = k;
        }
    }
}

fn check_duplicates(pc: &PointCloud) -> Result<()> {
    let mut idx: Vec<usize> = (0..pc.len()).collect();
    idx.sort_by(|&a, &b| pc.point(a).partial_cmp(pc.point(b)).unwrap());
    for w in idx.windows(2) {
        if pc.point(w[0]) == pc.point(w[1]) {
            let (first, second) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(Error::DuplicatePoints { first, second });
        }
    }
    Ok(())
}

/// Nearest-neighbour construction plus local search.
pub fn solve_tsp(pc: &PointCloud, opts: &TspOptions, seed: u64) -> Result<Tour> {
    solve_tsp_with_stats(pc, opts, seed).map(|(t, _)| t)
}

pub fn solve_tsp_with_stats(pc: &PointCloud, opts: &TspOptions, seed: u64) -> Result<(Tour, TspStats)> {
    let n = pc.len();
    if n < 2 {
        return Err(Error::InvalidArgument("a tour needs at least 2 points".into()));
    }
    if pc.points.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite point coordinates".into()));
    }
    if let Some(s) = opts.start {
        if s >= n {
            return Err(Error::InvalidArgument(format!("start index {s} out of range")));
        }
    }
    check_duplicates(pc)?;

    let started = Instant::now();
    let mut index = BucketIndex::new(pc);
    let k = opts.neighbors.clamp(1, n - 1);
    let neighbors = neighbor_lists(pc, &index, k);

    let first = match opts.start {
        Some(s) => s,
        None => ChaCha8Rng::seed_from_u64(seed).random_range(0..n),
    };
    let mut order = Vec::with_capacity(n + 1);
    index.remove(first);
    order.push(first);
    let mut visited = vec![false; n];
    visited[first] = true;
    let mut cur = first;
    while order.len() < n {
        // The closest unvisited entry of a sorted neighbour list is the nearest
        // unvisited point overall; the grid is only searched once a list is used up.
        let next = match neighbors[cur].iter().find(|&&j| !visited[j]) {
            Some(&j) => j,
            None => index.nearest(pc.point(cur)).expect("points remain"),
        };
        visited[next] = true;
        index.remove(next);
        order.push(next);
        cur = next;
    }

    let dummy = opts.open.then_some(n);
    if let Some(z) = dummy {
        order.push(z);
    }
    let diameter = {
        let mut ext = 0.0;
        for a in 0..pc.dim {
            let (lo, hi) = pc
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p[a]), h.max(p[a])));
            ext += hi - lo;
        }
        ext
    };
    let mut pos = vec![0; order.len()];
    for (i, &x) in order.iter().enumerate() {
        pos[x] = i;
    }
    let mut ls = LocalSearch {
        pc,
        n,
        dummy,
        fixed_start: opts.start.filter(|_| opts.open),
        far: 4.0 * diameter + 1.0,
        tour: order,
        pos,
        neighbors,
    };

    let mut stats = TspStats {
        nearest_neighbor_length: ls.length(),
        ..Default::default()
    };
    let mut prev = stats.nearest_neighbor_length;
    for _ in 0..opts.budget.max_2opt_passes {
        let mut improved = false;
        for node in 0..ls.m() {
            while ls.try_two_opt(node) {
                improved = true;
            }
            if opts.or_opt && ls.try_or_opt(node) {
                improved = true;
            }
        }
        let len = ls.length();
        debug_assert!(len <= prev + 1e-9 * prev.max(1.0));
        prev = len;
        stats.pass_lengths.push(len);
        if !improved {
            break;
        }
        if let Some(limit) = opts.budget.time_limit_s {
            if started.elapsed().as_secs_f64() > limit {
                stats.hit_time_limit = true;
                log::warn!("TSP local search stopped at the {limit} s time limit");
                break;
            }
        }
    }

    let m = ls.m();
    let order: Vec<usize> = match dummy {
        Some(z) => {
            let zp = ls.pos[z];
            let mut path: Vec<usize> = (1..m).map(|k| ls.tour[(zp + k) % m]).collect();
            if let Some(s) = ls.fixed_start {
                if path[0] != s {
                    path.reverse();
                }
            }
            path
        }
        None => {
            let sp = ls.pos[first];
            (0..m).map(|k| ls.tour[(sp + k) % m]).collect()
        }
    };
    let nn_len = if opts.open {
        // open length of the NN path: subtract nothing, the dummy edges cost zero
        // unless the start is fixed, in which case one `far` edge is present.
        let far_edges = if ls.fixed_start.is_some() { ls.far } else { 0.0 };
        stats.nearest_neighbor_length - far_edges
    } else {
        stats.nearest_neighbor_length
    };
    stats.nearest_neighbor_length = nn_len;
    for l in stats.pass_lengths.iter_mut() {
        if ls.fixed_start.is_some() {
            *l -= ls.far;
        }
    }
    Ok((
        Tour {
            order,
            open_ended: opts.open,
        },
        stats,
    ))
}

/// Piecewise-linear path through k-space.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    dim: usize,
    vertices: Vec<f64>,
}

impl Polyline {
    pub fn new(dim: usize, vertices: Vec<f64>) -> Result<Self> {
        if dim == 0 || vertices.len() % dim != 0 {
            return Err(Error::Shape("vertex buffer does not match dimension".into()));
        }
        if vertices.len() / dim < 2 {
            return Err(Error::Shape("a polyline needs at least 2 vertices".into()));
        }
        if vertices.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite vertex".into()));
        }
        let poly = Polyline { dim, vertices };
        for i in 1..poly.len() {
            if poly.vertex(i) == poly.vertex(i - 1) {
                return Err(Error::DuplicatePoints {
                    first: i - 1,
                    second: i,
                });
            }
        }
        Ok(poly)
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let dim = points.first().map(|p| p.as_ref().len()).unwrap_or(0);
        let flat: Vec<f64> = points.iter().flat_map(|p| p.as_ref().to_vec()).collect();
        Polyline::new(dim, flat)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vertices.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.vertices[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.vertices.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.vertices
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        (1..self.len())
            .map(|i| dist(self.vertex(i - 1), self.vertex(i)))
            .collect()
    }

    pub fn total_length(&self) -> f64 {
        self.segment_lengths().iter().sum()
    }

    pub fn reversed(&self) -> Polyline {
        let mut v = Vec::with_capacity(self.vertices.len());
        for i in (0..self.len()).rev() {
            v.extend_from_slice(self.vertex(i));
        }
        Polyline {
            dim: self.dim,
            vertices: v,
        }
    }

    /// Cumulative arc length at each vertex, starting at 0.
    pub fn cumulative_lengths(&self) -> Vec<f64> {
        let mut acc = vec![0.0];
        for l in self.segment_lengths() {
            acc.push(acc.last().unwrap() + l);
        }
        acc
    }

    /// Euclidean distance from `p` to the nearest point of the polyline.
    pub fn distance_to(&self, p: &[f64]) -> f64 {
        (1..self.len())
            .map(|i| point_segment_distance(p, self.vertex(i - 1), self.vertex(i)))
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut ab2 = 0.0;
    let mut t = 0.0;
    for k in 0..p.len() {
        let e = b[k] - a[k];
        ab2 += e * e;
        t += (p[k] - a[k]) * e;
    }
    let t = if ab2 > 0.0 { (t / ab2).clamp(0.0, 1.0) } else { 0.0 };
    let mut d2 = 0.0;
    for k in 0..p.len() {
        let q = a[k] + t * (b[k] - a[k]);
        d2 += (p[k] - q) * (p[k] - q);
    }
    d2.sqrt()
}

/// Sampler walking arc length along a polyline with monotone queries.
pub(crate) struct ArcLengthCursor<'a> {
    poly: &'a Polyline,
    cum: Vec<f64>,
    seg: usize,
}

impl<'a> ArcLengthCursor<'a> {
    pub(crate) fn new(poly: &'a Polyline) -> Self {
        ArcLengthCursor {
            cum: poly.cumulative_lengths(),
            poly,
            seg: 0,
        }
    }

    /// Position at arc length `s`; `s` must not decrease between calls.
    pub(crate) fn at(&mut self, s: f64, out: &mut [f64]) {
        let last_seg = self.poly.len() - 2;
        while self.seg < last_seg && s > self.cum[self.seg + 1] {
            self.seg += 1;
        }
        let (s0, s1) = (self.cum[self.seg], self.cum[self.seg + 1]);
        let t = ((s - s0) / (s1 - s0)).clamp(0.0, 1.0);
        let a = self.poly.vertex(self.seg);
        let b = self.poly.vertex(self.seg + 1);
        for k in 0..out.len() {
            out[k] = a[k] + t * (b[k] - a[k]);
        }
    }
}

/// Vertices in tour order; a closed tour repeats its first vertex at the end.
pub fn tour_to_polyline(pc: &PointCloud, tour: &Tour) -> Result<Polyline> {
    if !tour.is_permutation(pc.len()) {
        return Err(Error::InvalidArgument("tour is not a permutation of the cloud".into()));
    }
    let mut v: Vec<f64> = tour.order.iter().flat_map(|&i| pc.point(i).to_vec()).collect();
    if !tour.open_ended {
        v.extend_from_slice(pc.point(tour.order[0]));
    }
    Polyline::new(pc.dim, v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedMode {
    /// Constant speed in m⁻¹·s⁻¹.
    FixedSpeed(f64),
    /// Total traversal time in s.
    FixedDuration(f64),
}

/// Samples the polyline uniformly in arc length at step `dt`.
///
/// The sample count is `round(T/dt) + 1` and the speed is adjusted to
/// `L / ((n−1)·dt)` so that both end vertices are hit exactly.
pub fn constant_speed_param(poly: &Polyline, mode: SpeedMode, dt: f64) -> Result<Curve> {
    let total = poly.total_length();
    let duration = match mode {
        SpeedMode::FixedSpeed(v) if v > 0.0 && v.is_finite() => total / v,
        SpeedMode::FixedDuration(t) if t > 0.0 && t.is_finite() => t,
        _ => return Err(Error::InvalidArgument(format!("invalid speed mode {mode:?}"))),
    };
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument("dt must be positive".into()));
    }
    let steps = (duration / dt).round();
    if steps < 2.0 {
        return Err(Error::TooCoarse { dt, duration });
    }
    let steps = steps as usize;
    let d = poly.dim();
    let mut cursor = ArcLengthCursor::new(poly);
    let mut pos = vec![0.0; (steps + 1) * d];
    for i in 0..=steps {
        let s = total * i as f64 / steps as f64;
        cursor.at(s, &mut pos[i * d..(i + 1) * d]);
    }
    pos[steps * d..].copy_from_slice(poly.vertex(poly.len() - 1));
    Curve::new(d, dt, pos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cloud(points: &[[f64; 2]]) -> PointCloud {
        PointCloud::new(2, points.iter().flatten().copied().collect(), 0).unwrap()
    }

    fn random_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<f64> = (0..2 * n).map(|_| rng.random::<f64>()).collect();
        PointCloud::new(2, pts, seed).unwrap()
    }

    #[test]
    fn three_points_closed_is_perimeter() {
        let pc = cloud(&[[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]]);
        let opts = TspOptions { open: false, ..Default::default() };
        let t = solve_tsp(&pc, &opts, 1).unwrap();
        assert!(t.is_permutation(3));
        assert_relative_eq!(t.length(&pc), 12.0, max_relative = 1e-12);
    }

    #[test]
    fn circle_points_follow_hull() {
        let n = 60;
        let mut pts: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                [th.cos(), th.sin()]
            })
            .collect();
        // scramble the input order
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in (1..n).rev() {
            pts.swap(i, rng.random_range(0..=i));
        }
        let pc = cloud(&pts);
        let perimeter = 2.0 * n as f64 * (std::f64::consts::PI / n as f64).sin();
        let opts = TspOptions { open: false, ..Default::default() };
        let t = solve_tsp(&pc, &opts, 11).unwrap();
        assert_relative_eq!(t.length(&pc), perimeter, max_relative = 1e-9);
    }

    #[test]
    fn local_search_never_worse_than_nearest_neighbor() {
        for seed in 0..10 {
            let pc = random_cloud(300, seed);
            for open in [true, false] {
                let opts = TspOptions { open, ..Default::default() };
                let (t, stats) = solve_tsp_with_stats(&pc, &opts, seed).unwrap();
                assert!(t.is_permutation(300));
                assert!(t.length(&pc) <= stats.nearest_neighbor_length + 1e-9);
                for w in stats.pass_lengths.windows(2) {
                    assert!(w[1] <= w[0] + 1e-9);
                }
                assert_relative_eq!(
                    t.length(&pc),
                    *stats.pass_lengths.last().unwrap(),
                    max_relative = 1e-9
                );
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let pc = random_cloud(500, 3);
        let opts = TspOptions::default();
        assert_eq!(solve_tsp(&pc, &opts, 7).unwrap(), solve_tsp(&pc, &opts, 7).unwrap());
    }

    #[test]
    fn fixed_start_is_honoured() {
        let pc = random_cloud(200, 8);
        let opts = TspOptions { start: Some(17), ..Default::default() };
        let (t, stats) = solve_tsp_with_stats(&pc, &opts, 0).unwrap();
        assert_eq!(t.order[0], 17);
        assert!(t.length(&pc) <= stats.nearest_neighbor_length + 1e-9);
    }

    #[test]
    fn duplicates_rejected() {
        let pc = cloud(&[[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]]);
        assert!(matches!(
            solve_tsp(&pc, &TspOptions::default(), 0),
            Err(Error::DuplicatePoints { first: 0, second: 2 })
        ));
    }

    #[test]
    fn polyline_from_tour() {
        let pc = cloud(&[[0.0, 0.0], [2.0, 0.0], [5.0, 0.0], [1.0, 0.0]]);
        let t = Tour { order: vec![0, 3, 1, 2], open_ended: true };
        let p = tour_to_polyline(&pc, &t).unwrap();
        assert_relative_eq!(p.total_length(), 5.0);
        let r = tour_to_polyline(&pc, &t.reversed()).unwrap();
        assert_eq!(r, p.reversed());
        assert_relative_eq!(r.total_length(), p.total_length());

        let pc = random_cloud(30, 2);
        let t = solve_tsp(&pc, &TspOptions::default(), 2).unwrap();
        let p = tour_to_polyline(&pc, &t).unwrap();
        let direct: f64 = t
            .order
            .windows(2)
            .map(|w| {
                let (a, b) = (pc.point(w[0]), pc.point(w[1]));
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            })
            .sum();
        assert_relative_eq!(p.total_length(), direct, max_relative = 1e-12);
    }

    #[test]
    fn constant_speed_single_segment() {
        let p = Polyline::from_points(&[[0.0, 0.0], [2.0, 0.0]]).unwrap();
        let c = constant_speed_param(&p, SpeedMode::FixedSpeed(2.0), 0.1).unwrap();
        assert_eq!(c.len(), 11);
        assert_relative_eq!(c.duration(), 1.0, max_relative = 1e-12);
        for (i, q) in c.points().enumerate() {
            assert_relative_eq!(q[0], 0.2 * i as f64, max_relative = 1e-12, epsilon = 1e-15);
        }
        // three samples is the minimum
        assert_eq!(constant_speed_param(&p, SpeedMode::FixedSpeed(2.0), 0.6).unwrap().len(), 3);
        for dt in [0.8, 1.5] {
            assert!(matches!(
                constant_speed_param(&p, SpeedMode::FixedSpeed(2.0), dt),
                Err(Error::TooCoarse { .. })
            ));
        }
    }

    #[test]
    fn constant_speed_right_angle() {
        let p = Polyline::from_points(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]).unwrap();
        let dt = 0.013;
        let c = constant_speed_param(&p, SpeedMode::FixedSpeed(1.0), dt).unwrap();
        let v = 2.0 / c.duration();
        let speeds = crate::kinematics::finite_diff_speed(&c);
        let mut corner_steps = 0;
        for s in speeds.chunks(2) {
            let norm = s[0].hypot(s[1]);
            if (norm - v).abs() > 1e-9 * v {
                corner_steps += 1;
                assert!(norm < v);
            }
        }
        assert!(corner_steps <= 1);
        let nearest = c
            .points()
            .map(|q| ((q[0] - 1.0).powi(2) + q[1].powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest <= v * dt);
    }

    #[test]
    fn fixed_duration_hits_endpoints() {
        let pc = random_cloud(40, 4);
        let t = solve_tsp(&pc, &TspOptions::default(), 4).unwrap();
        let p = tour_to_polyline(&pc, &t).unwrap();
        let c = constant_speed_param(&p, SpeedMode::FixedDuration(1.0), 1e-3).unwrap();
        assert_eq!(c.point(0), p.vertex(0));
        assert_eq!(c.point(c.len() - 1), p.vertex(p.len() - 1));
        let diam = 2f64.sqrt();
        assert!(c.points().all(|q| p.distance_to(q) <= 1e-9 * diam));
    }

    #[test]
    fn sampled_length_converges_first_order() {
        let p = Polyline::from_points(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 0.3]]).unwrap();
        let total = p.total_length();
        let gap = |dt: f64| {
            let c = constant_speed_param(&p, SpeedMode::FixedDuration(1.0), dt).unwrap();
            total - c.path_length()
        };
        // The cut at a corner depends on where it falls between samples, so
        // average over a band of steps before comparing.
        let mean_gap = |h: f64| (0..16).map(|j| gap(h * (1.0 + 0.0125 * j as f64))).sum::<f64>() / 16.0;
        let (g1, g2) = (mean_gap(1.0 / 97.0), mean_gap(1.0 / 194.0));
        assert!(g1 > 0.0 && g2 > 0.0);
        let ratio = g2 / g1;
        assert!((0.35..0.65).contains(&ratio), "{g1} {g2}");
    }
}
