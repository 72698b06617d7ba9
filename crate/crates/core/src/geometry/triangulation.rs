use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::predicates::{self, affine_quality, distance_sq, edge_matrix, orientation, SphereSide};
use super::{
    GeometryError, DUPLICATE_TOLERANCE, QUALITY_TOLERANCE, SUPER_SIMPLEX_SCALE, WEIGHT_TOLERANCE,
};

pub type VertexId = usize;
pub type SimplexId = usize;

/// The symbolic vertex shared by all virtual (hull-exterior) simplices.
pub const INFINITE_VERTEX: VertexId = usize::MAX;

const NO_NEIGHBOR: SimplexId = usize::MAX;

/// One cell of the complex. `neighbors[i]` is the simplex across the facet
/// opposite `vertices[i]`.
#[derive(Clone, Debug)]
pub struct Simplex {
    vertices: Vec<VertexId>,
    neighbors: Vec<SimplexId>,
    // Row-major inverse of the edge matrix, real simplices only.
    inverse: Option<Vec<f64>>,
    alive: bool,
}

impl Simplex {
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn neighbors(&self) -> &[SimplexId] {
        &self.neighbors
    }

    pub fn is_virtual(&self) -> bool {
        self.vertices.contains(&INFINITE_VERTEX)
    }

    fn infinite_slot(&self) -> Option<usize> {
        self.vertices.iter().position(|&v| v == INFINITE_VERTEX)
    }
}

/// Axis-aligned bounds of a point set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl BoundingBox {
    pub fn from_points<'a>(dim: usize, points: impl IntoIterator<Item = &'a [f64]>) -> Self {
        let mut min = vec![f64::INFINITY; dim];
        let mut max = vec![f64::NEG_INFINITY; dim];
        for p in points {
            for k in 0..dim {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }
        Self { min, max }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn diagonal(&self) -> f64 {
        distance_sq(&self.min, &self.max).sqrt()
    }

    pub fn center(&self) -> Vec<f64> {
        self.min
            .iter()
            .zip(&self.max)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    fn union_with(&mut self, p: &[f64]) {
        for ((lo, hi), &v) in self.min.iter_mut().zip(&mut self.max).zip(p) {
            *lo = lo.min(v);
            *hi = hi.max(v);
        }
    }
}

/// Barycentric weights of a query point in its owning real simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct BarycentricCoords {
    pub simplex_id: SimplexId,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Location {
    Inside(BarycentricCoords),
    /// The point lies outside the convex hull of the real vertices.
    Outside,
}

/// Borrowed view of a real simplex: its id and vertex coordinates.
#[derive(Clone, Debug)]
pub struct SimplexView<'a> {
    pub id: SimplexId,
    pub vertex_ids: &'a [VertexId],
    pub points: Vec<&'a [f64]>,
}

impl SimplexView<'_> {
    pub fn dim(&self) -> usize {
        self.points.len() - 1
    }
}

enum Walk {
    Inside(SimplexId, Vec<f64>),
    /// Outside the hull; the payload is a virtual simplex whose hull facet
    /// faces the point.
    Outside(Option<SimplexId>),
}

/// Incremental Delaunay triangulation of points in `R^n`.
#[derive(Debug)]
pub struct Triangulation {
    dim: usize,
    coords: Vec<f64>,
    simplices: Vec<Simplex>,
    free: Vec<SimplexId>,
    bbox: BoundingBox,
    domain_center: Vec<f64>,
    domain_radius: f64,
    real_count: usize,
    hint: AtomicUsize,
}

impl Clone for Triangulation {
    fn clone(&self) -> Self {
        Self {
            dim: self.dim,
            coords: self.coords.clone(),
            simplices: self.simplices.clone(),
            free: self.free.clone(),
            bbox: self.bbox.clone(),
            domain_center: self.domain_center.clone(),
            domain_radius: self.domain_radius,
            real_count: self.real_count,
            hint: AtomicUsize::new(self.hint.load(Ordering::Relaxed)),
        }
    }
}

impl Triangulation {
    /// Builds the initial complex from `n + 1` affinely independent points.
    ///
    /// `bbox` describes the expected data range; points further than
    /// [`SUPER_SIMPLEX_SCALE`] diagonals from its center are rejected by
    /// [`insert`](Self::insert).
    pub fn new(seed: &[&[f64]], bbox: &BoundingBox) -> Result<Self, GeometryError> {
        let dim = bbox.dim();
        if dim == 0 {
            return Err(GeometryError::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if seed.len() != dim + 1 {
            return Err(GeometryError::SeedCount {
                expected: dim + 1,
                found: seed.len(),
            });
        }
        for p in seed {
            check_point(dim, p)?;
        }
        let (_, quality) = orientation(seed);
        if quality <= QUALITY_TOLERANCE {
            return Err(GeometryError::DegenerateSeed);
        }

        let mut bbox = bbox.clone();
        for p in seed {
            bbox.union_with(p);
        }
        let domain_center = bbox.center();
        let domain_radius = SUPER_SIMPLEX_SCALE * bbox.diagonal();

        let mut t = Self {
            dim,
            coords: seed.iter().flat_map(|p| p.iter().copied()).collect(),
            simplices: Vec::with_capacity(2 * (dim + 1)),
            free: Vec::new(),
            bbox,
            domain_center,
            domain_radius,
            real_count: 0,
            hint: AtomicUsize::new(0),
        };

        let base: Vec<VertexId> = (0..=dim).collect();
        // Real simplex gets id 0, the virtual cell opposite vertex i gets id 1 + i.
        t.push_simplex(base.clone(), (1..=dim + 1).collect());
        for i in 0..=dim {
            let mut verts = base.clone();
            verts[i] = INFINITE_VERTEX;
            let neighbors = (0..=dim).map(|j| if j == i { 0 } else { 1 + j }).collect();
            t.push_simplex(verts, neighbors);
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }

    /// Number of real vertices.
    pub fn num_vertices(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn vertex(&self, id: VertexId) -> &[f64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    pub fn num_real_simplices(&self) -> usize {
        self.real_count
    }

    pub fn simplex(&self, id: SimplexId) -> Option<&Simplex> {
        self.simplices.get(id).filter(|s| s.alive)
    }

    /// Ids of all live simplices, real and virtual, in increasing order.
    pub fn simplex_ids(&self) -> impl Iterator<Item = SimplexId> + '_ {
        (0..self.simplices.len()).filter(|&i| self.simplices[i].alive)
    }

    /// Ids of live real simplices in increasing order.
    pub fn real_simplex_ids(&self) -> impl Iterator<Item = SimplexId> + '_ {
        (0..self.simplices.len())
            .filter(|&i| self.simplices[i].alive && !self.simplices[i].is_virtual())
    }

    pub fn real_simplices(&self) -> impl Iterator<Item = SimplexView<'_>> + '_ {
        self.real_simplex_ids().filter_map(|id| self.view(id))
    }

    /// View of a live real simplex.
    pub fn view(&self, id: SimplexId) -> Option<SimplexView<'_>> {
        let s = self.simplex(id)?;
        if s.is_virtual() {
            return None;
        }
        Some(SimplexView {
            id,
            vertex_ids: &s.vertices,
            points: s.vertices.iter().map(|&v| self.vertex(v)).collect(),
        })
    }

    /// Real simplices as vertex-id sets, each sorted, the list sorted.
    pub fn simplex_vertex_sets(&self) -> Vec<Vec<VertexId>> {
        let mut sets: Vec<Vec<VertexId>> = self
            .real_simplices()
            .map(|v| {
                let mut ids = v.vertex_ids.to_vec();
                ids.sort_unstable();
                ids
            })
            .collect();
        sets.sort();
        sets
    }

    /// Finds the real simplex containing `p`.
    ///
    /// Uses a visibility walk from the last simplex found, falling back to a
    /// linear scan. When `p` lies on a face shared by several simplices the
    /// one with the lowest id is returned.
    pub fn locate(&self, p: &[f64]) -> Result<Location, GeometryError> {
        check_point(self.dim, p)?;
        match self.walk(p)? {
            Walk::Inside(id, weights) => {
                let (id, weights) = self.lowest_containing(id, weights, p);
                self.hint.store(id, Ordering::Relaxed);
                Ok(Location::Inside(BarycentricCoords {
                    simplex_id: id,
                    weights,
                }))
            }
            Walk::Outside(_) => Ok(Location::Outside),
        }
    }

    /// Inserts `p` and returns its vertex id. Vertex ids are assigned
    /// consecutively, starting at `n + 1` after the seed.
    pub fn insert(&mut self, p: &[f64]) -> Result<VertexId, GeometryError> {
        check_point(self.dim, p)?;
        if distance_sq(p, &self.domain_center) > self.domain_radius * self.domain_radius {
            return Err(GeometryError::OutsideSuperSimplex);
        }

        let start = match self.walk(p)? {
            Walk::Inside(id, _) => id,
            Walk::Outside(Some(id)) => id,
            Walk::Outside(None) => return Err(GeometryError::DegenerateCavity),
        };

        let cavity = self.cavity(start, p)?;
        if let Some(vertex) = self.duplicate_in(&cavity, p) {
            return Err(GeometryError::DuplicatePoint { vertex });
        }
        Ok(self.fill_cavity(&cavity, p))
    }

    /// Checks neighbor symmetry, facet agreement and that every real simplex
    /// is non-degenerate.
    pub fn validate_topology(&self) -> Result<(), GeometryError> {
        for id in self.simplex_ids() {
            let s = &self.simplices[id];
            if s.vertices.len() != self.dim + 1 {
                return Err(GeometryError::Corrupt(format!("simplex {id} has wrong arity")));
            }
            let distinct: HashSet<_> = s.vertices.iter().collect();
            if distinct.len() != s.vertices.len() {
                return Err(GeometryError::Corrupt(format!("simplex {id} repeats a vertex")));
            }
            for (i, &nb) in s.neighbors.iter().enumerate() {
                let other = self
                    .simplex(nb)
                    .ok_or_else(|| GeometryError::Corrupt(format!("{id} points at dead {nb}")))?;
                let back = other.neighbors.iter().filter(|&&b| b == id).count();
                if back != 1 {
                    return Err(GeometryError::Corrupt(format!("{id} <-> {nb} not symmetric")));
                }
                let facet: HashSet<_> = s
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, v)| v)
                    .collect();
                if !facet.iter().all(|v| other.vertices.contains(v)) {
                    return Err(GeometryError::Corrupt(format!("{id} and {nb} disagree on facet")));
                }
            }
            if !s.is_virtual() {
                let pts: Vec<&[f64]> = s.vertices.iter().map(|&v| self.vertex(v)).collect();
                let (_, quality) = orientation(&pts);
                if quality <= QUALITY_TOLERANCE {
                    return Err(GeometryError::Corrupt(format!("simplex {id} is flat")));
                }
            }
        }
        Ok(())
    }

    // ---------------------------------------------------------------------

    fn push_simplex(&mut self, vertices: Vec<VertexId>, neighbors: Vec<SimplexId>) -> SimplexId {
        let inverse = if vertices.contains(&INFINITE_VERTEX) {
            None
        } else {
            self.real_count += 1;
            let pts: Vec<&[f64]> = vertices.iter().map(|&v| self.vertex(v)).collect();
            edge_matrix(&pts)
                .try_inverse()
                .map(|m: DMatrix<f64>| m.transpose().as_slice().to_vec())
        };
        let s = Simplex {
            vertices,
            neighbors,
            inverse,
            alive: true,
        };
        match self.free.pop() {
            Some(id) => {
                self.simplices[id] = s;
                id
            }
            None => {
                self.simplices.push(s);
                self.simplices.len() - 1
            }
        }
    }

    fn kill(&mut self, id: SimplexId) {
        let s = &mut self.simplices[id];
        if !s.is_virtual() {
            self.real_count -= 1;
        }
        s.alive = false;
        self.free.push(id);
    }

    fn points_of(&self, verts: &[VertexId]) -> Vec<&[f64]> {
        verts.iter().map(|&v| self.vertex(v)).collect()
    }

    /// Barycentric weights of `p` in the real simplex `id`.
    fn weights(&self, id: SimplexId, p: &[f64]) -> Vec<f64> {
        let s = &self.simplices[id];
        let n = self.dim;
        if let Some(j) = s.vertices.iter().position(|&v| self.vertex(v) == p) {
            let mut w = vec![0.0; n + 1];
            w[j] = 1.0;
            return w;
        }
        let origin = self.vertex(s.vertices[0]);
        let d: Vec<f64> = p.iter().zip(origin).map(|(a, b)| a - b).collect();
        let mut w = vec![0.0; n + 1];
        match &s.inverse {
            Some(inv) => {
                for r in 0..n {
                    w[r + 1] = (0..n).map(|c| inv[r * n + c] * d[c]).sum();
                }
            }
            None => {
                // Numerically singular cell; fall back to a direct solve.
                let pts = self.points_of(&s.vertices);
                if let Ok(full) = predicates::barycentric(&pts, p) {
                    return full;
                }
                return vec![f64::NAN; n + 1];
            }
        }
        w[0] = 1.0 - w[1..].iter().sum::<f64>();
        w
    }

    fn start_cell(&self) -> Result<SimplexId, GeometryError> {
        let hint = self.hint.load(Ordering::Relaxed);
        let mut id = match self.simplex(hint) {
            Some(_) => hint,
            None => self
                .simplex_ids()
                .next()
                .ok_or(GeometryError::EmptyTriangulation)?,
        };
        if let Some(slot) = self.simplices[id].infinite_slot() {
            id = self.simplices[id].neighbors[slot];
        }
        Ok(id)
    }

    fn walk(&self, p: &[f64]) -> Result<Walk, GeometryError> {
        let mut id = self.start_cell()?;
        let max_steps = (self.dim * self.simplices.len()).max(16);
        for _ in 0..max_steps {
            let w = self.weights(id, p);
            let (imin, wmin) = argmin(&w);
            if wmin >= -WEIGHT_TOLERANCE {
                return Ok(Walk::Inside(id, w));
            }
            if wmin.is_nan() {
                break;
            }
            let next = self.simplices[id].neighbors[imin];
            if self.simplices[next].is_virtual() {
                return Ok(Walk::Outside(Some(next)));
            }
            id = next;
        }
        log::debug!("visibility walk did not converge; scanning");
        self.scan(p)
    }

    fn scan(&self, p: &[f64]) -> Result<Walk, GeometryError> {
        for id in self.real_simplex_ids() {
            let w = self.weights(id, p);
            if argmin(&w).1 >= -WEIGHT_TOLERANCE {
                return Ok(Walk::Inside(id, w));
            }
        }
        let beyond = self
            .simplex_ids()
            .filter(|&id| self.simplices[id].is_virtual())
            .find(|&id| self.beyond_hull_facet(id, p) == Some(true));
        Ok(Walk::Outside(beyond))
    }

    /// Collects every real simplex that contains `p` (reachable through
    /// facets `p` lies on) and returns the one with the smallest id.
    fn lowest_containing(
        &self,
        id: SimplexId,
        weights: Vec<f64>,
        p: &[f64],
    ) -> (SimplexId, Vec<f64>) {
        if weights.iter().all(|&w| w > WEIGHT_TOLERANCE) {
            return (id, weights);
        }
        let mut best = (id, weights.clone());
        let mut seen = HashSet::from([id]);
        let mut stack = vec![(id, weights)];
        while let Some((cur, w)) = stack.pop() {
            for (i, &wi) in w.iter().enumerate() {
                if wi > WEIGHT_TOLERANCE {
                    continue;
                }
                let nb = self.simplices[cur].neighbors[i];
                if self.simplices[nb].is_virtual() || !seen.insert(nb) {
                    continue;
                }
                let wn = self.weights(nb, p);
                if argmin(&wn).1 >= -WEIGHT_TOLERANCE {
                    if nb < best.0 {
                        best = (nb, wn.clone());
                    }
                    stack.push((nb, wn));
                }
            }
        }
        best
    }

    /// For a virtual simplex: `Some(true)` when `p` is strictly beyond its
    /// hull facet, `None` when `p` is (numerically) on the facet hyperplane.
    fn beyond_hull_facet(&self, id: SimplexId, p: &[f64]) -> Option<bool> {
        let s = &self.simplices[id];
        let slot = s.infinite_slot().expect("virtual simplex");
        let inner = &self.simplices[s.neighbors[slot]];
        let apex = inner
            .vertices
            .iter()
            .copied()
            .find(|v| !s.vertices.contains(v))
            .expect("inner simplex has an apex");

        let mut with_p = self.points_of_replacing(&s.vertices, slot, p);
        let (op, qp) = orientation(&with_p);
        if qp <= QUALITY_TOLERANCE {
            return None;
        }
        with_p[slot] = self.vertex(apex);
        let (oa, _) = orientation(&with_p);
        Some(op * oa < 0.0)
    }

    fn points_of_replacing<'a>(
        &'a self,
        verts: &[VertexId],
        slot: usize,
        p: &'a [f64],
    ) -> Vec<&'a [f64]> {
        verts
            .iter()
            .enumerate()
            .map(|(i, &v)| if i == slot { p } else { self.vertex(v) })
            .collect()
    }

    fn in_conflict(&self, id: SimplexId, p: &[f64]) -> bool {
        let s = &self.simplices[id];
        match s.infinite_slot() {
            None => predicates::in_sphere(&self.points_of(&s.vertices), p) == SphereSide::Inside,
            Some(slot) => match self.beyond_hull_facet(id, p) {
                Some(beyond) => beyond,
                // On the hull hyperplane: conflict iff inside the facet's
                // circumsphere, i.e. inside the inner simplex's circumsphere.
                None => self.in_conflict(s.neighbors[slot], p),
            },
        }
    }

    /// Whether replacing `vertices[slot]` of `id` by `p` yields a valid cell.
    fn facet_visible(&self, id: SimplexId, slot: usize, p: &[f64]) -> bool {
        let s = &self.simplices[id];
        let inf = s.infinite_slot();
        if inf == Some(slot) {
            // New real cell on a former hull facet: p must be strictly beyond.
            self.beyond_hull_facet(id, p) == Some(true)
        } else if let Some(inf) = inf {
            // New virtual cell: its hull facet must be full-dimensional.
            let facet: Vec<&[f64]> = s
                .vertices
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != inf)
                .map(|(i, &v)| if i == slot { p } else { self.vertex(v) })
                .collect();
            affine_quality(&facet) > QUALITY_TOLERANCE
        } else {
            let old = self.points_of(&s.vertices);
            let new = self.points_of_replacing(&s.vertices, slot, p);
            let (o_old, _) = orientation(&old);
            let (o_new, q_new) = orientation(&new);
            q_new > QUALITY_TOLERANCE && o_old * o_new > 0.0
        }
    }

    /// Conflict region of `p`, grown until it is star-shaped from `p`.
    fn cavity(&self, start: SimplexId, p: &[f64]) -> Result<Vec<SimplexId>, GeometryError> {
        let mut members: HashSet<SimplexId> = HashSet::from([start]);
        let mut order = vec![start];
        let mut tested: HashMap<SimplexId, bool> = HashMap::new();
        let mut stack = vec![start];
        while let Some(id) = stack.pop() {
            for &nb in &self.simplices[id].neighbors {
                if members.contains(&nb) {
                    continue;
                }
                let hit = *tested.entry(nb).or_insert_with(|| self.in_conflict(nb, p));
                if hit {
                    members.insert(nb);
                    order.push(nb);
                    stack.push(nb);
                }
            }
        }

        let live = self.simplices.len() - self.free.len();
        loop {
            let mut grow = Vec::new();
            for &id in &order {
                for (slot, &nb) in self.simplices[id].neighbors.iter().enumerate() {
                    if !members.contains(&nb) && !self.facet_visible(id, slot, p) {
                        grow.push(nb);
                    }
                }
            }
            if grow.is_empty() {
                break;
            }
            for nb in grow {
                if members.insert(nb) {
                    order.push(nb);
                }
            }
            if order.len() >= live {
                return Err(GeometryError::DegenerateCavity);
            }
        }
        order.sort_unstable();
        Ok(order)
    }

    fn duplicate_in(&self, cavity: &[SimplexId], p: &[f64]) -> Option<VertexId> {
        let tol2 = DUPLICATE_TOLERANCE * DUPLICATE_TOLERANCE;
        cavity
            .iter()
            .flat_map(|&id| self.simplices[id].vertices.iter().copied())
            .filter(|&v| v != INFINITE_VERTEX)
            .find(|&v| distance_sq(self.vertex(v), p) <= tol2)
    }

    fn fill_cavity(&mut self, cavity: &[SimplexId], p: &[f64]) -> VertexId {
        let members: HashSet<SimplexId> = cavity.iter().copied().collect();
        // (old cell vertices, replaced slot, outside neighbor, slot in neighbor)
        let mut boundary = Vec::new();
        for &id in cavity {
            let s = &self.simplices[id];
            for (slot, &nb) in s.neighbors.iter().enumerate() {
                if members.contains(&nb) {
                    continue;
                }
                let back = self.simplices[nb]
                    .neighbors
                    .iter()
                    .position(|&b| b == id)
                    .expect("symmetric adjacency");
                boundary.push((s.vertices.clone(), slot, nb, back));
            }
        }

        let vid = self.num_vertices();
        self.coords.extend_from_slice(p);
        for &id in cavity {
            self.kill(id);
        }

        let n = self.dim;
        let mut ridges: HashMap<Vec<VertexId>, (SimplexId, usize)> = HashMap::new();
        let mut last = None;
        for (mut verts, slot, nb, back) in boundary {
            verts[slot] = vid;
            let mut neighbors = vec![NO_NEIGHBOR; n + 1];
            neighbors[slot] = nb;
            let new_id = self.push_simplex(verts.clone(), neighbors);
            self.simplices[nb].neighbors[back] = new_id;
            for j in (0..=n).filter(|&j| j != slot) {
                let mut key: Vec<VertexId> = verts
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != j)
                    .map(|(_, &v)| v)
                    .collect();
                key.sort_unstable();
                match ridges.remove(&key) {
                    Some((other, other_slot)) => {
                        self.simplices[new_id].neighbors[j] = other;
                        self.simplices[other].neighbors[other_slot] = new_id;
                    }
                    None => {
                        ridges.insert(key, (new_id, j));
                    }
                }
            }
            if !self.simplices[new_id].is_virtual() {
                last = Some(new_id);
            }
        }
        debug_assert!(ridges.is_empty(), "unmatched ridges after insertion");
        if let Some(id) = last {
            self.hint.store(id, Ordering::Relaxed);
        }
        vid
    }
}

fn check_point(dim: usize, p: &[f64]) -> Result<(), GeometryError> {
    if p.len() != dim {
        return Err(GeometryError::DimensionMismatch {
            expected: dim,
            found: p.len(),
        });
    }
    if p.iter().any(|x| !x.is_finite()) {
        return Err(GeometryError::NonFinitePoint);
    }
    Ok(())
}

fn argmin(w: &[f64]) -> (usize, f64) {
    let mut best = (0, w[0]);
    for (i, &x) in w.iter().enumerate().skip(1) {
        if x < best.1 || x.is_nan() {
            best = (i, x);
        }
    }
    best
}
