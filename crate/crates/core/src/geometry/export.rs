use serde::{Deserialize, Serialize};

use super::{SimplexId, Triangulation, VertexId, INFINITE_VERTEX};
use crate::FORMAT_VERSION;

/// One simplex of an exported tessellation. The vertex at infinity is
/// written as `null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportSimplex {
    pub id: SimplexId,
    pub vertices: Vec<Option<VertexId>>,
    #[serde(rename = "virtual")]
    pub is_virtual: bool,
}

/// Plot-ready JSON form of a triangulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangulationExport {
    pub format_version: u32,
    pub dimension: usize,
    pub vertices: Vec<Vec<f64>>,
    pub simplices: Vec<ExportSimplex>,
}

impl TriangulationExport {
    /// Unique undirected edges between real vertices, sorted.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut edges = Vec::new();
        for s in self.simplices.iter().filter(|s| !s.is_virtual) {
            let ids: Vec<VertexId> = s.vertices.iter().flatten().copied().collect();
            for (i, &a) in ids.iter().enumerate() {
                for &b in &ids[i + 1..] {
                    edges.push((a.min(b), a.max(b)));
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        edges
    }
}

impl From<&Triangulation> for TriangulationExport {
    fn from(t: &Triangulation) -> Self {
        let vertices = (0..t.num_vertices()).map(|v| t.vertex(v).to_vec()).collect();
        let simplices = t
            .simplex_ids()
            .map(|id| {
                let s = t.simplex(id).expect("live simplex");
                ExportSimplex {
                    id,
                    vertices: s
                        .vertices()
                        .iter()
                        .map(|&v| (v != INFINITE_VERTEX).then_some(v))
                        .collect(),
                    is_virtual: s.is_virtual(),
                }
            })
            .collect();
        Self {
            format_version: FORMAT_VERSION,
            dimension: t.dim(),
            vertices,
            simplices,
        }
    }
}
