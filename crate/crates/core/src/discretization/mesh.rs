use crate::error::{Error, Result};

/// Graded mesh of `[0, 1]` with nodes `(i/N)^γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
    grading: f64,
}

impl Mesh {
    /// Builds a mesh from explicit nodes (strictly increasing, `0` to `1`).
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 5 {
            return Err(Error::BadMesh(format!("need at least 4 elements, got {}", nodes.len().saturating_sub(1))));
        }
        if nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 {
            return Err(Error::BadMesh("endpoints must be exactly 0 and 1".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::BadMesh("nodes must be strictly increasing".into()));
        }
        Ok(Self { nodes, grading: f64::NAN })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of elements `N`.
    pub fn elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn element(&self, e: usize) -> (f64, f64) {
        (self.nodes[e], self.nodes[e + 1])
    }

    pub fn h(&self, e: usize) -> f64 {
        self.nodes[e + 1] - self.nodes[e]
    }

    pub fn h_max(&self) -> f64 {
        (0..self.elements()).map(|e| self.h(e)).fold(0.0, f64::max)
    }
}

/// `nodes_i = (i/N)^γ`, `N >= 4`, `γ >= 1`.
pub fn build_mesh(n: usize, grading: f64) -> Result<Mesh> {
    if !(grading >= 1.0) || !grading.is_finite() {
        return Err(Error::BadGrading(grading));
    }
    if n < 4 {
        return Err(Error::BadMesh(format!("N = {n} < 4")));
    }
    let nodes = (0..=n)
        .map(|i| {
            if i == n {
                1.0
            } else {
                (i as f64 / n as f64).powf(grading)
            }
        })
        .collect();
    Ok(Mesh { nodes, grading })
}

/// Grading that resolves the `x^{-K}` boundary layer: `max(1, 2/(2-K))`.
pub fn auto_grading(k: f64) -> f64 {
    if k.is_finite() && k < 2.0 {
        (2.0 / (2.0 - k)).max(1.0)
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_and_graded_nodes() {
        assert_eq!(build_mesh(4, 1.0).unwrap().nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(build_mesh(4, 2.0).unwrap().nodes(), &[0.0, 1.0 / 16.0, 0.25, 9.0 / 16.0, 1.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(build_mesh(4, 0.5), Err(Error::BadGrading(_))));
        assert!(matches!(build_mesh(3, 1.0), Err(Error::BadMesh(_))));
        assert!(Mesh::from_nodes(vec![0.0, 0.2, 0.2, 0.5, 0.7, 1.0]).is_err());
    }

    #[test]
    fn grading_formula_holds() {
        let m = build_mesh(64, 4.0 / 3.0).unwrap();
        for (i, x) in m.nodes().iter().enumerate() {
            let want = (i as f64 / 64.0).powf(4.0 / 3.0);
            assert!((x - want).abs() <= 1e-15 * want.max(1e-300));
        }
        assert_eq!(auto_grading(0.5), 4.0 / 3.0);
        assert_eq!(auto_grading(0.0), 1.0);
    }
}
