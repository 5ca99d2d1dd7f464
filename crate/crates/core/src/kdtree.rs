//! Balanced two-dimensional k-d tree for nearest-neighbour queries.

use crate::geom::GeoPoint;

#[derive(Debug, Clone)]
struct Node {
    point: GeoPoint,
    /// Caller-supplied index of the point.
    id: usize,
    left: Option<usize>,
    right: Option<usize>,
    axis: u8,
}

/// Static, balanced k-d tree. Built once by median splits, immutable afterwards.
#[derive(Debug, Clone)]
pub struct KdTree {
    nodes: Vec<Node>,
    root: Option<usize>,
}

impl KdTree {
    /// Build from points; each point is identified by its position in `points`.
    pub fn build(points: &[GeoPoint]) -> KdTree {
        let mut items: Vec<(GeoPoint, usize)> =
            points.iter().copied().enumerate().map(|(i, p)| (p, i)).collect();
        let mut nodes = Vec::with_capacity(items.len());
        let root = Self::build_rec(&mut items, 0, &mut nodes);
        KdTree { nodes, root }
    }

    fn build_rec(
        items: &mut [(GeoPoint, usize)],
        depth: usize,
        nodes: &mut Vec<Node>,
    ) -> Option<usize> {
        if items.is_empty() {
            return None;
        }
        let axis = (depth % 2) as u8;
        let key = |p: &GeoPoint| if axis == 0 { p.easting } else { p.northing };
        let mid = items.len() / 2;
        items.select_nth_unstable_by(mid, |a, b| {
            key(&a.0).total_cmp(&key(&b.0)).then(a.1.cmp(&b.1))
        });
        let (point, id) = items[mid];
        let slot = nodes.len();
        nodes.push(Node {
            point,
            id,
            left: None,
            right: None,
            axis,
        });
        let (lo, rest) = items.split_at_mut(mid);
        let left = Self::build_rec(lo, depth + 1, nodes);
        let right = Self::build_rec(&mut rest[1..], depth + 1, nodes);
        nodes[slot].left = left;
        nodes[slot].right = right;
        Some(slot)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nearest point to `query` as `(id, squared distance)`. Ties resolve to
    /// the smallest id, matching a linear scan in id order.
    pub fn nearest(&self, query: GeoPoint) -> Option<(usize, f64)> {
        let root = self.root?;
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_rec(root, query, &mut best);
        Some(best)
    }

    fn nearest_rec(&self, node: usize, q: GeoPoint, best: &mut (usize, f64)) {
        let n = &self.nodes[node];
        let d2 = n.point.distance_sq(q);
        if d2 < best.1 || (d2 == best.1 && n.id < best.0) {
            *best = (n.id, d2);
        }
        let diff = if n.axis == 0 {
            q.easting - n.point.easting
        } else {
            q.northing - n.point.northing
        };
        let (near, far) = if diff < 0.0 {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        if let Some(c) = near {
            self.nearest_rec(c, q, best);
        }
        // `<=` keeps equal-distance candidates reachable for the id tie-break
        if diff * diff <= best.1 {
            if let Some(c) = far {
                self.nearest_rec(c, q, best);
            }
        }
    }

    /// Depth of the tree (0 for an empty tree).
    pub fn depth(&self) -> usize {
        fn rec(t: &KdTree, n: Option<usize>) -> usize {
            match n {
                None => 0,
                Some(i) => 1 + rec(t, t.nodes[i].left).max(rec(t, t.nodes[i].right)),
            }
        }
        rec(self, self.root)
    }
}

/// Reference nearest-neighbour search by linear scan, with the same tie-break.
pub fn nearest_linear(points: &[GeoPoint], query: GeoPoint) -> Option<(usize, f64)> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, p.distance_sq(query)))
        .fold(None, |acc, (i, d)| match acc {
            Some((_, bd)) if bd <= d => acc,
            _ => Some((i, d)),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_tree() {
        let t = KdTree::build(&[]);
        assert!(t.is_empty());
        assert_eq!(t.nearest(GeoPoint::default()), None);
    }

    #[test]
    fn balanced_depth() {
        let pts: Vec<GeoPoint> = (0..1000)
            .map(|i| GeoPoint::new((i * 37 % 101) as f64, (i * 11 % 97) as f64))
            .collect();
        let t = KdTree::build(&pts);
        assert_eq!(t.len(), 1000);
        // ceil(log2(1001)) = 10
        assert_eq!(t.depth(), 10);
    }

    #[test]
    fn ties_resolve_to_lowest_id() {
        let pts = vec![
            GeoPoint::new(1.0, 0.0),
            GeoPoint::new(-1.0, 0.0),
            GeoPoint::new(0.0, 1.0),
            GeoPoint::new(0.0, -1.0),
        ];
        let t = KdTree::build(&pts);
        assert_eq!(t.nearest(GeoPoint::default()).unwrap().0, 0);
    }

    proptest! {
        #[test]
        fn matches_linear_scan(
            pts in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..200),
            q in (-1.2e3f64..1.2e3, -1.2e3f64..1.2e3),
        ) {
            let pts: Vec<GeoPoint> = pts.into_iter().map(|(e, n)| GeoPoint::new(e, n)).collect();
            let q = GeoPoint::new(q.0, q.1);
            let t = KdTree::build(&pts);
            prop_assert_eq!(t.nearest(q), nearest_linear(&pts, q));
        }

        #[test]
        fn matches_linear_scan_on_grid(
            q in (-2i32..12, -2i32..12),
        ) {
            // integer grid: many exact distance ties
            let pts: Vec<GeoPoint> = (0..10).flat_map(|i| (0..10).map(move |j| GeoPoint::new(i as f64, j as f64))).collect();
            let q = GeoPoint::new(f64::from(q.0) + 0.5, f64::from(q.1) + 0.5);
            let t = KdTree::build(&pts);
            prop_assert_eq!(t.nearest(q), nearest_linear(&pts, q));
        }
    }
}
