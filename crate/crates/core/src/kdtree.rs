//! Exact nearest-neighbour search over 3D points.
//!
//! Ties on distance resolve to the smallest point index, so results do not
//! depend on tree layout or query order.

use crate::mesh::Point;

const LEAF_SIZE: usize = 12;

/// Tight bounds of the points below a node, which prunes far better than the
/// splitting planes on surface samples with lots of empty space.
struct Node {
    lo: [f64; 3],
    hi: [f64; 3],
    kind: NodeKind,
}

enum NodeKind {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

impl Node {
    fn distance_squared(&self, q: &[f64; 3]) -> f64 {
        let mut d = 0.0;
        for ((&x, &lo), &hi) in q.iter().zip(&self.lo).zip(&self.hi) {
            let gap = if x < lo {
                lo - x
            } else if x > hi {
                x - hi
            } else {
                0.0
            };
            d += gap * gap;
        }
        d
    }
}

pub struct KdTree {
    points: Vec<[f64; 3]>,
    /// Original index of each entry in `points`.
    order: Vec<usize>,
    /// Position in `points` of each original index.
    slot: Vec<usize>,
    nodes: Vec<Node>,
}

/// Nearest point found by a query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance_squared: f64,
}

impl Neighbor {
    pub fn distance(&self) -> f64 {
        self.distance_squared.sqrt()
    }

    fn better_than(&self, other: &Neighbor) -> bool {
        self.distance_squared < other.distance_squared
            || (self.distance_squared == other.distance_squared && self.index < other.index)
    }
}

impl KdTree {
    pub fn build(points: &[Point]) -> KdTree {
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut nodes = Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1);
        if !points.is_empty() {
            build_node(points, &mut order, 0, &mut nodes);
        }
        let reordered = order
            .iter()
            .map(|&i| [points[i].x, points[i].y, points[i].z])
            .collect();
        let mut slot = vec![0; order.len()];
        for (k, &i) in order.iter().enumerate() {
            slot[i] = k;
        }
        KdTree {
            points: reordered,
            order,
            slot,
            nodes,
        }
    }

    /// Original indices in leaf order. Neighbouring entries are close in
    /// space, so querying in this order keeps the tree warm in cache.
    pub fn spatial_order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Exact nearest neighbour, `None` on an empty tree.
    pub fn nearest(&self, query: &Point) -> Option<Neighbor> {
        self.nearest_from(query, None)
    }

    /// Same answer as [`KdTree::nearest`], but seeds the search with the
    /// point at original index `hint`. A hint close to the answer, such as
    /// the previous match of a slowly moving query, prunes most of the tree.
    pub fn nearest_with_hint(&self, query: &Point, hint: usize) -> Option<Neighbor> {
        self.nearest_from(query, Some(hint))
    }

    fn nearest_from(&self, query: &Point, hint: Option<usize>) -> Option<Neighbor> {
        if self.nodes.is_empty() {
            return None;
        }
        let q = [query.x, query.y, query.z];
        let mut best = match hint.and_then(|h| self.slot.get(h)) {
            Some(&k) => Neighbor {
                index: self.order[k],
                distance_squared: squared_distance(&self.points[k], &q),
            },
            None => Neighbor {
                index: usize::MAX,
                distance_squared: f64::INFINITY,
            },
        };
        self.search(0, &q, &mut best);
        Some(best)
    }

    fn search(&self, node: usize, q: &[f64; 3], best: &mut Neighbor) {
        match self.nodes[node].kind {
            NodeKind::Leaf { start, end } => {
                for k in start..end {
                    let cand = Neighbor {
                        index: self.order[k],
                        distance_squared: squared_distance(&self.points[k], q),
                    };
                    if cand.better_than(best) {
                        *best = cand;
                    }
                }
            }
            NodeKind::Split {
                axis,
                value,
                left,
                right,
            } => {
                let (near, far) = if q[axis] <= value {
                    (left, right)
                } else {
                    (right, left)
                };
                // equal distance still has to be visited for the index tie-break
                if best.distance_squared == f64::INFINITY
                    || self.nodes[near].distance_squared(q) <= best.distance_squared
                {
                    self.search(near, q, best);
                }
                if self.nodes[far].distance_squared(q) <= best.distance_squared {
                    self.search(far, q, best);
                }
            }
        }
    }
}

fn squared_distance(p: &[f64; 3], q: &[f64; 3]) -> f64 {
    (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)
}

fn build_node(points: &[Point], order: &mut [usize], offset: usize, nodes: &mut Vec<Node>) -> usize {
    let id = nodes.len();
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in order.iter() {
        for a in 0..3 {
            lo[a] = lo[a].min(points[i][a]);
            hi[a] = hi[a].max(points[i][a]);
        }
    }
    if order.len() <= LEAF_SIZE {
        nodes.push(Node {
            lo,
            hi,
            kind: NodeKind::Leaf {
                start: offset,
                end: offset + order.len(),
            },
        });
        return id;
    }
    let axis = (0..3)
        .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
        .unwrap();
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b))
    });
    let value = points[order[mid]][axis];
    nodes.push(Node {
        lo,
        hi,
        kind: NodeKind::Leaf { start: 0, end: 0 },
    });
    let (l, r) = order.split_at_mut(mid);
    let left = build_node(points, l, offset, nodes);
    let right = build_node(points, r, offset + mid, nodes);
    nodes[id].kind = NodeKind::Split {
        axis,
        value,
        left,
        right,
    };
    id
}
