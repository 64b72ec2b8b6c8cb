use super::Keypoint;
use crate::geometry::Correspondence;

#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    pub correspondence: Correspondence,
    /// Best / second-best descriptor distance ratio.
    pub ratio: f64,
    pub distance: f64,
    pub src_index: usize,
    pub dst_index: usize,
}

/// Putative correspondences `F` between the two frames.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchSet {
    pub matches: Vec<Match>,
}

impl MatchSet {
    pub fn len(&self) -> usize {
        self.matches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    pub fn correspondences(&self) -> Vec<Correspondence> {
        self.matches.iter().map(|m| m.correspondence).collect()
    }
}

fn squared_distance(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index and squared distance of the two nearest descriptors in `pool`.
fn two_nearest(query: &[f32], pool: &[Keypoint]) -> (usize, f32, f32) {
    let (mut best, mut d1, mut d2) = (0, f32::INFINITY, f32::INFINITY);
    for (j, kp) in pool.iter().enumerate() {
        let d = squared_distance(query, &kp.descriptor);
        if d < d1 {
            d2 = d1;
            d1 = d;
            best = j;
        } else if d < d2 {
            d2 = d;
        }
    }
    (best, d1, d2)
}

/// Nearest-neighbour matching with Lowe's ratio test and a symmetric
/// cross-check. Matches are ordered by source keypoint index.
pub fn match_descriptors(a: &[Keypoint], b: &[Keypoint], ratio: f64) -> MatchSet {
    if a.is_empty() || b.is_empty() {
        return MatchSet::default();
    }
    let back: Vec<usize> = b.iter().map(|kp| two_nearest(&kp.descriptor, a).0).collect();

    let mut matches: Vec<Match> = Vec::new();
    for (i, kp) in a.iter().enumerate() {
        let (j, d1, d2) = two_nearest(&kp.descriptor, b);
        if back[j] != i {
            continue;
        }
        let (d1, d2) = ((d1 as f64).sqrt(), (d2 as f64).sqrt());
        let r = if d1 == 0.0 { 0.0 } else { d1 / d2 };
        if r >= ratio {
            continue;
        }
        let src = kp.position;
        if matches.iter().any(|m| m.correspondence.src == src) {
            continue;
        }
        matches.push(Match {
            correspondence: Correspondence::new(src, b[j].position),
            ratio: r,
            distance: d1,
            src_index: i,
            dst_index: j,
        });
    }
    MatchSet { matches }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;

    fn kp(x: f64, desc: Vec<f32>) -> Keypoint {
        Keypoint {
            position: Point2::new(x, 0.0),
            scale: 1.0,
            orientation: 0.0,
            response: 1.0,
            descriptor: desc,
        }
    }

    #[test]
    fn identical_sets_match_themselves() {
        let kps: Vec<_> = (0..5)
            .map(|i| {
                let mut d = vec![0.0f32; 8];
                d[i] = 1.0;
                kp(i as f64, d)
            })
            .collect();
        let m = match_descriptors(&kps, &kps, 0.8);
        assert_eq!(m.len(), 5);
        for (i, mt) in m.matches.iter().enumerate() {
            assert_eq!((mt.src_index, mt.dst_index), (i, i));
            assert_eq!(mt.ratio, 0.0);
        }
    }

    #[test]
    fn empty_input_gives_empty_set() {
        assert!(match_descriptors(&[], &[kp(0.0, vec![1.0])], 0.8).is_empty());
    }
}
