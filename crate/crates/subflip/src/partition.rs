//! Partitions of a dense vertex set with restriction, common refinement,
//! and refinement testing.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::VertexSet;

/// A partition of `0..host_size` into nonempty parts. Parts are kept in
/// canonical order (ascending minimum element, ids sorted within a part),
/// so equal partitions compare equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    host_size: usize,
    part_of: Vec<usize>,
    parts: Vec<Vec<usize>>,
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition{:?}", self.parts)
    }
}

impl Partition {
    pub fn from_parts(host_size: usize, parts: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; host_size];
        let mut canonical: Vec<Vec<usize>> = Vec::with_capacity(parts.len());
        for mut part in parts {
            if part.is_empty() {
                return Err(Error::InvalidPartition("empty part".into()));
            }
            part.sort_unstable();
            part.dedup();
            for &v in &part {
                if v >= host_size {
                    return Err(Error::VertexOutOfRange(v, host_size));
                }
                if seen[v] {
                    return Err(Error::InvalidPartition(format!("vertex {v} in two parts")));
                }
                seen[v] = true;
            }
            canonical.push(part);
        }
        if let Some(v) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidPartition(format!("vertex {v} in no part")));
        }
        canonical.sort_by_key(|p| p[0]);
        let mut part_of = vec![0; host_size];
        for (i, part) in canonical.iter().enumerate() {
            for &v in part {
                part_of[v] = i;
            }
        }
        Ok(Partition { host_size, part_of, parts: canonical })
    }

    /// Builds a partition from a part-id per vertex (ids need not be dense).
    pub fn from_assignment(assignment: &[usize]) -> Result<Self> {
        let mut parts: Vec<Vec<usize>> = Vec::new();
        let mut ids: Vec<usize> = assignment.to_vec();
        ids.sort_unstable();
        ids.dedup();
        for id in ids {
            parts.push((0..assignment.len()).filter(|&v| assignment[v] == id).collect());
        }
        Partition::from_parts(assignment.len(), parts)
    }

    /// The one-part partition `{V}`.
    pub fn whole(host_size: usize) -> Result<Self> {
        if host_size == 0 {
            return Err(Error::InvalidPartition("empty host".into()));
        }
        Partition::from_parts(host_size, vec![(0..host_size).collect()])
    }

    /// All-singletons partition.
    pub fn singletons(host_size: usize) -> Result<Self> {
        if host_size == 0 {
            return Err(Error::InvalidPartition("empty host".into()));
        }
        Partition::from_parts(host_size, (0..host_size).map(|v| vec![v]).collect())
    }

    pub fn host_size(&self) -> usize {
        self.host_size
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn part_of(&self, v: usize) -> usize {
        self.part_of[v]
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &[usize] {
        &self.parts[i]
    }

    /// Restriction `P|_S`, as a partition of the subset relabeled onto
    /// `0..|S|` in ascending order of the original ids. Emptied parts are
    /// dropped.
    pub fn restrict(&self, s: &VertexSet) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidPartition("empty host".into()));
        }
        let verts: Vec<usize> = s.iter().copied().collect();
        if let Some(&v) = verts.iter().find(|&&v| v >= self.host_size) {
            return Err(Error::VertexOutOfRange(v, self.host_size));
        }
        let assignment: Vec<usize> = verts.iter().map(|&v| self.part_of[v]).collect();
        Partition::from_assignment(&assignment)
    }

    /// Common refinement `P ∧ Q`: all nonempty pairwise intersections.
    pub fn refine(&self, other: &Partition) -> Result<Self> {
        if self.host_size != other.host_size {
            return Err(Error::HostMismatch(self.host_size, other.host_size));
        }
        let assignment: Vec<usize> = (0..self.host_size)
            .map(|v| self.part_of[v] * other.len() + other.part_of[v])
            .collect();
        Partition::from_assignment(&assignment)
    }

    /// Whether every part of `self` lies inside some part of `coarser`.
    pub fn is_refinement_of(&self, coarser: &Partition) -> Result<bool> {
        if self.host_size != coarser.host_size {
            return Err(Error::HostMismatch(self.host_size, coarser.host_size));
        }
        Ok(self
            .parts
            .iter()
            .all(|part| part.iter().all(|&v| coarser.part_of[v] == coarser.part_of[part[0]])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_and_validation() {
        let p = Partition::from_parts(4, vec![vec![2, 3], vec![1, 0]]).unwrap();
        assert_eq!(p.parts(), &[vec![0, 1], vec![2, 3]]);
        assert_eq!(p.part_of(3), 1);

        assert!(Partition::from_parts(3, vec![vec![0, 1]]).is_err());
        assert!(Partition::from_parts(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::from_parts(2, vec![vec![0, 1], vec![]]).is_err());
    }

    #[test]
    fn refine_is_idempotent() {
        let p = Partition::from_parts(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(p.refine(&p).unwrap(), p);
    }

    #[test]
    fn restrict_drops_emptied_parts() {
        let p = Partition::from_parts(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let r = p.restrict(&VertexSet::from([0, 2])).unwrap();
        // Relabeled: 0 -> 0, 2 -> 1.
        assert_eq!(r.parts(), &[vec![0], vec![1]]);
    }

    #[test]
    fn crossing_partitions_refine_to_singletons() {
        let p = Partition::from_parts(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let q = Partition::from_parts(4, vec![vec![0, 2], vec![1, 3]]).unwrap();
        let r = p.refine(&q).unwrap();
        assert_eq!(r, Partition::singletons(4).unwrap());
        assert!(r.is_refinement_of(&p).unwrap());
        assert!(r.is_refinement_of(&q).unwrap());
        assert!(!p.is_refinement_of(&q).unwrap());
    }
}
