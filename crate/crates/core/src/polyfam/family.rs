use std::fmt;

use serde::{Serialize, Serializer};

use super::parse::parse_polys;
use super::poly::MultiPoly;
use super::PolyError;

/// An ordered, nonempty list of polynomials in a common number of variables.
#[derive(Clone, PartialEq, Eq)]
pub struct PolyFamily {
    nvars: usize,
    polys: Vec<MultiPoly>,
}

impl PolyFamily {
    pub fn new(polys: Vec<MultiPoly>) -> Result<Self, PolyError> {
        let Some(first) = polys.first() else {
            return Err(PolyError::EmptyFamily);
        };
        let nvars = first.nvars();
        if let Some(bad) = polys.iter().find(|p| p.nvars() != nvars) {
            return Err(PolyError::MismatchedVars {
                expected: nvars,
                found: bad.nvars(),
            });
        }
        Ok(PolyFamily { nvars, polys })
    }

    /// Parses a comma-separated family, inferring the variable count when
    /// `nvars` is `None`.
    pub fn parse(text: &str, nvars: Option<usize>) -> Result<Self, PolyError> {
        let polys = parse_polys(text, nvars).map_err(PolyError::Parse)?;
        Self::new(polys)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn polys(&self) -> &[MultiPoly] {
        &self.polys
    }

    pub fn get(&self, i: usize) -> &MultiPoly {
        &self.polys[i]
    }

    /// Family degree: the largest member degree (0 if every member is zero).
    pub fn degree(&self) -> u32 {
        self.polys.iter().filter_map(|p| p.degree()).max().unwrap_or(0)
    }

    pub fn is_linear(&self) -> bool {
        self.polys.iter().all(|p| p.is_affine())
    }

    /// Indices of members with a nonzero constant term.
    pub fn nonzero_constants(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| !self.polys[i].constant_term().is_zero())
            .collect()
    }

    pub fn permuted(&self, order: &[usize]) -> PolyFamily {
        PolyFamily {
            nvars: self.nvars,
            polys: order.iter().map(|&i| self.polys[i].clone()).collect(),
        }
    }
}

impl fmt::Display for PolyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.polys.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PolyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl Serialize for PolyFamily {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<String> = self.polys.iter().map(|p| p.to_string()).collect();
        v.serialize(s)
    }
}

impl std::str::FromStr for PolyFamily {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s, None)
    }
}

/// `p ~ q` iff `deg p = deg q` and `deg(p - q) < deg p`. Any two constants
/// are equivalent.
pub fn equivalent(p: &MultiPoly, q: &MultiPoly) -> Result<bool, PolyError> {
    if p.nvars() != q.nvars() {
        return Err(PolyError::MismatchedVars {
            expected: p.nvars(),
            found: q.nvars(),
        });
    }
    if p.is_constant() && q.is_constant() {
        return Ok(true);
    }
    let dp = p.degree();
    if dp != q.degree() {
        return Ok(false);
    }
    // Option<u32> orders None (-inf) below every degree.
    Ok(p.sub(q).degree() < dp)
}

/// Per-degree counts of equivalence classes, `counts[i]` for degree `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct WeightVector {
    pub counts: Vec<usize>,
}

impl WeightVector {
    pub fn new(counts: Vec<usize>) -> Self {
        WeightVector { counts }
    }

    pub fn degree(&self) -> usize {
        self.counts.len()
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.counts.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Class label for each member (the smallest member index in its class).
/// Equivalence is transitive within a degree, so union-find over pairs
/// recovers the classes.
pub fn equivalence_classes(fam: &PolyFamily) -> Vec<usize> {
    let k = fam.len();
    let mut uf = UnionFind((0..k).collect());
    for i in 0..k {
        for j in i + 1..k {
            if equivalent(fam.get(i), fam.get(j)).unwrap_or(false) {
                uf.union(i, j);
            }
        }
    }
    (0..k).map(|i| uf.find(i)).collect()
}

pub fn weight_vector(fam: &PolyFamily) -> Result<WeightVector, PolyError> {
    if let Some(i) = fam.polys().iter().position(|p| p.is_constant()) {
        return Err(PolyError::ConstantMember(i));
    }
    let labels = equivalence_classes(fam);
    let mut counts = vec![0usize; fam.degree() as usize];
    for (i, &l) in labels.iter().enumerate() {
        if l == i {
            let d = fam.get(i).degree().expect("non-constant") as usize;
            counts[d - 1] += 1;
        }
    }
    Ok(WeightVector { counts })
}

/// Degree first, then right-aligned lexicographic comparison from the top
/// degree down.
pub fn weight_less(w: &WeightVector, w2: &WeightVector) -> bool {
    if w.degree() != w2.degree() {
        return w.degree() < w2.degree();
    }
    for (a, b) in w.counts.iter().rev().zip(w2.counts.iter().rev()) {
        if a != b {
            return a < b;
        }
    }
    false
}

/// Every member and every pairwise difference is non-constant.
pub fn is_nice(fam: &PolyFamily) -> bool {
    let ps = fam.polys();
    ps.iter().all(|p| !p.is_constant())
        && (0..ps.len()).all(|i| (i + 1..ps.len()).all(|j| !ps[i].sub(&ps[j]).is_constant()))
}

/// Nice, and the first member attains the family degree.
pub fn is_standard(fam: &PolyFamily) -> bool {
    is_nice(fam) && fam.get(0).degree() == Some(fam.degree())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(s: &str) -> PolyFamily {
        PolyFamily::parse(s, None).unwrap()
    }

    fn p(s: &str) -> MultiPoly {
        super::super::parse::parse_poly(s, 1).unwrap()
    }

    #[test]
    fn equivalence_examples() {
        assert!(equivalent(&p("t^2+t"), &p("t^2")).unwrap());
        assert!(!equivalent(&p("t^2+t"), &p("3t^2")).unwrap());
        assert!(equivalent(&p("t^2+t"), &p("t^2+t")).unwrap());
        assert!(equivalent(&p("1"), &p("2")).unwrap());
        assert!(!equivalent(&p("t"), &p("t^2")).unwrap());
    }

    #[test]
    fn weight_vectors() {
        let w = weight_vector(&fam("t, 2t, 3t, t^2, t^2-t, 4t^2+t, t^3")).unwrap();
        assert_eq!(w.counts, vec![3, 2, 1]);
        assert_eq!(weight_vector(&fam("t")).unwrap().counts, vec![1]);
        assert_eq!(weight_vector(&fam("t, 2t")).unwrap().counts, vec![2]);
        assert!(matches!(
            weight_vector(&fam("t, 1")),
            Err(PolyError::ConstantMember(1))
        ));
    }

    #[test]
    fn weight_order() {
        let w = |v: &[usize]| WeightVector::new(v.to_vec());
        assert!(weight_less(&w(&[1]), &w(&[0, 1])));
        assert!(weight_less(&w(&[2, 1]), &w(&[3, 1])));
        assert!(weight_less(&w(&[5, 1]), &w(&[1, 2])));
        assert!(!weight_less(&w(&[1, 2]), &w(&[5, 1])));
        assert!(!weight_less(&w(&[2, 1]), &w(&[2, 1])));
    }

    #[test]
    fn nice_and_standard() {
        assert!(!is_nice(&fam("t, t+1")));
        assert!(is_nice(&fam("t, t^2")));
        assert!(!is_standard(&fam("t, t^2")));
        assert!(is_standard(&fam("t^2, t")));
    }
}
