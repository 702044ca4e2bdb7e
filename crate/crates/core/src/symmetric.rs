//! Groups with an involutive automorphism and a distinguished subsemigroup.
//!
//! Elements are addressed as `i64`: table indices `0..n` for finite groups,
//! the integers themselves for the built-in `(Z, N0, -id)` instance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multiplication table of a finite group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroup {
    mult: Vec<Vec<usize>>,
    inv: Vec<usize>,
    identity: usize,
}

impl FiniteGroup {
    /// Builds a group from its Cayley table, checking the Latin-square
    /// property, the identity and associativity.
    pub fn from_table(mult: Vec<Vec<usize>>) -> Result<Self> {
        let n = mult.len();
        if n == 0 {
            return Err(Error::MalformedTable("empty table".into()));
        }
        for (i, row) in mult.iter().enumerate() {
            if row.len() != n {
                return Err(Error::MalformedTable(format!("row {i} has length {}", row.len())));
            }
            if !is_permutation(row) {
                return Err(Error::MalformedTable(format!("row {i} is not a bijection")));
            }
        }
        for j in 0..n {
            let col: Vec<usize> = mult.iter().map(|r| r[j]).collect();
            if !is_permutation(&col) {
                return Err(Error::MalformedTable(format!("column {j} is not a bijection")));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| mult[e][g] == g && mult[g][e] == g))
            .ok_or_else(|| Error::MalformedTable("no identity element".into()))?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mult[mult[a][b]][c] != mult[a][mult[b][c]] {
                        return Err(Error::MalformedTable(format!(
                            "associativity fails on ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        let inv = (0..n)
            .map(|g| (0..n).find(|&h| mult[g][h] == identity).unwrap())
            .collect();
        Ok(Self { mult, inv, identity })
    }

    /// `Z/n` with element `k` standing for `k mod n`.
    pub fn cyclic(n: usize) -> Self {
        let mult = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(mult).expect("cyclic table is a group")
    }

    /// `Z/2 x Z/2`, elements encoded as two bits.
    pub fn klein_four() -> Self {
        let mult = (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect();
        Self::from_table(mult).expect("klein table is a group")
    }

    /// The symmetric group on `k` letters; element 0 is the identity and
    /// permutations are listed lexicographically. Product is composition
    /// `(a*b)(i) = a(b(i))`.
    pub fn symmetric(k: usize) -> Self {
        let perms = permutations(k);
        let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).unwrap();
        let mult = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| index(&(0..k).map(|i| a[b[i]]).collect()))
                    .collect()
            })
            .collect();
        Self::from_table(mult).expect("permutation table is a group")
    }

    pub fn order(&self) -> usize {
        self.mult.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mult
    }

    /// Conjugacy classes in order of their smallest element.
    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        let mut seen = vec![false; n];
        let mut classes = Vec::new();
        for g in 0..n {
            if seen[g] {
                continue;
            }
            let mut class: Vec<usize> = (0..n)
                .map(|h| self.mul(self.mul(h, g), self.inv(h)))
                .collect();
            class.sort_unstable();
            class.dedup();
            for &c in &class {
                seen[c] = true;
            }
            classes.push(class);
        }
        classes
    }

    /// Whether the permutation `phi` of elements is a group automorphism;
    /// returns the first failing pair otherwise.
    pub fn automorphism_witness(&self, phi: &[usize]) -> Option<(usize, usize)> {
        let n = self.order();
        for a in 0..n {
            for b in 0..n {
                if phi[self.mul(a, b)] != self.mul(phi[a], phi[b]) {
                    return Some((a, b));
                }
            }
        }
        None
    }
}

fn is_permutation(row: &[usize]) -> bool {
    let mut seen = vec![false; row.len()];
    for &x in row {
        if x >= row.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

pub(crate) fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let k = used.len();
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for i in 0..k {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Carrier {
    Finite {
        group: FiniteGroup,
        tau: Vec<usize>,
        in_s: Vec<bool>,
    },
    Integers,
}

/// A symmetric semigroup `(G, S, tau)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymSemigroup {
    carrier: Carrier,
}

/// One axiom in a [`ValidationReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub name: String,
    pub passed: bool,
    pub witness: Option<(i64, i64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub axioms: Vec<AxiomCheck>,
    /// `G = S ∪ S^{-1}`.
    pub is_total: bool,
    /// `G = S^{-1} S`; E+ is then cyclic for the group action.
    pub is_filtered: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.axioms.iter().all(|a| a.passed)
    }

    pub fn axiom(&self, name: &str) -> Option<&AxiomCheck> {
        self.axioms.iter().find(|a| a.name == name)
    }
}

/// Half-width of the integer range used when validating the `(Z, N0)` instance.
const INTEGER_SAMPLE_RADIUS: i64 = 12;

impl SymSemigroup {
    /// The instance `(Z, N0, -id)`.
    pub fn integers() -> Self {
        Self {
            carrier: Carrier::Integers,
        }
    }

    /// A finite group with involution `tau` (as a permutation of element
    /// indices) and subsemigroup given by its member list.
    pub fn finite(group: FiniteGroup, tau: Vec<usize>, s_set: &[usize]) -> Result<Self> {
        let n = group.order();
        if tau.len() != n || !is_permutation(&tau) {
            return Err(Error::MalformedTable("tau is not a permutation of the elements".into()));
        }
        let mut in_s = vec![false; n];
        for &s in s_set {
            if s >= n {
                return Err(Error::InvalidElement(s as i64));
            }
            in_s[s] = true;
        }
        Ok(Self {
            carrier: Carrier::Finite { group, tau, in_s },
        })
    }

    pub fn is_integers(&self) -> bool {
        matches!(self.carrier, Carrier::Integers)
    }

    pub fn group(&self) -> Option<&FiniteGroup> {
        match &self.carrier {
            Carrier::Finite { group, .. } => Some(group),
            Carrier::Integers => None,
        }
    }

    pub fn identity(&self) -> i64 {
        match &self.carrier {
            Carrier::Finite { group, .. } => group.identity() as i64,
            Carrier::Integers => 0,
        }
    }

    pub fn is_element(&self, g: i64) -> bool {
        match &self.carrier {
            Carrier::Finite { group, .. } => g >= 0 && (g as usize) < group.order(),
            Carrier::Integers => true,
        }
    }

    fn check(&self, g: i64) -> Result<()> {
        if self.is_element(g) {
            Ok(())
        } else {
            Err(Error::InvalidElement(g))
        }
    }

    pub fn mul(&self, a: i64, b: i64) -> i64 {
        match &self.carrier {
            Carrier::Finite { group, .. } => group.mul(a as usize, b as usize) as i64,
            Carrier::Integers => a + b,
        }
    }

    pub fn inv(&self, a: i64) -> i64 {
        match &self.carrier {
            Carrier::Finite { group, .. } => group.inv(a as usize) as i64,
            Carrier::Integers => -a,
        }
    }

    pub fn tau(&self, a: i64) -> i64 {
        match &self.carrier {
            Carrier::Finite { tau, .. } => tau[a as usize] as i64,
            Carrier::Integers => -a,
        }
    }

    /// `s♯ = tau(s)^{-1}`.
    pub fn sharp(&self, s: i64) -> i64 {
        self.inv(self.tau(s))
    }

    pub fn in_s(&self, g: i64) -> bool {
        match &self.carrier {
            Carrier::Finite { in_s, .. } => in_s[g as usize],
            Carrier::Integers => g >= 0,
        }
    }

    /// Elements inspected by validation: all of a finite group, or a
    /// symmetric integer range.
    pub fn elements(&self) -> Vec<i64> {
        match &self.carrier {
            Carrier::Finite { group, .. } => (0..group.order() as i64).collect(),
            Carrier::Integers => (-INTEGER_SAMPLE_RADIUS..=INTEGER_SAMPLE_RADIUS).collect(),
        }
    }

    /// Members of S among [`Self::elements`].
    pub fn s_elements(&self) -> Vec<i64> {
        self.elements().into_iter().filter(|&g| self.in_s(g)).collect()
    }

    /// The unit group `H(S) = S ∩ S^{-1}`.
    pub fn units(&self) -> Vec<i64> {
        self.elements()
            .into_iter()
            .filter(|&g| self.in_s(g) && self.in_s(self.inv(g)))
            .collect()
    }

    /// Fixed points of tau.
    pub fn tau_fixed(&self) -> Vec<i64> {
        self.elements().into_iter().filter(|&g| self.tau(g) == g).collect()
    }

    /// Checks every axiom and reports a witness pair for each failure.
    ///
    /// The fixed-group axiom is read as `hS = S` for `h` in `G^tau ∩ S`; the
    /// identity component of a discrete fixed group is trivial, and the full
    /// `G^tau` would reject `(Z/2, {e}, id)`.
    pub fn validate(&self) -> ValidationReport {
        let els = self.elements();
        let s = self.s_elements();
        let contains = |g: i64| match &self.carrier {
            Carrier::Integers => g.abs() <= INTEGER_SAMPLE_RADIUS,
            Carrier::Finite { .. } => true,
        };
        let mut axioms = Vec::new();

        let automorphism = match &self.carrier {
            Carrier::Finite { group, tau, .. } => group
                .automorphism_witness(tau)
                .map(|(a, b)| (a as i64, b as i64)),
            Carrier::Integers => None,
        };
        axioms.push(axiom("tau-automorphism", automorphism));

        let involution = els.iter().find(|&&g| self.tau(self.tau(g)) != g).map(|&g| (g, g));
        axioms.push(axiom("tau-involution", involution));

        let mut closure = None;
        'outer: for &a in &s {
            for &b in &s {
                let ab = self.mul(a, b);
                if contains(ab) && !self.in_s(ab) {
                    closure = Some((a, b));
                    break 'outer;
                }
            }
        }
        axioms.push(axiom("closure", closure));

        let sharp = s.iter().find(|&&a| !self.in_s(self.sharp(a))).map(|&a| (a, self.sharp(a)));
        axioms.push(axiom("sharp-invariance", sharp));

        let mut fixed_group = None;
        let fixed_in_s: Vec<i64> = self.tau_fixed().into_iter().filter(|&h| self.in_s(h)).collect();
        'outer2: for &h in &fixed_in_s {
            for &a in &s {
                let ha = self.mul(h, a);
                if contains(ha) && !self.in_s(ha) {
                    fixed_group = Some((h, a));
                    break 'outer2;
                }
            }
        }
        axioms.push(axiom("fixed-group-invariance", fixed_group));

        let e = self.identity();
        axioms.push(axiom("contains-identity", (!self.in_s(e)).then_some((e, e))));

        let is_total = els.iter().all(|&g| self.in_s(g) || self.in_s(self.inv(g)));
        let is_filtered = match &self.carrier {
            Carrier::Integers => true,
            Carrier::Finite { .. } => els.iter().all(|&g| {
                s.iter()
                    .any(|&a| s.iter().any(|&b| self.mul(self.inv(a), b) == g))
            }),
        };
        ValidationReport {
            axioms,
            is_total,
            is_filtered,
        }
    }

    /// `g ≺_S h` iff `g^{-1} h ∈ S`.
    pub fn order_leq(&self, g: i64, h: i64) -> Result<bool> {
        self.check(g)?;
        self.check(h)?;
        Ok(self.in_s(self.mul(self.inv(g), h)))
    }

    /// Sorts `elements` along `≺_S`, keeping input order among ties.
    pub fn sort_chain(&self, elements: &[i64]) -> Result<Vec<i64>> {
        for &g in elements {
            self.check(g)?;
        }
        for (i, &a) in elements.iter().enumerate() {
            for &b in &elements[i + 1..] {
                if !self.order_leq(a, b)? && !self.order_leq(b, a)? {
                    return Err(Error::NotAChain(a, b));
                }
            }
        }
        let mut sorted = elements.to_vec();
        sorted.sort_by(|&a, &b| {
            let ab = self.in_s(self.mul(self.inv(a), b));
            let ba = self.in_s(self.mul(self.inv(b), a));
            match (ab, ba) {
                (true, true) => std::cmp::Ordering::Equal,
                (true, false) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            }
        });
        Ok(sorted)
    }
}

fn axiom(name: &str, witness: Option<(i64, i64)>) -> AxiomCheck {
    AxiomCheck {
        name: name.to_string(),
        passed: witness.is_none(),
        witness,
    }
}
