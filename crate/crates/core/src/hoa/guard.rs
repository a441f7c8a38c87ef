//! Boolean guards over atomic propositions, stored in disjunctive normal form.

use std::fmt;

/// A conjunction of literals. Bit `k` of `care` says AP `k` occurs in the cube,
/// and bit `k` of `value` gives its required polarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cube {
    pub care: u64,
    pub value: u64,
}

impl Cube {
    pub const TRUE: Cube = Cube { care: 0, value: 0 };

    pub fn literal(ap: usize, positive: bool) -> Cube {
        let bit = 1u64 << ap;
        Cube {
            care: bit,
            value: if positive { bit } else { 0 },
        }
    }

    /// Does the full valuation `val` satisfy this cube?
    pub fn matches(&self, val: u64) -> bool {
        val & self.care == self.value
    }

    pub fn intersect(&self, other: &Cube) -> Option<Cube> {
        let conflict = self.care & other.care & (self.value ^ other.value);
        if conflict != 0 {
            None
        } else {
            Some(Cube {
                care: self.care | other.care,
                value: self.value | other.value,
            })
        }
    }

    /// True when every valuation satisfying `other` satisfies `self`.
    pub fn subsumes(&self, other: &Cube) -> bool {
        self.care & other.care == self.care && other.value & self.care == self.value
    }

    /// Highest AP index mentioned, if any.
    pub fn max_ap(&self) -> Option<usize> {
        if self.care == 0 {
            None
        } else {
            Some(63 - self.care.leading_zeros() as usize)
        }
    }
}

/// A disjunction of cubes. The empty disjunction is `false`.
#[derive(Clone, Debug, PartialEq, Eq, Default, Hash)]
pub struct Guard {
    cubes: Vec<Cube>,
}

impl Guard {
    pub fn tt() -> Guard {
        Guard {
            cubes: vec![Cube::TRUE],
        }
    }

    pub fn ff() -> Guard {
        Guard { cubes: Vec::new() }
    }

    pub fn from_cubes(cubes: impl IntoIterator<Item = Cube>) -> Guard {
        let mut g = Guard {
            cubes: cubes.into_iter().collect(),
        };
        g.simplify();
        g
    }

    pub fn literal(ap: usize, positive: bool) -> Guard {
        Guard {
            cubes: vec![Cube::literal(ap, positive)],
        }
    }

    /// The guard satisfied by exactly one full valuation over `num_aps` propositions.
    pub fn minterm(val: u64, num_aps: usize) -> Guard {
        let care = if num_aps >= 64 { u64::MAX } else { (1u64 << num_aps) - 1 };
        Guard {
            cubes: vec![Cube {
                care,
                value: val & care,
            }],
        }
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn is_false(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn is_true(&self) -> bool {
        self.cubes.iter().any(|c| c.care == 0)
    }

    pub fn eval(&self, val: u64) -> bool {
        self.cubes.iter().any(|c| c.matches(val))
    }

    pub fn max_ap(&self) -> Option<usize> {
        self.cubes.iter().filter_map(Cube::max_ap).max()
    }

    pub fn or(&self, other: &Guard) -> Guard {
        Guard::from_cubes(self.cubes.iter().chain(other.cubes.iter()).copied())
    }

    pub fn and(&self, other: &Guard) -> Guard {
        let mut out = Vec::with_capacity(self.cubes.len() * other.cubes.len());
        for a in &self.cubes {
            for b in &other.cubes {
                if let Some(c) = a.intersect(b) {
                    out.push(c);
                }
            }
        }
        Guard::from_cubes(out)
    }

    pub fn not(&self) -> Guard {
        let mut acc = Guard::tt();
        for cube in &self.cubes {
            // not(l1 & l2 & ...) = !l1 | !l2 | ...
            let mut negated = Vec::new();
            let mut care = cube.care;
            while care != 0 {
                let ap = care.trailing_zeros() as usize;
                care &= care - 1;
                negated.push(Cube::literal(ap, cube.value & (1 << ap) == 0));
            }
            acc = acc.and(&Guard { cubes: negated });
            if acc.is_false() {
                break;
            }
        }
        acc
    }

    /// Drops duplicate and subsumed cubes and sorts the rest.
    fn simplify(&mut self) {
        self.cubes.sort_by_key(|c| (c.care.count_ones(), c.care, c.value));
        self.cubes.dedup();
        let mut kept: Vec<Cube> = Vec::with_capacity(self.cubes.len());
        for c in self.cubes.drain(..) {
            if !kept.iter().any(|k| k.subsumes(&c)) {
                kept.push(c);
            }
        }
        kept.sort();
        self.cubes = kept;
    }

    /// Semantic equality by enumerating all valuations over `num_aps` propositions.
    pub fn equivalent(&self, other: &Guard, num_aps: usize) -> bool {
        assert!(num_aps <= 24, "valuation enumeration capped at 24 APs");
        (0..1u64 << num_aps).all(|v| self.eval(v) == other.eval(v))
    }
}

impl fmt::Display for Guard {
    /// HOA label syntax: `t`, `f`, or cubes joined by `|`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cubes.is_empty() {
            return write!(f, "f");
        }
        for (i, cube) in self.cubes.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            if cube.care == 0 {
                write!(f, "t")?;
                continue;
            }
            let mut care = cube.care;
            let mut first = true;
            while care != 0 {
                let ap = care.trailing_zeros();
                care &= care - 1;
                if !first {
                    write!(f, "&")?;
                }
                first = false;
                if cube.value & (1 << ap) == 0 {
                    write!(f, "!")?;
                }
                write!(f, "{ap}")?;
            }
        }
        Ok(())
    }
}
