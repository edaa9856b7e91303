use std::cmp::Ordering;

/// Operator generator kinds. `Q`/`P` are canonical, `A`/`Adag` bosonic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Q,
    P,
    A,
    Adag,
}

/// Which pair of generators a mode is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Canonical,
    Bosonic,
}

impl Kind {
    pub fn family(self) -> Family {
        match self {
            Kind::Q | Kind::P => Family::Canonical,
            Kind::A | Kind::Adag => Family::Bosonic,
        }
    }
}

/// A single generator on a mode (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator {
    pub mode: u32,
    pub kind: Kind,
}

impl Generator {
    pub fn new(mode: u32, kind: Kind) -> Self {
        Generator { mode, kind }
    }
}

/// Ordered product of generator powers. Adjacent equal generators are merged.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct OperatorWord {
    factors: Vec<(Generator, u32)>,
}

impl OperatorWord {
    pub fn identity() -> Self {
        OperatorWord::default()
    }

    pub fn from_factors<I: IntoIterator<Item = (Generator, u32)>>(factors: I) -> Self {
        let mut w = OperatorWord::identity();
        for (g, e) in factors {
            w.push(g, e);
        }
        w
    }

    pub fn from_letters<I: IntoIterator<Item = Generator>>(letters: I) -> Self {
        OperatorWord::from_factors(letters.into_iter().map(|g| (g, 1)))
    }

    pub fn push(&mut self, g: Generator, exp: u32) {
        if exp == 0 {
            return;
        }
        match self.factors.last_mut() {
            Some((last, e)) if *last == g => *e += exp,
            _ => self.factors.push((g, exp)),
        }
    }

    pub fn factors(&self) -> &[(Generator, u32)] {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|(_, e)| e).sum()
    }

    /// Expanded letter sequence, e.g. `Q^2 P` -> `[Q, Q, P]`.
    pub fn letters(&self) -> impl Iterator<Item = Generator> + '_ {
        self.factors
            .iter()
            .flat_map(|&(g, e)| std::iter::repeat_n(g, e as usize))
    }

    pub fn concat(&self, other: &OperatorWord) -> OperatorWord {
        let mut w = self.clone();
        for &(g, e) in &other.factors {
            w.push(g, e);
        }
        w
    }

    pub fn reversed(&self) -> OperatorWord {
        OperatorWord::from_factors(self.factors.iter().rev().copied())
    }

    pub fn modes(&self) -> impl Iterator<Item = u32> + '_ {
        self.factors.iter().map(|(g, _)| g.mode)
    }
}

/// Graded-lexicographic: higher degree first, then the expanded letter
/// sequences compared by (mode, kind).
impl Ord for OperatorWord {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .degree()
            .cmp(&self.degree())
            .then_with(|| self.letters().cmp(other.letters()))
    }
}

impl PartialOrd for OperatorWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: Generator = Generator { mode: 0, kind: Kind::Q };
    const P: Generator = Generator { mode: 0, kind: Kind::P };

    #[test]
    fn merges_adjacent_generators() {
        let w = OperatorWord::from_letters([Q, Q, P, P, P, Q]);
        assert_eq!(w.factors(), &[(Q, 2), (P, 3), (Q, 1)]);
        assert_eq!(w.degree(), 6);
        let c = OperatorWord::from_letters([Q]).concat(&OperatorWord::from_letters([Q, P]));
        assert_eq!(c.factors(), &[(Q, 2), (P, 1)]);
    }

    #[test]
    fn graded_lex_order() {
        let qq = OperatorWord::from_letters([Q, Q]);
        let qp = OperatorWord::from_letters([Q, P]);
        let pq = OperatorWord::from_letters([P, Q]);
        let pp = OperatorWord::from_letters([P, P]);
        let q = OperatorWord::from_letters([Q]);
        let mut v = vec![q.clone(), pp.clone(), OperatorWord::identity(), pq.clone(), qq.clone(), qp.clone()];
        v.sort();
        assert_eq!(v, vec![qq, qp, pq, pp, q, OperatorWord::identity()]);
    }
}
