use std::fmt;

use super::AtomSet;

/// LTL formula over atoms indexed by an [`AtomSet`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ltl {
    True,
    False,
    Atom(usize),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Eventually(Box<Ltl>),
    Always(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
}

impl Ltl {
    pub fn atom(i: usize) -> Ltl {
        Ltl::Atom(i)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Ltl) -> Ltl {
        Ltl::Not(Box::new(f))
    }

    pub fn and(a: Ltl, b: Ltl) -> Ltl {
        Ltl::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Ltl, b: Ltl) -> Ltl {
        Ltl::or(Ltl::not(a), b)
    }

    pub fn next(f: Ltl) -> Ltl {
        Ltl::Next(Box::new(f))
    }

    pub fn eventually(f: Ltl) -> Ltl {
        Ltl::Eventually(Box::new(f))
    }

    pub fn always(f: Ltl) -> Ltl {
        Ltl::Always(Box::new(f))
    }

    pub fn until(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Until(Box::new(a), Box::new(b))
    }

    /// Top-level conjuncts, flattening nested `And`.
    pub fn conjuncts(&self) -> Vec<&Ltl> {
        match self {
            Ltl::And(a, b) => {
                let mut out = a.conjuncts();
                out.extend(b.conjuncts());
                out
            }
            other => vec![other],
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Ltl::True | Ltl::False | Ltl::Atom(_) => 0,
            Ltl::Not(f) | Ltl::Next(f) | Ltl::Eventually(f) | Ltl::Always(f) => 1 + f.depth(),
            Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Until(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn display<'a>(&'a self, atoms: &'a AtomSet) -> LtlDisplay<'a> {
        LtlDisplay { f: self, atoms }
    }
}

pub struct LtlDisplay<'a> {
    f: &'a Ltl,
    atoms: &'a AtomSet,
}

impl fmt::Display for LtlDisplay<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self.f, self.atoms, out)
    }
}

fn write_formula(f: &Ltl, atoms: &AtomSet, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match f {
        Ltl::True => write!(out, "true"),
        Ltl::False => write!(out, "false"),
        Ltl::Atom(i) => write!(out, "{}", atoms.name(*i)),
        Ltl::Not(g) => {
            write!(out, "!")?;
            write_formula(g, atoms, out)
        }
        Ltl::Next(g) | Ltl::Eventually(g) | Ltl::Always(g) => {
            let op = match f {
                Ltl::Next(_) => "X ",
                Ltl::Eventually(_) => "<> ",
                _ => "[] ",
            };
            write!(out, "{op}")?;
            write_formula(g, atoms, out)
        }
        Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Until(a, b) => {
            let op = match f {
                Ltl::And(..) => "&&",
                Ltl::Or(..) => "||",
                _ => "U",
            };
            write!(out, "(")?;
            write_formula(a, atoms, out)?;
            write!(out, " {op} ")?;
            write_formula(b, atoms, out)?;
            write!(out, ")")
        }
    }
}
