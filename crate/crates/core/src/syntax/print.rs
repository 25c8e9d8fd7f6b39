use super::{Term, TermKind};
use std::fmt;

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    Top,
    Fun,
    Arg,
}

fn write_term(t: &Term, ctx: Ctx, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t.kind() {
        TermKind::Var(x) => write!(f, "{x}"),
        TermKind::Zero => write!(f, "0"),
        TermKind::One => write!(f, "1"),
        TermKind::Lam(x, b) => {
            if ctx != Ctx::Top {
                write!(f, "(")?;
            }
            write!(f, "\\{x}. ")?;
            write_term(b, Ctx::Top, f)?;
            if ctx != Ctx::Top {
                write!(f, ")")?;
            }
            Ok(())
        }
        TermKind::If(c, a, b) => {
            if ctx != Ctx::Top {
                write!(f, "(")?;
            }
            write!(f, "if ")?;
            write_term(c, Ctx::Top, f)?;
            write!(f, " then ")?;
            write_term(a, Ctx::Top, f)?;
            write!(f, " else ")?;
            write_term(b, Ctx::Top, f)?;
            if ctx != Ctx::Top {
                write!(f, ")")?;
            }
            Ok(())
        }
        TermKind::App(m, n) => {
            if ctx == Ctx::Arg {
                write!(f, "(")?;
            }
            write_term(m, Ctx::Fun, f)?;
            write!(f, " ")?;
            write_term(n, Ctx::Arg, f)?;
            if ctx == Ctx::Arg {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, Ctx::Top, f)
    }
}
