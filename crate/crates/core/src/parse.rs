//! Recursive-descent parser for state expressions and polynomials.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' integer)?
//! atom   := integer ('/' integer)? | symbol | '(' expr ')'
//! ```
//!
//! State symbols are `x<i>_<m>`, `y<i>_<m>`, `phi<i>_<m>`, `psi<i>_<m>`; polynomial variables
//! are `x<i>`. Products keep their written order, so odd factors pick up Koszul signs.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use crate::classical::Poly;
use crate::error::{Error, Result};
use crate::fock::{Coefficient, Kind, Sheaf, State};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    end: (usize, usize),
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Lexer> {
    let mut toks = Vec::new();
    let (mut line, mut col) = (1, 1);
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
        } else if c.is_whitespace() {
            col += 1;
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            toks.push((Tok::Int(s.parse().unwrap()), l0, c0));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            toks.push((Tok::Ident(s), l0, c0));
        } else if "+-*/^()".contains(c) {
            toks.push((Tok::Op(c), l0, c0));
            col += 1;
            i += 1;
        } else {
            return Err(syntax(l0, c0, format!("unexpected character '{c}'")));
        }
    }
    Ok(Lexer {
        toks,
        end: (line, col),
    })
}

/// Values the parser can build: states of one sheaf or polynomials.
trait Algebra: Clone {
    fn constant(&self, c: Coefficient) -> Self;
    fn symbol(&self, name: &str, line: usize, col: usize) -> Result<Self>;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
}

#[derive(Clone)]
struct StateAlg(State);

impl Algebra for StateAlg {
    fn constant(&self, c: Coefficient) -> Self {
        StateAlg(State::vacuum(self.0.sheaf(), self.0.dim()).scale(&c))
    }

    fn symbol(&self, name: &str, line: usize, col: usize) -> Result<Self> {
        let (kind, rest) = [
            ("phi", Kind::Phi),
            ("psi", Kind::Psi),
            ("x", Kind::X),
            ("y", Kind::Y),
        ]
        .into_iter()
        .find_map(|(p, k)| name.strip_prefix(p).map(|r| (k, r)))
        .ok_or_else(|| syntax(line, col, format!("unknown symbol '{name}'")))?;
        let (coord, weight) = rest
            .split_once('_')
            .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<i64>().ok()?)))
            .ok_or_else(|| {
                syntax(
                    line,
                    col,
                    format!("expected <kind><coord>_<weight>, got '{name}'"),
                )
            })?;
        State::generator(self.0.sheaf(), self.0.dim(), kind, coord, weight).map(StateAlg)
    }

    fn add(&self, o: &Self) -> Self {
        StateAlg(self.0.add(&o.0).expect("one sheaf"))
    }

    fn mul(&self, o: &Self) -> Self {
        StateAlg(self.0.poly_mul(&o.0).expect("one sheaf"))
    }

    fn neg(&self) -> Self {
        StateAlg(self.0.neg())
    }
}

#[derive(Clone)]
struct PolyAlg(Poly);

impl Algebra for PolyAlg {
    fn constant(&self, c: Coefficient) -> Self {
        PolyAlg(Poly::constant(self.0.dim, c))
    }

    fn symbol(&self, name: &str, line: usize, col: usize) -> Result<Self> {
        let coord = name
            .strip_prefix('x')
            .and_then(|r| r.parse::<usize>().ok())
            .ok_or_else(|| syntax(line, col, format!("expected a variable x<i>, got '{name}'")))?;
        if coord < 1 || coord > self.0.dim {
            return Err(Error::BadCoordinate {
                coord,
                dim: self.0.dim,
            });
        }
        Ok(PolyAlg(Poly::var(self.0.dim, coord)))
    }

    fn add(&self, o: &Self) -> Self {
        PolyAlg(self.0.add(&o.0))
    }

    fn mul(&self, o: &Self) -> Self {
        PolyAlg(self.0.mul(&o.0))
    }

    fn neg(&self) -> Self {
        PolyAlg(self.0.neg())
    }
}

struct Parser<'a, A> {
    lx: &'a Lexer,
    pos: usize,
    unit: A,
}

impl<A: Algebra> Parser<'_, A> {
    fn peek(&self) -> Option<&Tok> {
        self.lx.toks.get(self.pos).map(|t| &t.0)
    }

    fn here(&self) -> (usize, usize) {
        self.lx
            .toks
            .get(self.pos)
            .map(|t| (t.1, t.2))
            .unwrap_or(self.lx.end)
    }

    fn fail<T>(&self, message: &str) -> Result<T> {
        let (l, c) = self.here();
        Err(syntax(l, c, message))
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<A> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.add(&self.term()?.neg());
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<A> {
        let mut acc = self.unary()?;
        while self.eat('*') {
            acc = acc.mul(&self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<A> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn integer(&mut self) -> Result<BigInt> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = n.clone();
                self.pos += 1;
                Ok(n)
            }
            _ => self.fail("expected an integer"),
        }
    }

    fn power(&mut self) -> Result<A> {
        let base = self.atom()?;
        if self.eat('^') {
            let e = self.integer()?;
            let Some(e) = e.to_u32().filter(|e| *e <= 64) else {
                return self.fail("exponent out of range");
            };
            let mut acc = base.constant(Coefficient::one());
            for _ in 0..e {
                acc = acc.mul(&base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<A> {
        let (line, col) = self.here();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                let mut c = Coefficient::from_integer(n);
                if self.eat('/') {
                    let d = self.integer()?;
                    if d == BigInt::from(0) {
                        return Err(syntax(line, col, "division by zero"));
                    }
                    c /= Coefficient::from_integer(d);
                }
                Ok(self.unit.constant(c))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                self.unit.symbol(&name, line, col)
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(')') {
                    return self.fail("expected ')'");
                }
                Ok(v)
            }
            Some(_) => self.fail("expected a number, symbol or '('"),
            None => self.fail("unexpected end of input"),
        }
    }
}

fn run<A: Algebra>(text: &str, unit: A) -> Result<A> {
    let lx = lex(text)?;
    let mut p = Parser {
        lx: &lx,
        pos: 0,
        unit,
    };
    let v = p.expr()?;
    if p.pos != lx.toks.len() {
        return p.fail("unexpected trailing input");
    }
    Ok(v)
}

/// Parse a state expression in the given sheaf.
pub fn parse_state(text: &str, sheaf: Sheaf, dim: usize) -> Result<State> {
    Ok(run(text, StateAlg(State::zero(sheaf, dim)))?.0)
}

/// Parse a polynomial in `x1..x<dim>`.
pub fn parse_poly(text: &str, dim: usize) -> Result<Poly> {
    Ok(run(text, PolyAlg(Poly::zero(dim)))?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chiral::h_vector;
    use crate::fock::rat;
    use crate::sample::{random_state, rng};

    #[test]
    fn examples() {
        let v = parse_state("x1_1*psi1_1 - x2_1*psi2_1", Sheaf::Omega, 2).unwrap();
        assert_eq!(v.to_string(), "x1_1*psi1_1 - x2_1*psi2_1");
        let h = parse_state("x1_1*phi2_0 - x2_1*phi1_0", Sheaf::Omega, 2).unwrap();
        assert_eq!(h, h_vector());
        assert!(parse_state("psi1_1*psi1_1", Sheaf::Omega, 2)
            .unwrap()
            .is_zero());
        let a = parse_state("psi2_1*phi1_0", Sheaf::Omega, 2).unwrap();
        let b = parse_state("-phi1_0*psi2_1", Sheaf::Omega, 2).unwrap();
        assert_eq!(a, b);
        let c = parse_state("3/2*(x1_0 + 1)^2", Sheaf::Omega, 1).unwrap();
        assert_eq!(c.to_string(), "3/2 + 3*x1_0 + 3/2*x1_0^2");
        assert_eq!(parse_poly("x2", 2).unwrap(), Poly::var(2, 2));
        assert_eq!(
            parse_poly("2*x1^2 - x1*x1", 2).unwrap(),
            Poly::var(2, 1).mul(&Poly::var(2, 1))
        );
        assert_eq!(
            parse_poly("-1/3", 1).unwrap(),
            Poly::constant(1, -crate::fock::ratio(1, 3))
        );
        assert_eq!(parse_poly("7", 1).unwrap(), Poly::constant(1, rat(7)));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_state("psi1_0", Sheaf::Omega, 2),
            Err(Error::OutOfRangeWeight { .. })
        ));
        assert_eq!(
            parse_state("x1_0 +\n  * y1_1", Sheaf::Omega, 2),
            Err(Error::Syntax {
                line: 2,
                column: 3,
                message: "expected a number, symbol or '('".into()
            })
        );
        assert!(matches!(
            parse_state("z1_0", Sheaf::Omega, 2),
            Err(Error::Syntax { column: 1, .. })
        ));
        assert!(matches!(
            parse_poly("x3", 2),
            Err(Error::BadCoordinate { .. })
        ));
        assert!(matches!(
            parse_poly("(x1", 2),
            Err(Error::Syntax { column: 4, .. })
        ));
        assert!(matches!(
            parse_poly("x1 $", 2),
            Err(Error::Syntax { column: 4, .. })
        ));
    }

    #[test]
    fn print_parse_round_trip() {
        let mut r = rng(11);
        for k in 0..200 {
            let sheaf = if k % 2 == 0 {
                Sheaf::Omega
            } else {
                Sheaf::Theta
            };
            let s = random_state(&mut r, sheaf, 2, 3, 4);
            assert_eq!(parse_state(&s.to_string(), sheaf, 2).unwrap(), s, "{s}");
        }
    }
}
