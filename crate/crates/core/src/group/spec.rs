//! Text form of group descriptions.
//!
//! ```text
//! spec      := cyclic(n) | dihedral(n) | symmetric(n) | sl2(p)
//!            | product(spec, spec, ...) | direct_product(spec, ...)
//!            | heisenberg(z=ABELIAN[,p=N]; w=ABELIAN[,p=N][; pairing=PAIRING])
//! ABELIAN   := Z<n>^<k> | Z<n> | Zp^<k> | Zp | Z<n>xZ<m>x...
//! PAIRING   := symplectic | zero | table[i-j:v0/v1/..., ...]
//! ```
//!
//! `Zp` takes its modulus from the `p=` key of the same section. A pairing
//! table lists the values `{e_i, e_j}` on the standard generators of `Z` as
//! vectors in `W`; omitted entries are zero. The default pairing is
//! `symplectic`, which sends `(z, z')` to `Σ z_{2i} z'_{2i+1} − z_{2i+1} z'_{2i}`
//! in the first coordinate of `W`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupSpec {
    Cyclic(u32),
    Product(Vec<GroupSpec>),
    Dihedral(u32),
    Symmetric(u32),
    Sl2(u32),
    Heisenberg(PairingSpec),
}

/// A Heisenberg carrier `Z × W` with an antisymmetric bi-additive pairing.
/// `z` and `w` list the cyclic moduli of the two abelian factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairingSpec {
    pub z: Vec<u32>,
    pub w: Vec<u32>,
    pub pairing: Pairing,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pairing {
    Symplectic,
    Zero,
    /// `(i, j, value)`: `{e_i, e_j} = value ∈ W`.
    Table(Vec<(usize, usize, Vec<i64>)>),
}

impl PairingSpec {
    /// Full generator table `t[i][j][k]`, entries reduced into `0..w[k]`.
    pub fn generator_table(&self) -> Result<Vec<Vec<Vec<u64>>>> {
        let (nz, nw) = (self.z.len(), self.w.len());
        let mut t = vec![vec![vec![0u64; nw]; nz]; nz];
        let reduce = |v: i64, m: u32| v.rem_euclid(m as i64) as u64;
        match &self.pairing {
            Pairing::Zero => {}
            Pairing::Symplectic => {
                if nz % 2 != 0 {
                    return Err(Error::MalformedPairing(format!(
                        "symplectic pairing needs an even number of Z coordinates, got {nz}"
                    )));
                }
                if nw == 0 {
                    return Err(Error::MalformedPairing("W is trivial".into()));
                }
                for i in (0..nz).step_by(2) {
                    t[i][i + 1][0] = 1 % self.w[0] as u64;
                    t[i + 1][i][0] = reduce(-1, self.w[0]);
                }
            }
            Pairing::Table(entries) => {
                for (i, j, v) in entries {
                    if *i >= nz || *j >= nz {
                        return Err(Error::MalformedPairing(format!("generator index {i}-{j} out of range")));
                    }
                    if v.len() != nw {
                        return Err(Error::MalformedPairing(format!(
                            "value for {i}-{j} has {} coordinates, W has {nw}",
                            v.len()
                        )));
                    }
                    for k in 0..nw {
                        t[*i][*j][k] = reduce(v[k], self.w[k]);
                    }
                }
            }
        }
        Ok(t)
    }
}

impl GroupSpec {
    /// Order as an exact integer; `None` if it overflows `u128`.
    pub fn order(&self) -> Option<u128> {
        match self {
            GroupSpec::Cyclic(n) => Some(*n as u128),
            GroupSpec::Product(fs) => fs.iter().try_fold(1u128, |acc, f| acc.checked_mul(f.order()?)),
            GroupSpec::Dihedral(n) => Some(2 * *n as u128),
            GroupSpec::Symmetric(n) => (1..=*n as u128).try_fold(1u128, |a, k| a.checked_mul(k)),
            GroupSpec::Sl2(p) => {
                let p = *p as u128;
                Some(p * (p * p - 1))
            }
            GroupSpec::Heisenberg(ps) => ps.z.iter().chain(&ps.w).try_fold(1u128, |a, &m| a.checked_mul(m as u128)),
        }
    }

    /// The product of cyclic groups with the same element numbering as the
    /// additive carrier of a Heisenberg spec (`W` coordinates first).
    pub fn additive_carrier(ps: &PairingSpec) -> GroupSpec {
        GroupSpec::Product(ps.w.iter().chain(&ps.z).map(|&m| GroupSpec::Cyclic(m)).collect())
    }
}

fn fmt_abelian(ms: &[u32]) -> String {
    if ms.is_empty() {
        return "Z1".into();
    }
    if ms.len() > 1 && ms.iter().all(|&m| m == ms[0]) {
        return format!("Z{}^{}", ms[0], ms.len());
    }
    ms.iter().map(|m| format!("Z{m}")).collect::<Vec<_>>().join("x")
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Cyclic(n) => write!(f, "cyclic({n})"),
            GroupSpec::Dihedral(n) => write!(f, "dihedral({n})"),
            GroupSpec::Symmetric(n) => write!(f, "symmetric({n})"),
            GroupSpec::Sl2(p) => write!(f, "sl2({p})"),
            GroupSpec::Product(fs) => {
                write!(f, "product(")?;
                for (i, s) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, ")")
            }
            GroupSpec::Heisenberg(ps) => {
                write!(f, "heisenberg(z={};w={};pairing=", fmt_abelian(&ps.z), fmt_abelian(&ps.w))?;
                match &ps.pairing {
                    Pairing::Symplectic => write!(f, "symplectic")?,
                    Pairing::Zero => write!(f, "zero")?,
                    Pairing::Table(es) => {
                        write!(f, "table[")?;
                        for (n, (i, j, v)) in es.iter().enumerate() {
                            if n > 0 {
                                write!(f, ",")?;
                            }
                            let vs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                            write!(f, "{i}-{j}:{}", vs.join("/"))?;
                        }
                        write!(f, "]")?;
                    }
                }
                write!(f, ")")
            }
        }
    }
}

fn perr(input: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        input: input.to_string(),
        reason: reason.into(),
    }
}

/// Splits on `sep` at bracket depth zero.
fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn parse_u32(input: &str, s: &str) -> Result<u32> {
    s.trim()
        .parse()
        .map_err(|_| perr(input, format!("expected a positive integer, got `{}`", s.trim())))
}

fn parse_abelian(input: &str, s: &str, p: Option<u32>) -> Result<Vec<u32>> {
    let s = s.trim();
    let mut out = Vec::new();
    for part in s.split('x') {
        let part = part.trim();
        let body = part
            .strip_prefix('Z')
            .ok_or_else(|| perr(input, format!("abelian factor `{part}` must start with Z")))?;
        let (base, exp) = match body.split_once('^') {
            Some((b, e)) => (b, parse_u32(input, e)?),
            None => (body, 1),
        };
        let m = if base == "p" {
            p.ok_or_else(|| perr(input, "`Zp` needs a `p=` key"))?
        } else {
            parse_u32(input, base)?
        };
        if m == 0 {
            return Err(perr(input, "modulus must be positive"));
        }
        for _ in 0..exp {
            out.push(m);
        }
    }
    Ok(out)
}

fn parse_pairing(input: &str, s: &str) -> Result<Pairing> {
    let s = s.trim();
    match s {
        "symplectic" => return Ok(Pairing::Symplectic),
        "zero" => return Ok(Pairing::Zero),
        _ => {}
    }
    let body = s
        .strip_prefix("table[")
        .and_then(|b| b.strip_suffix(']'))
        .ok_or_else(|| perr(input, format!("unknown pairing `{s}`")))?;
    let mut entries = Vec::new();
    for e in body.split(',').map(str::trim).filter(|e| !e.is_empty()) {
        let (ij, v) = e
            .split_once(':')
            .ok_or_else(|| perr(input, format!("table entry `{e}` needs i-j:value")))?;
        let (i, j) = ij
            .split_once('-')
            .ok_or_else(|| perr(input, format!("table entry `{e}` needs i-j")))?;
        let value = v
            .split('/')
            .map(|x| x.trim().parse::<i64>().map_err(|_| perr(input, format!("bad table value `{x}`"))))
            .collect::<Result<Vec<_>>>()?;
        entries.push((parse_u32(input, i)? as usize, parse_u32(input, j)? as usize, value));
    }
    Ok(Pairing::Table(entries))
}

fn parse_heisenberg(input: &str, body: &str) -> Result<GroupSpec> {
    let mut z = None;
    let mut w = None;
    let mut pairing = Pairing::Symplectic;
    for section in split_top(body, ';') {
        let section = section.trim();
        if section.is_empty() {
            continue;
        }
        let mut kv = Vec::new();
        for item in split_top(section, ',') {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| perr(input, format!("expected key=value, got `{}`", item.trim())))?;
            kv.push((k.trim(), v.trim()));
        }
        let p = kv.iter().find(|(k, _)| *k == "p").map(|(_, v)| parse_u32(input, v)).transpose()?;
        let (key, val) = kv[0];
        match key {
            "z" => z = Some(parse_abelian(input, val, p)?),
            "w" => w = Some(parse_abelian(input, val, p)?),
            "pairing" => pairing = parse_pairing(input, val)?,
            _ => return Err(perr(input, format!("unknown heisenberg key `{key}`"))),
        }
    }
    Ok(GroupSpec::Heisenberg(PairingSpec {
        z: z.ok_or_else(|| perr(input, "missing z="))?,
        w: w.ok_or_else(|| perr(input, "missing w="))?,
        pairing,
    }))
}

fn parse_spec(input: &str, s: &str) -> Result<GroupSpec> {
    let s = s.trim();
    let open = s
        .find('(')
        .ok_or_else(|| perr(input, format!("expected family(args), got `{s}`")))?;
    if !s.ends_with(')') {
        return Err(perr(input, "missing closing parenthesis"));
    }
    let name = s[..open].trim();
    let body = &s[open + 1..s.len() - 1];
    match name {
        "cyclic" => Ok(GroupSpec::Cyclic(parse_u32(input, body)?)),
        "dihedral" => Ok(GroupSpec::Dihedral(parse_u32(input, body)?)),
        "symmetric" => Ok(GroupSpec::Symmetric(parse_u32(input, body)?)),
        "sl2" => Ok(GroupSpec::Sl2(parse_u32(input, body)?)),
        "product" | "direct_product" => {
            let fs = split_top(body, ',')
                .into_iter()
                .map(|f| parse_spec(input, f))
                .collect::<Result<Vec<_>>>()?;
            Ok(GroupSpec::Product(fs))
        }
        "heisenberg" => parse_heisenberg(input, body),
        _ => Err(perr(input, format!("unknown group family `{name}`"))),
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_matches('"');
        parse_spec(s, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_simple_families() {
        assert_eq!("cyclic(5)".parse::<GroupSpec>().unwrap(), GroupSpec::Cyclic(5));
        assert_eq!(
            "direct_product(cyclic(2), dihedral(3))".parse::<GroupSpec>().unwrap(),
            GroupSpec::Product(vec![GroupSpec::Cyclic(2), GroupSpec::Dihedral(3)])
        );
        assert!("foo(3)".parse::<GroupSpec>().is_err());
        assert!("cyclic(x)".parse::<GroupSpec>().is_err());
    }

    #[test]
    fn parse_heisenberg_forms() {
        let a: GroupSpec = "heisenberg(z=Zp^2,p=3;w=Zp,p=3;pairing=symplectic)".parse().unwrap();
        let b: GroupSpec = "heisenberg(z=Z3^2;w=Z3)".parse().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.order(), Some(27));
        assert_eq!(a.to_string(), "heisenberg(z=Z3^2;w=Z3;pairing=symplectic)");
        let t: GroupSpec = "heisenberg(z=Z5xZ5;w=Z5;pairing=table[0-1:2,1-0:-2])".parse().unwrap();
        assert_eq!(t.to_string().parse::<GroupSpec>().unwrap(), t);
    }

    #[test]
    fn display_round_trips() {
        for s in ["cyclic(7)", "product(cyclic(2),symmetric(3))", "sl2(5)", "dihedral(4)"] {
            let g: GroupSpec = s.parse().unwrap();
            assert_eq!(g.to_string(), s);
        }
    }
}
