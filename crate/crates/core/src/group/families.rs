use std::sync::Arc;

use super::spec::{GroupSpec, PairingSpec};
use super::{Elem, FiniteGroup};
use crate::error::{Error, Result};

pub(crate) enum Law {
    Cyclic(u32),
    Product {
        factors: Vec<FiniteGroup>,
        radix: Vec<u32>,
    },
    Dihedral(u32),
    Symmetric {
        n: usize,
        perms: Vec<[u8; 7]>,
    },
    Sl2 {
        p: u32,
        mats: Vec<[u32; 4]>,
        index: Vec<u32>,
    },
    Heisenberg(Arc<HeisenbergLaw>),
    Quotient {
        parent: FiniteGroup,
        proj: Arc<Vec<Elem>>,
        reps: Arc<Vec<Elem>>,
    },
}

/// Decodes a mixed-radix id, first coordinate least significant.
pub(crate) fn decode(mut id: u64, radix: &[u32]) -> Vec<u32> {
    radix
        .iter()
        .map(|&m| {
            let d = (id % m as u64) as u32;
            id /= m as u64;
            d
        })
        .collect()
}

pub(crate) fn encode(digits: &[u32], radix: &[u32]) -> u64 {
    digits.iter().zip(radix).rev().fold(0u64, |acc, (&d, &m)| acc * m as u64 + d as u64)
}

fn radix_add(a: u64, b: u64, radix: &[u32]) -> u64 {
    let (mut a, mut b, mut out, mut scale) = (a, b, 0u64, 1u64);
    for &m in radix {
        let m = m as u64;
        out += ((a % m + b % m) % m) * scale;
        a /= m;
        b /= m;
        scale *= m;
    }
    out
}

fn radix_neg(a: u64, radix: &[u32]) -> u64 {
    let (mut a, mut out, mut scale) = (a, 0u64, 1u64);
    for &m in radix {
        let m = m as u64;
        out += ((m - a % m) % m) * scale;
        a /= m;
        scale *= m;
    }
    out
}

fn is_small_prime(p: u32) -> bool {
    matches!(p, 2 | 3 | 5 | 7 | 11 | 13)
}

/// Lexicographic rank of a permutation of `0..n`.
fn perm_rank(p: &[u8]) -> u32 {
    let n = p.len();
    let mut rank = 0u32;
    for i in 0..n {
        let smaller = p[i + 1..].iter().filter(|&&x| x < p[i]).count() as u32;
        rank = rank * (n - i) as u32 + smaller;
    }
    rank
}

fn all_perms(n: usize) -> Vec<[u8; 7]> {
    fn rec(n: usize, cur: &mut Vec<u8>, used: &mut [bool; 7], out: &mut Vec<[u8; 7]>) {
        if cur.len() == n {
            let mut p = [0u8; 7];
            p[..n].copy_from_slice(cur);
            out.push(p);
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                cur.push(v as u8);
                rec(n, cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::new(), &mut [false; 7], &mut out);
    out
}

/// Heisenberg law on `Z × W`: `(z,w)·(z',w') = (z+z', w+w'+{z,z'})`.
#[derive(Debug)]
pub struct HeisenbergLaw {
    pub spec: PairingSpec,
    z_order: u64,
    w_order: u64,
    table: Vec<Vec<Vec<u64>>>,
}

impl HeisenbergLaw {
    pub(crate) fn new(spec: &PairingSpec) -> Result<Self> {
        let table = spec.generator_table()?;
        let (nz, nw) = (spec.z.len(), spec.w.len());
        // Well-definedness: m_i·{e_i,e_j} = 0 and m_j·{e_i,e_j} = 0 in W.
        for i in 0..nz {
            for j in 0..nz {
                for k in 0..nw {
                    let v = table[i][j][k];
                    let wk = spec.w[k] as u64;
                    if !(spec.z[i] as u64 * v).is_multiple_of(wk) || !(spec.z[j] as u64 * v).is_multiple_of(wk) {
                        return Err(Error::MalformedPairing(format!(
                            "{{e_{i}, e_{j}}} = {v} in Z/{wk} is not killed by the orders of e_{i}, e_{j}"
                        )));
                    }
                    if (v + table[j][i][k]) % wk != 0 {
                        return Err(Error::MalformedPairing(format!(
                            "not antisymmetric: {{e_{i}, e_{j}}} + {{e_{j}, e_{i}}} ≠ 0"
                        )));
                    }
                }
                if i == j && table[i][i].iter().any(|&v| v != 0) {
                    return Err(Error::MalformedPairing(format!("{{e_{i}, e_{i}}} ≠ 0")));
                }
            }
        }
        Ok(HeisenbergLaw {
            spec: spec.clone(),
            z_order: spec.z.iter().map(|&m| m as u64).product(),
            w_order: spec.w.iter().map(|&m| m as u64).product(),
            table,
        })
    }

    pub fn z_order(&self) -> usize {
        self.z_order as usize
    }

    pub fn w_order(&self) -> usize {
        self.w_order as usize
    }

    /// `(z_index, w_index)` of a group id.
    #[inline]
    pub fn split(&self, id: Elem) -> (u64, u64) {
        let id = id as u64;
        (id / self.w_order, id % self.w_order)
    }

    #[inline]
    pub fn join(&self, z: u64, w: u64) -> Elem {
        (w + self.w_order * z) as Elem
    }

    pub fn z_coords(&self, z: u64) -> Vec<u32> {
        decode(z, &self.spec.z)
    }

    pub fn w_coords(&self, w: u64) -> Vec<u32> {
        decode(w, &self.spec.w)
    }

    pub fn z_add(&self, a: u64, b: u64) -> u64 {
        radix_add(a, b, &self.spec.z)
    }

    pub fn z_neg(&self, a: u64) -> u64 {
        radix_neg(a, &self.spec.z)
    }

    pub fn w_add(&self, a: u64, b: u64) -> u64 {
        radix_add(a, b, &self.spec.w)
    }

    pub fn w_neg(&self, a: u64) -> u64 {
        radix_neg(a, &self.spec.w)
    }

    /// `{z, z'}` as a `W` index.
    pub fn pair(&self, z: u64, z2: u64) -> u64 {
        let (a, b) = (self.z_coords(z), self.z_coords(z2));
        let nw = self.spec.w.len();
        let mut out = vec![0u64; nw];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                if bj == 0 {
                    continue;
                }
                for k in 0..nw {
                    let m = self.spec.w[k] as u64;
                    out[k] = (out[k] + (ai as u64 * bj as u64 % m) * self.table[i][j][k]) % m;
                }
            }
        }
        let digits: Vec<u32> = out.into_iter().map(|v| v as u32).collect();
        encode(&digits, &self.spec.w)
    }

    fn mul(&self, a: Elem, b: Elem) -> Elem {
        let (za, wa) = self.split(a);
        let (zb, wb) = self.split(b);
        let w = self.w_add(self.w_add(wa, wb), self.pair(za, zb));
        self.join(self.z_add(za, zb), w)
    }

    fn inv(&self, a: Elem) -> Elem {
        let (z, w) = self.split(a);
        self.join(self.z_neg(z), self.w_neg(w))
    }

    pub fn name(&self, id: Elem) -> String {
        let (z, w) = self.split(id);
        let f = |v: Vec<u32>| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        format!("(({}),({}))", f(self.z_coords(z)), f(self.w_coords(w)))
    }
}

impl Law {
    pub(crate) fn build(spec: &GroupSpec, cap: usize) -> Result<Law> {
        Ok(match spec {
            GroupSpec::Cyclic(n) => {
                if *n == 0 {
                    return Err(Error::InvalidParameter("cyclic(0)".into()));
                }
                Law::Cyclic(*n)
            }
            GroupSpec::Product(fs) => {
                if fs.is_empty() {
                    return Err(Error::InvalidParameter("empty product".into()));
                }
                let factors = fs.iter().map(|f| FiniteGroup::with_cap(f, cap)).collect::<Result<Vec<_>>>()?;
                let radix = factors.iter().map(|f| f.order() as u32).collect();
                Law::Product { factors, radix }
            }
            GroupSpec::Dihedral(n) => {
                if *n == 0 {
                    return Err(Error::InvalidParameter("dihedral(0)".into()));
                }
                Law::Dihedral(*n)
            }
            GroupSpec::Symmetric(n) => {
                if *n == 0 || *n > 7 {
                    return Err(Error::InvalidParameter(format!("symmetric({n}) needs 1 ≤ n ≤ 7")));
                }
                Law::Symmetric {
                    n: *n as usize,
                    perms: all_perms(*n as usize),
                }
            }
            GroupSpec::Sl2(p) => {
                if !is_small_prime(*p) {
                    return Err(Error::InvalidParameter(format!("sl2({p}) needs a prime p ≤ 13")));
                }
                let p = *p;
                let mut mats = vec![[1, 0, 0, 1]];
                for a in 0..p {
                    for b in 0..p {
                        for c in 0..p {
                            for d in 0..p {
                                if (a * d + p * p - b * c) % p == 1 && [a, b, c, d] != [1, 0, 0, 1] {
                                    mats.push([a, b, c, d]);
                                }
                            }
                        }
                    }
                }
                let mut index = vec![u32::MAX; (p * p * p * p) as usize];
                for (i, m) in mats.iter().enumerate() {
                    index[Self::sl2_key(p, m)] = i as u32;
                }
                Law::Sl2 { p, mats, index }
            }
            GroupSpec::Heisenberg(ps) => Law::Heisenberg(Arc::new(HeisenbergLaw::new(ps)?)),
        })
    }

    fn sl2_key(p: u32, m: &[u32; 4]) -> usize {
        (((m[0] * p + m[1]) * p + m[2]) * p + m[3]) as usize
    }

    pub(crate) fn mul(&self, a: Elem, b: Elem) -> Elem {
        match self {
            Law::Cyclic(n) => ((a as u64 + b as u64) % *n as u64) as Elem,
            Law::Product { factors, radix } => {
                let (xa, xb) = (decode(a as u64, radix), decode(b as u64, radix));
                let d: Vec<u32> = factors.iter().zip(xa.iter().zip(&xb)).map(|(f, (&x, &y))| f.mul(x, y)).collect();
                encode(&d, radix) as Elem
            }
            Law::Dihedral(n) => {
                let n = *n;
                let (ra, ea) = (a % n, a / n);
                let (rb, eb) = (b % n, b / n);
                let r = if ea == 0 { (ra + rb) % n } else { (ra + n - rb) % n };
                r + n * ((ea + eb) % 2)
            }
            Law::Symmetric { n, perms } => {
                let (s, t) = (&perms[a as usize], &perms[b as usize]);
                let mut c = [0u8; 7];
                for i in 0..*n {
                    c[i] = s[t[i] as usize];
                }
                perm_rank(&c[..*n])
            }
            Law::Sl2 { p, mats, index } => {
                let (x, y) = (&mats[a as usize], &mats[b as usize]);
                let p = *p;
                let m = [
                    (x[0] * y[0] + x[1] * y[2]) % p,
                    (x[0] * y[1] + x[1] * y[3]) % p,
                    (x[2] * y[0] + x[3] * y[2]) % p,
                    (x[2] * y[1] + x[3] * y[3]) % p,
                ];
                index[Self::sl2_key(p, &m)]
            }
            Law::Heisenberg(h) => h.mul(a, b),
            Law::Quotient { parent, proj, reps } => proj[parent.mul(reps[a as usize], reps[b as usize]) as usize],
        }
    }

    pub(crate) fn inv(&self, a: Elem) -> Elem {
        match self {
            Law::Cyclic(n) => ((*n - a % *n) % *n) as Elem,
            Law::Product { factors, radix } => {
                let d: Vec<u32> = factors.iter().zip(decode(a as u64, radix)).map(|(f, x)| f.inv(x)).collect();
                encode(&d, radix) as Elem
            }
            Law::Dihedral(n) => {
                if a < *n {
                    (*n - a) % *n
                } else {
                    a
                }
            }
            Law::Symmetric { n, perms } => {
                let s = &perms[a as usize];
                let mut c = [0u8; 7];
                for i in 0..*n {
                    c[s[i] as usize] = i as u8;
                }
                perm_rank(&c[..*n])
            }
            Law::Sl2 { p, mats, index } => {
                let x = &mats[a as usize];
                let p = *p;
                let m = [x[3], (p - x[1]) % p, (p - x[2]) % p, x[0]];
                index[Self::sl2_key(p, &m)]
            }
            Law::Heisenberg(h) => h.inv(a),
            Law::Quotient { parent, proj, reps } => proj[parent.inv(reps[a as usize]) as usize],
        }
    }

    pub(crate) fn name(&self, id: Elem) -> String {
        match self {
            Law::Cyclic(_) => id.to_string(),
            Law::Product { factors, radix } => {
                let parts: Vec<String> = factors.iter().zip(decode(id as u64, radix)).map(|(f, x)| f.elem_name(x)).collect();
                format!("({})", parts.join(","))
            }
            Law::Dihedral(n) => {
                let (r, e) = (id % n, id / n);
                if e == 0 {
                    format!("r^{r}")
                } else {
                    format!("r^{r}s")
                }
            }
            Law::Symmetric { n, perms } => {
                let p: Vec<String> = perms[id as usize][..*n].iter().map(|x| x.to_string()).collect();
                format!("[{}]", p.join(","))
            }
            Law::Sl2 { mats, .. } => {
                let m = &mats[id as usize];
                format!("[[{},{}],[{},{}]]", m[0], m[1], m[2], m[3])
            }
            Law::Heisenberg(h) => h.name(id),
            Law::Quotient { parent, reps, .. } => format!("{}H", parent.elem_name(reps[id as usize])),
        }
    }
}

impl FiniteGroup {
    pub(crate) fn quotient_group(parent: &FiniteGroup, label: String, proj: Vec<Elem>, reps: Vec<Elem>) -> FiniteGroup {
        let order = reps.len();
        FiniteGroup::from_law(
            label,
            None,
            order,
            Law::Quotient {
                parent: parent.clone(),
                proj: Arc::new(proj),
                reps: Arc::new(reps),
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perm_rank_is_lex() {
        let ps = all_perms(4);
        for (i, p) in ps.iter().enumerate() {
            assert_eq!(perm_rank(&p[..4]) as usize, i);
        }
    }

    #[test]
    fn mixed_radix_round_trip() {
        let r = [3, 5, 2];
        for id in 0..30 {
            assert_eq!(encode(&decode(id, &r), &r), id);
        }
        assert_eq!(
            radix_add(encode(&[2, 4, 1], &r), encode(&[2, 3, 1], &r), &r),
            encode(&[1, 2, 0], &r)
        );
        assert_eq!(radix_neg(encode(&[1, 0, 1], &r), &r), encode(&[2, 0, 1], &r));
    }

    #[test]
    fn dihedral_relations() {
        let g = FiniteGroup::parse("dihedral(5)").unwrap();
        let (r, s) = (1, 5);
        assert_eq!(g.pow(r, 5), 0);
        assert_eq!(g.mul(s, s), 0);
        // s r s = r^{-1}
        assert_eq!(g.mul(g.mul(s, r), s), g.inv(r));
    }

    #[test]
    fn sl2_by_brute_force() {
        for p in [2u32, 3, 5, 7] {
            let mut count = 0;
            for a in 0..p {
                for b in 0..p {
                    for c in 0..p {
                        for d in 0..p {
                            if (a * d + p * p - b * c) % p == 1 {
                                count += 1;
                            }
                        }
                    }
                }
            }
            assert_eq!(FiniteGroup::parse(&format!("sl2({p})")).unwrap().order(), count);
        }
    }

    #[test]
    fn heisenberg_law_coordinates() {
        let g = FiniteGroup::parse("heisenberg(z=Z3^2;w=Z3)").unwrap();
        let h = g.heisenberg().unwrap();
        // (e_0, 0)·(e_1, 0) = (e_0 + e_1, 1), (e_1, 0)·(e_0, 0) = (e_0 + e_1, -1)
        let e0 = h.join(1, 0);
        let e1 = h.join(3, 0);
        assert_eq!(g.mul(e0, e1), h.join(4, 1));
        assert_eq!(g.mul(e1, e0), h.join(4, 2));
        assert_eq!(g.elem_name(h.join(4, 1)), "((1,1),(1))");
    }
}
