//! Balog-Szemerédi-Gowers extraction and the four equivalent descriptions of
//! pairs of large multiplicative energy.
//!
//! Every comparison is made on integers after clearing denominators; square
//! roots are removed by squaring both sides. The constant audit behind
//! [`BSG_C0_SQUARED_LOG2`] is in `docs/constants.md`.

use num_bigint::BigUint;
use num_traits::{One, Signed};

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::group::Elem;
use crate::ledger::ConstantLedger;
use crate::par;
use crate::rational::{display, floor_u128, infer_k, int, pow, Rational};
use crate::setcalc::{convolution, energy, partial_product, product_set, same_group, MSet};
use crate::structure::{classify_small_doubling, verify_approx_group, ApproxGroupWitness};

/// `log₂ C₀²` in `|A‴·B‴|² ≤ C₀²·K^e·|A||B|`.
pub const BSG_C0_SQUARED_LOG2: u32 = 39;
/// Exponent of `K` in the squared product bound obtained by multiplying out the
/// proof's constants (`|A‴·B‴|²·L⁴ ≤ 2³⁹K¹⁶|A||B|`).
pub const BSG_AUDITED_EXPONENT: u32 = 16;
/// Exponent in the displayed form `|A‴·B‴| ≲ K⁷(|A||B|)^{1/2}`, squared.
pub const BSG_DISPLAYED_EXPONENT: u32 = 14;

#[derive(Clone, Debug)]
pub struct WeakBsgResult {
    /// `A' = {a ∈ A : a·b ∈ C}` for the chosen `b`.
    pub a_prime: MSet,
    pub d: MSet,
    pub b: Elem,
    /// `|(A'×A') ∩ Ω|`.
    pub omega_in_a_prime: u64,
    /// `|Ω|` over `A×A`.
    pub omega_total: u64,
    /// `(a,a') ∈ Ω` iff `#{b : a·b ∈ C, a'·b ∈ C} ≤ omega_threshold = ε|B|/2K²`.
    pub omega_threshold: Rational,
    /// `#{(a,a') ∈ A'×A' : a·a'⁻¹ ∈ D}`.
    pub pairs_in_d: u64,
    pub k: Rational,
    pub k_prime_sq: Rational,
    pub eps: Rational,
    pub ledger: ConstantLedger,
}

fn check_weak_params(k: &Rational, k_prime_sq: &Rational, eps: &Rational) -> Result<()> {
    if *k < Rational::one() || *k_prime_sq < Rational::one() {
        return Err(Error::InvalidParameter(format!(
            "K and K' must be at least 1, got K={} K'^2={}",
            display(k),
            display(k_prime_sq)
        )));
    }
    if !eps.is_positive() || *eps >= Rational::one() {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0,1), got {}", display(eps))));
    }
    Ok(())
}

/// For each `a ∈ A` (by index), the set of indices `j` with `a·b_j ∈ C`.
fn incidence(a: &[Elem], b: &[Elem], c: &MSet) -> Vec<Bitset> {
    let g = c.group();
    par::map(a, |&x| {
        Bitset::from_ids(b.len(), (0..b.len() as u32).filter(|&j| c.contains(g.mul(x, b[j as usize]))))
    })
}

/// Weak BSG with `K'` given as a rational.
pub fn weak_bsg(a: &MSet, b: &MSet, c: &MSet, k: &Rational, k_prime: &Rational, eps: &Rational) -> Result<WeakBsgResult> {
    weak_bsg_squared(a, b, c, k, &pow(k_prime, 2), eps)
}

/// Weak BSG with `K'²` supplied directly, so that irrational `K'` with
/// rational square can be used.
pub fn weak_bsg_squared(a: &MSet, b: &MSet, c: &MSet, k: &Rational, k_prime_sq: &Rational, eps: &Rational) -> Result<WeakBsgResult> {
    same_group(a, b)?;
    same_group(a, c)?;
    check_weak_params(k, k_prime_sq, eps)?;
    let g = a.group();
    let (na, nb, nc) = (a.len(), b.len(), c.len());
    let (aa, bb) = (a.ids(), b.ids());
    let rows = incidence(&aa, &bb, c);
    let hits: u64 = rows.iter().map(|r| r.count() as u64).sum();

    let mut l = ConstantLedger::new();
    let nab = int(na * nb);
    if int(nc * nc) > k_prime_sq * &nab {
        return Err(Error::hypothesis(
            "|C|^2 <= K'^2|A||B|",
            nc * nc,
            format!("{}*{}", display(k_prime_sq), na * nb),
        ));
    }
    if nab > k * int(hits) {
        return Err(Error::hypothesis(
            "|A||B| <= K #{(a,b) : ab in C}",
            na * nb,
            format!("{}*{}", display(k), hits),
        ));
    }
    l.hard("|C|^2 <= K'^2|A||B|", int(nc * nc), k_prime_sq * &nab, "K'^2*|A||B|");
    l.hard("|A||B| <= K #{(a,b) : ab in C}", nab.clone(), k * int(hits), "K*#hits");

    let k2 = pow(k, 2);
    let threshold = eps * int(nb) / (int(2) * &k2);
    let cut = floor_u128(&threshold) as usize;

    // Ω rows and the pair sums needed for the Cauchy-Schwarz and Ω-mass rows.
    let stats: Vec<(Bitset, u64, u64)> = par::map_range(na, |i| {
        let mut om = Bitset::new(na);
        let (mut all, mut in_omega) = (0u64, 0u64);
        for (j, rj) in rows.iter().enumerate() {
            let n = rows[i].intersection_count(rj);
            all += n as u64;
            if n <= cut {
                om.insert(j as u32);
                in_omega += n as u64;
            }
        }
        (om, all, in_omega)
    });
    let pair_sum: u64 = stats.iter().map(|s| s.1).sum();
    let omega_mass: u64 = stats.iter().map(|s| s.2).sum();
    let omega: Vec<Bitset> = stats.into_iter().map(|s| s.0).collect();
    let omega_total: u64 = omega.iter().map(|r| r.count() as u64).sum();
    l.hard(
        "|A|^2|B| <= K^2 sum_b |A_b|^2",
        int(na * na * nb),
        &k2 * int(pair_sum),
        "K^2*sum_b|A_b|^2",
    );
    l.hard(
        "2K^2 sum_Omega n(a,a') <= eps|A|^2|B|",
        int(2) * &k2 * int(omega_mass),
        eps * int(na * na * nb),
        "eps*|A|^2|B|",
    );

    // ω_b = #{(a,a') ∈ Ω : a·b, a'·b ∈ C}; pairs in Ω share at most `cut` columns.
    let idx: Vec<usize> = (0..na).collect();
    let omega_b = par::sum_counts(nb, &idx, |&i, acc| {
        for j in omega[i].iter() {
            for col in rows[i].intersection(&rows[j as usize]).iter() {
                acc[col as usize] += 1;
            }
        }
    });
    let mut size_b = vec![0u64; nb];
    for r in &rows {
        for col in r.iter() {
            size_b[col as usize] += 1;
        }
    }
    // Maximize |A_b|² − ω_b/ε, scaled by the numerator of ε.
    let (p, q) = (eps.numer().clone(), eps.denom().clone());
    let score = |j: usize| &p * num_bigint::BigInt::from(size_b[j] * size_b[j]) - &q * num_bigint::BigInt::from(omega_b[j]);
    let best = (0..nb)
        .map(|j| (score(j), j))
        .fold(None::<(num_bigint::BigInt, usize)>, |acc, (s, j)| match acc {
            Some((bs, bj)) if bs >= s => Some((bs, bj)),
            _ => Some((s, j)),
        })
        .expect("B is nonempty")
        .1;
    let chosen_b = bb[best];
    let ap_idx: Vec<usize> = (0..na).filter(|&i| rows[i].contains(best as u32)).collect();
    let a_prime = MSet::new(g, ap_idx.iter().map(|&i| aa[i])).map_err(|_| Error::EmptyStage("A'".into()))?;
    let np = a_prime.len();
    let integrand = int(size_b[best] * size_b[best]) - int(omega_b[best]) / eps;
    l.hard(
        "|A|^2 <= 2K^2 (|A'|^2 - |Omega cap A'^2|/eps)",
        int(na * na),
        int(2) * &k2 * integrand,
        "2K^2*integrand(b)",
    );

    let omega_in_a_prime: u64 = ap_idx
        .iter()
        .map(|&i| ap_idx.iter().filter(|&&j| omega[i].contains(j as u32)).count() as u64)
        .sum();
    l.hard(
        "|(A'xA') cap Omega| <= eps|A'|^2",
        int(omega_in_a_prime),
        eps * int(np * np),
        "eps*|A'|^2",
    );

    let d_bits = par::union_over(g.order(), &ap_idx, |&i, acc| {
        for &j in &ap_idx {
            if !omega[i].contains(j as u32) {
                acc.insert(g.mul(aa[i], g.inv(aa[j])));
            }
        }
    });
    let d = MSet::from_bitset(g, d_bits).map_err(|_| Error::EmptyStage("D".into()))?;
    let nd = d.len();
    let pairs_in_d: u64 = par::map(&ap_idx, |&i| {
        ap_idx.iter().filter(|&&j| d.contains(g.mul(aa[i], g.inv(aa[j])))).count() as u64
    })
    .into_iter()
    .sum();

    l.hard("|A|^2 <= 2K^2|A'|^2", int(na * na), int(2) * &k2 * int(np * np), "2K^2*|A'|^2");
    l.hard(
        "eps|B||D| <= 2K^2|C|^2",
        eps * int(nb * nd),
        int(2) * &k2 * int(nc * nc),
        "2K^2*|C|^2",
    );
    l.hard(
        "eps|D| <= 2(KK')^2|A|",
        eps * int(nd),
        int(2) * &k2 * k_prime_sq * int(na),
        "2(KK')^2*|A|",
    );
    l.hard(
        "(1-eps)|A'|^2 <= #{(a,a') in A'xA' : a a'^-1 in D}",
        (Rational::one() - eps) * int(np * np),
        int(pairs_in_d),
        "#pairs in D",
    );
    Ok(WeakBsgResult {
        a_prime,
        d,
        b: chosen_b,
        omega_in_a_prime,
        omega_total,
        omega_threshold: threshold,
        pairs_in_d,
        k: k.clone(),
        k_prime_sq: k_prime_sq.clone(),
        eps: eps.clone(),
        ledger: l,
    })
}

#[derive(Clone, Debug)]
pub struct BsgExtract {
    /// Popular products `{x : 4K²·conv(x)² > |A||B|}`.
    pub c: MSet,
    pub a1: MSet,
    pub a2: MSet,
    pub a3: MSet,
    pub b3: MSet,
    /// `L = |A|/|A'|`.
    pub l: Rational,
    pub d: MSet,
    pub weak: WeakBsgResult,
    /// `|A‴·B‴|`.
    pub product_len: usize,
    pub energy: u128,
    pub k: Rational,
    pub ledger: ConstantLedger,
}

impl BsgExtract {
    /// Stage cardinalities in pipeline order.
    pub fn stages(&self) -> Vec<(&'static str, usize)> {
        vec![
            ("C", self.c.len()),
            ("A'", self.a1.len()),
            ("A''", self.a2.len()),
            ("D", self.d.len()),
            ("A'''", self.a3.len()),
            ("B'''", self.b3.len()),
            ("A'''B'''", self.product_len),
        ]
    }
}

fn prefixed(prefix: &str, ledger: &ConstantLedger) -> ConstantLedger {
    let mut out = ledger.clone();
    for r in &mut out.rows {
        r.inequality = format!("{prefix}{}", r.inequality);
    }
    out
}

/// Runs the full extraction under `E(A,B) ≥ (|A||B|)^{3/2}/K`.
pub fn bsg_extract(a: &MSet, b: &MSet, k: &Rational) -> Result<BsgExtract> {
    same_group(a, b)?;
    if *k < Rational::one() {
        return Err(Error::InvalidParameter(format!("K must be at least 1, got {}", display(k))));
    }
    let g = a.group();
    let (na, nb) = (a.len(), b.len());
    let nab = (na * nb) as u128;
    let conv = convolution(a, b)?;
    let e = conv.sum_of_squares();
    let k2 = pow(k, 2);
    let nab3 = int(nab) * int(nab) * int(nab);
    if nab3 > &k2 * int(e) * int(e) {
        return Err(Error::hypothesis(
            "(|A||B|)^3 <= K^2 E(A,B)^2",
            display(&nab3),
            format!("{}*{}^2", display(&k2), e),
        ));
    }
    let mut l = ConstantLedger::new();
    l.hard("(|A||B|)^3 <= K^2 E(A,B)^2", nab3.clone(), &k2 * int(e) * int(e), "K^2*E^2");

    let four_k2 = int(4) * &k2;
    let c_ids: Vec<Elem> = conv
        .sparse()
        .into_iter()
        .filter(|&(_, n)| &four_k2 * int((n as u128) * (n as u128)) > int(nab))
        .map(|(x, _)| x)
        .collect();
    let c = MSet::new(g, c_ids).map_err(|_| Error::EmptyStage("C".into()))?;
    let nc = c.len();
    let on_c: u128 = c.iter().map(|x| conv.get(x) as u128).sum();
    let sq_on_c: u128 = c.iter().map(|x| (conv.get(x) as u128).pow(2)).sum();
    l.hard(
        "(|A||B|)^3 <= 4K^2 (sum_C conv^2)^2",
        nab3,
        &four_k2 * int(sq_on_c) * int(sq_on_c),
        "4K^2*(sum_C conv^2)^2",
    );
    l.hard("|C|^2 <= 4K^2|A||B|", int(nc * nc), &four_k2 * int(nab), "4K^2*|A||B|");
    l.hard("|A||B| <= 2K sum_C conv", int(nab), int(2) * k * int(on_c), "2K*sum_C conv");

    let (aa, bb) = (a.ids(), b.ids());
    let rows = incidence(&aa, &bb, &c);
    let four_k = int(4) * k;
    let a1_idx: Vec<usize> = (0..na).filter(|&i| &four_k * int(rows[i].count()) > int(nb)).collect();
    let a1 = MSet::new(g, a1_idx.iter().map(|&i| aa[i])).map_err(|_| Error::EmptyStage("A'".into()))?;
    let n1 = a1.len();
    let on_a1: usize = a1_idx.iter().map(|&i| rows[i].count()).sum();
    l.hard(
        "|A||B| <= 4K sum_{A'} #{b : ab in C}",
        int(nab),
        &four_k * int(on_a1),
        "4K*sum_{A'}",
    );
    l.hard("|A| <= 4K|A'|", int(na), &four_k * int(n1), "4K*|A'|");
    let big_l = Rational::new(na.into(), n1.into());
    l.hard("L <= 4K", big_l.clone(), four_k.clone(), "4K");

    let kw = &four_k / &big_l;
    let kp2 = &four_k2 * &big_l;
    let eps = Rational::one() / (int(32) * k);
    let weak = weak_bsg_squared(&a1, b, &c, &kw, &kp2, &eps)?;
    l.extend(prefixed("weak: ", &weak.ledger));
    let a2 = weak.a_prime.clone();
    let d = weak.d.clone();
    let (n2, nd) = (a2.len(), d.len());
    l.hard("|A|^2 <= 32K^2|A''|^2", int(na * na), int(32) * &k2 * int(n2 * n2), "32K^2*|A''|^2");
    l.hard(
        "L|D| <= 2^12 K^5 |A'|",
        &big_l * int(nd),
        int(4096) * pow(k, 5) * int(n1),
        "2^12*K^5*|A'|",
    );
    l.soft(
        "L|D| <= 2^12 K^4 |A'|",
        &big_l * int(nd),
        int(4096) * pow(k, 4) * int(n1),
        "2^12*K^4*|A'|",
    );

    // Markov step: bad(a) = #{a' ∈ A'' : a·a'⁻¹ ∉ D}.
    let a2_ids = a2.ids();
    let bad: Vec<usize> = par::map(&a2_ids, |&x| a2_ids.iter().filter(|&&y| !d.contains(g.mul(x, g.inv(y)))).count());
    let bad_total: usize = bad.iter().sum();
    l.hard(
        "32K sum_{A''} bad(a) <= |A''|^2",
        int(32) * k * int(bad_total),
        int(n2 * n2),
        "|A''|^2",
    );
    let sixteen_k = int(16) * k;
    let a3 = MSet::new(
        g,
        a2_ids
            .iter()
            .zip(&bad)
            .filter(|(_, &n)| &sixteen_k * int(n) <= int(n2))
            .map(|(&x, _)| x),
    )
    .map_err(|_| Error::EmptyStage("A'''".into()))?;
    let n3 = a3.len();
    l.hard("|A''| <= 2|A'''|", int(n2), int(2 * n3), "2*|A'''|");
    l.hard(
        "|A|^2 <= 128K^2|A'''|^2",
        int(na * na),
        int(128) * &k2 * int(n3 * n3),
        "128K^2*|A'''|^2",
    );

    let col: Vec<usize> = par::map(&bb, |&y| a2_ids.iter().filter(|&&x| c.contains(g.mul(x, y))).count());
    let col_total: usize = col.iter().sum();
    l.hard(
        "|A''||B| <= 4K sum_B #{a in A'' : ab in C}",
        int(n2 * nb),
        &four_k * int(col_total),
        "4K*sum_B",
    );
    let eight_k = int(8) * k;
    let b3 = MSet::new(
        g,
        bb.iter().zip(&col).filter(|(_, &n)| &eight_k * int(n) > int(n2)).map(|(&y, _)| y),
    )
    .map_err(|_| Error::EmptyStage("B'''".into()))?;
    let nb3 = b3.len();
    l.hard("|B| <= 8K|B'''|", int(nb), &eight_k * int(nb3), "8K*|B'''|");

    let prod = product_set(&a3, &b3)?;
    let np = prod.len();
    let c_ids = c.ids();
    let min_witness = par::map(&prod.ids(), |&z| c_ids.iter().filter(|&&x| d.contains(g.mul(z, g.inv(x)))).count())
        .into_iter()
        .min()
        .expect("nonempty product");
    l.hard(
        "|A''| <= 16K min_c #{x in C : c x^-1 in D}",
        int(n2),
        &sixteen_k * int(min_witness),
        "16K*min_c",
    );
    l.hard(
        "|A'''B'''||A''| <= 16K|C||D|",
        int(np * n2),
        &sixteen_k * int(nc * nd),
        "16K*|C||D|",
    );
    let np2 = int(np * np);
    let c0sq = int(BigUint::one() << BSG_C0_SQUARED_LOG2);
    l.hard(
        "|A'''B'''|^2 L^4 <= 2^39 K^16 |A||B|",
        &np2 * pow(&big_l, 4),
        &c0sq * pow(k, BSG_AUDITED_EXPONENT) * int(nab),
        "2^39*K^16*|A||B|",
    );
    l.hard(
        "|A'''B'''|^2 <= 2^39 K^14 |A||B|",
        np2.clone(),
        &c0sq * pow(k, BSG_DISPLAYED_EXPONENT) * int(nab),
        "2^39*K^14*|A||B|",
    );
    l.soft("measured |A'''B'''|^2 / |A||B|", np2, int(nab), "|A||B|");

    if !(a3.is_subset(&a2) && a2.is_subset(&a1) && a1.is_subset(a) && b3.is_subset(b)) {
        return Err(Error::InvalidWitness("stage sets are not nested".into()));
    }
    Ok(BsgExtract {
        c,
        a1,
        a2,
        a3,
        b3,
        l: big_l,
        d,
        weak,
        product_len: np,
        energy: e,
        k: k.clone(),
        ledger: l,
    })
}

/// Smallest `K ≥ 1` (denominator at most `|G|³`) with `(|A||B|)³ ≤ K²E(A,B)²`.
pub fn infer_bsg_k(a: &MSet, b: &MSet) -> Result<Rational> {
    let e = energy(a, b)?.value();
    let nab = BigUint::from(a.len() * b.len());
    let n = BigUint::from(a.group().order());
    Ok(infer_k(&(&nab * &nab * &nab), &(BigUint::from(e) * e), &(&n * &n * &n)))
}

/// The four clauses, each with explicit constants in terms of `K`:
///
/// * (i) `(|A||B|)³ ≤ K²E(A,B)²`;
/// * (ii) `E ⊆ A×B`, `|A||B| ≤ K|E|`, `|A·_E B|² ≤ K²|A||B|`;
/// * (iii) `A' ⊆ A`, `B' ⊆ B`, `|A| ≤ K|A'|`, `|B| ≤ K|B'|`, `|A'·B'|² ≤ K²|A||B|`;
/// * (iv) `H` a `K`-approximate group with `|H|² ≤ K²|A||B| ≤ K⁴|H|²`,
///   `|A| ≤ K|A ∩ x·H|` and `|B| ≤ K|B ∩ H·y|`.
#[derive(Clone, Debug)]
pub enum EnergyClause {
    Energy,
    PartialProduct(Vec<(Elem, Elem)>),
    Subsets { a: MSet, b: MSet },
    ApproxGroup { h: MSet, cover: Vec<Elem>, x: Elem, y: Elem },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClauseKind {
    Energy,
    PartialProduct,
    Subsets,
    ApproxGroup,
}

impl ClauseKind {
    pub fn label(self) -> &'static str {
        match self {
            ClauseKind::Energy => "i",
            ClauseKind::PartialProduct => "ii",
            ClauseKind::Subsets => "iii",
            ClauseKind::ApproxGroup => "iv",
        }
    }

    /// The next clause along (i) → (iii) → (iv) → (ii) → (i).
    pub fn next(self) -> ClauseKind {
        match self {
            ClauseKind::Energy => ClauseKind::Subsets,
            ClauseKind::Subsets => ClauseKind::ApproxGroup,
            ClauseKind::ApproxGroup => ClauseKind::PartialProduct,
            ClauseKind::PartialProduct => ClauseKind::Energy,
        }
    }
}

impl EnergyClause {
    pub fn kind(&self) -> ClauseKind {
        match self {
            EnergyClause::Energy => ClauseKind::Energy,
            EnergyClause::PartialProduct(_) => ClauseKind::PartialProduct,
            EnergyClause::Subsets { .. } => ClauseKind::Subsets,
            EnergyClause::ApproxGroup { .. } => ClauseKind::ApproxGroup,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EnergyEquivalenceWitness {
    pub input: ClauseKind,
    pub energy: u128,
    pub pairs: Vec<(Elem, Elem)>,
    pub a_sub: MSet,
    pub b_sub: MSet,
    pub h: ApproxGroupWitness,
    pub x: Elem,
    pub y: Elem,
    /// The constant at which each clause holds, indexed by [`ClauseKind`] order.
    pub ks: [Rational; 4],
    pub ledger: ConstantLedger,
}

fn max_den(g: &crate::group::FiniteGroup) -> BigUint {
    let n = BigUint::from(g.order());
    &n * &n * &n
}

fn sqrt_k(num: u128, den: u128, g: &crate::group::FiniteGroup) -> Rational {
    infer_k(&BigUint::from(num), &BigUint::from(den), &max_den(g))
}

fn max_of(ks: impl IntoIterator<Item = Rational>) -> Rational {
    ks.into_iter().fold(Rational::one(), |m, k| if k > m { k } else { m })
}

fn invalid(msg: String) -> Error {
    Error::InvalidWitness(msg)
}

struct ApproxState {
    h: ApproxGroupWitness,
    x: Elem,
    y: Elem,
}

fn approx_k(a: &MSet, b: &MSet, st: &ApproxState) -> Result<Rational> {
    let g = a.group();
    let h = &st.h.h;
    let ax = a.intersection_len(&h.left_translate(st.x));
    let by = b.intersection_len(&h.right_translate(st.y));
    if ax == 0 || by == 0 {
        return Err(invalid("A ∩ xH or B ∩ Hy is empty".into()));
    }
    let nab = (a.len() * b.len()) as u128;
    let nh2 = (h.len() * h.len()) as u128;
    Ok(max_of([
        int(st.h.x.len()),
        Rational::new(a.len().into(), ax.into()),
        Rational::new(b.len().into(), by.into()),
        sqrt_k(nh2, nab, g),
        sqrt_k(nab, nh2, g),
    ]))
}

fn subsets_k(a: &MSet, b: &MSet, a1: &MSet, b1: &MSet) -> Result<Rational> {
    let p = product_set(a1, b1)?.len() as u128;
    Ok(max_of([
        Rational::new(a.len().into(), a1.len().into()),
        Rational::new(b.len().into(), b1.len().into()),
        sqrt_k(p * p, (a.len() * b.len()) as u128, a.group()),
    ]))
}

fn partial_k(a: &MSet, b: &MSet, e: &[(Elem, Elem)]) -> Result<Rational> {
    let c = partial_product(a, b, e)?.len() as u128;
    let nab = (a.len() * b.len()) as u128;
    Ok(max_of([Rational::new(nab.into(), e.len().into()), sqrt_k(c * c, nab, a.group())]))
}

/// Validates the input clause at `K`, then walks the cycle
/// (i) → (iii) → (iv) → (ii) → (i) back to it, producing a witness for every
/// clause and the constant at which it holds.
pub fn energy_equivalences(a: &MSet, b: &MSet, input: &EnergyClause, k: &Rational) -> Result<EnergyEquivalenceWitness> {
    same_group(a, b)?;
    if *k < Rational::one() {
        return Err(Error::InvalidParameter(format!("K must be at least 1, got {}", display(k))));
    }
    let g = a.group();
    let nab = (a.len() * b.len()) as u128;
    let mut l = ConstantLedger::new();

    let mut energy_val: Option<u128> = None;
    let mut pairs: Option<Vec<(Elem, Elem)>> = None;
    let mut subsets: Option<(MSet, MSet)> = None;
    let mut approx: Option<ApproxState> = None;
    let mut ks: [Option<Rational>; 4] = [None, None, None, None];
    let slot = |c: ClauseKind| c as usize;

    // Validate the input witness.
    match input {
        EnergyClause::Energy => {
            let e = energy(a, b)?.value();
            let need = sqrt_k(nab * nab * nab, e * e, g);
            if need > *k {
                return Err(invalid(format!("(|A||B|)^3 <= K^2 E^2 needs K >= {}", display(&need))));
            }
            energy_val = Some(e);
        }
        EnergyClause::PartialProduct(e) => {
            let need = partial_k(a, b, e)?;
            if need > *k {
                return Err(invalid(format!("clause (ii) needs K >= {}", display(&need))));
            }
            pairs = Some(e.clone());
        }
        EnergyClause::Subsets { a: a1, b: b1 } => {
            if !a1.is_subset(a) || !b1.is_subset(b) {
                return Err(invalid("A' or B' is not a subset".into()));
            }
            let need = subsets_k(a, b, a1, b1)?;
            if need > *k {
                return Err(invalid(format!("clause (iii) needs K >= {}", display(&need))));
            }
            subsets = Some((a1.clone(), b1.clone()));
        }
        EnergyClause::ApproxGroup { h, cover, x, y } => {
            g.check_id(*x)?;
            g.check_id(*y)?;
            let w = verify_approx_group(h, cover, k).map_err(|v| invalid(format!("H is not a K-approximate group: {v:?}")))?;
            let st = ApproxState { h: w, x: *x, y: *y };
            let need = approx_k(a, b, &st)?;
            if need > *k {
                return Err(invalid(format!("clause (iv) needs K >= {}", display(&need))));
            }
            approx = Some(st);
        }
    }
    let start = input.kind();
    ks[slot(start)] = Some(k.clone());

    let mut cur = start;
    for _ in 0..4 {
        let kc = ks[slot(cur)].clone().expect("current clause has a constant");
        let next = cur.next();
        let k_next = match cur {
            ClauseKind::Energy => {
                let ext = bsg_extract(a, b, &kc)?;
                l.extend(prefixed("(i)->(iii) ", &ext.ledger));
                let (a1, b1) = (ext.a3, ext.b3);
                let p = ext.product_len;
                l.hard("(i)->(iii) |A'||B'| <= |A'B'|^2", int(a1.len() * b1.len()), int(p * p), "|A'B'|^2");
                let kn = subsets_k(a, b, &a1, &b1)?;
                subsets = Some((a1, b1));
                kn
            }
            ClauseKind::Subsets => {
                let (a1, b1) = subsets.clone().expect("set by previous step");
                let p = product_set(&a1, &b1)?.len() as u128;
                let kd = sqrt_k(p * p, (a1.len() * b1.len()) as u128, g);
                let cls = classify_small_doubling(&a1, &b1, &kd)?;
                l.extend(prefixed("(iii)->(iv) ", &cls.ledger));
                let h = cls.h.h.clone();
                let pick = |f: &dyn Fn(Elem) -> usize| {
                    cls.x.iter().map(|&x| (f(x), x)).fold((0usize, Elem::MAX), |(bn, bx), (n, x)| {
                        if n > bn || (n == bn && x < bx) {
                            (n, x)
                        } else {
                            (bn, bx)
                        }
                    })
                };
                let (ax, x) = pick(&|x| a1.intersection_len(&h.left_translate(x)));
                let (by, y) = pick(&|y| b1.intersection_len(&h.right_translate(y)));
                let nx = cls.x.len();
                l.hard("(iii)->(iv) |A'| <= |X||A' cap xH|", int(a1.len()), int(nx * ax), "|X|*|A' cap xH|");
                l.hard("(iii)->(iv) |B'| <= |X||B' cap Hy|", int(b1.len()), int(nx * by), "|X|*|B' cap Hy|");
                let st = ApproxState { h: cls.h, x, y };
                let kn = approx_k(a, b, &st)?;
                approx = Some(st);
                kn
            }
            ClauseKind::ApproxGroup => {
                let st = approx.as_ref().expect("set by previous step");
                let h = &st.h.h;
                let ax = a.intersection(&h.left_translate(st.x)).expect("checked nonempty");
                let by = b.intersection(&h.right_translate(st.y)).expect("checked nonempty");
                let e: Vec<(Elem, Elem)> = ax.iter().flat_map(|u| by.iter().map(move |v| (u, v))).collect();
                let c = partial_product(a, b, &e)?.len();
                let h2 = product_set(h, h)?.len();
                l.hard("(iv)->(ii) |A cdot_E B| <= |H^2|", int(c), int(h2), "|H^2|");
                let kn = partial_k(a, b, &e)?;
                pairs = Some(e);
                kn
            }
            ClauseKind::PartialProduct => {
                let e = pairs.as_ref().expect("set by previous step");
                let cset = partial_product(a, b, e)?;
                let conv = convolution(a, b)?;
                let on_c: u128 = cset.iter().map(|x| conv.get(x) as u128).sum();
                let en = conv.sum_of_squares();
                let ne = e.len() as u128;
                l.hard("(ii)->(i) |E| <= sum_C conv", int(ne), int(on_c), "sum_C conv");
                l.hard(
                    "(ii)->(i) |E|^2 <= E(A,B)|C|",
                    int(ne * ne),
                    int(en) * int(cset.len()),
                    "E(A,B)*|C|",
                );
                energy_val = Some(en);
                sqrt_k(nab * nab * nab, en * en, g)
            }
        };
        if next == start {
            l.soft(
                &format!("closing K for ({}) vs input K", start.label()),
                k_next,
                k.clone(),
                "input K",
            );
            break;
        }
        ks[slot(next)] = Some(k_next);
        cur = next;
    }

    let (a_sub, b_sub) = subsets.expect("cycle visits (iii)");
    let st = approx.expect("cycle visits (iv)");
    let ks = ks.map(|k| k.expect("cycle visits every clause"));
    Ok(EnergyEquivalenceWitness {
        input: start,
        energy: energy_val.expect("cycle visits (i)"),
        pairs: pairs.expect("cycle visits (ii)"),
        a_sub,
        b_sub,
        h: st.h,
        x: st.x,
        y: st.y,
        ks,
        ledger: l,
    })
}
