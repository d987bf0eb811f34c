//! Relations on circles by intersection size, exhaustive association-scheme
//! verification, exact eigenvalue matrices and the derived bounds.
//!
//! Relation order is fixed: identity, meet in one point, meet in two points,
//! disjoint. Relations that never occur are dropped, so the extended
//! even-order Laguerre plane gets `[identity, meet2, disjoint]`.
//!
//! Eigenspaces are ordered with the all-ones space first, then by descending
//! multiplicity, then by descending eigenvalue of the first nontrivial relation.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::exact::{self, fmt_rat, rat, Rat};
use crate::geometry::{CircleGeometry, GeometryKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Identity,
    Meet1,
    Meet2,
    Disjoint,
}

impl Relation {
    pub fn name(self) -> &'static str {
        match self {
            Relation::Identity => "identity",
            Relation::Meet1 => "meet1",
            Relation::Meet2 => "meet2",
            Relation::Disjoint => "disjoint",
        }
    }

    /// Number of common points of two circles in this relation, given the circle size.
    pub fn meet_size(self, circle_size: usize) -> usize {
        match self {
            Relation::Identity => circle_size,
            Relation::Meet1 => 1,
            Relation::Meet2 => 2,
            Relation::Disjoint => 0,
        }
    }
}

/// The relations R_0..R_d as a dense label matrix plus bit rows.
#[derive(Clone, Debug)]
pub struct RelationSet {
    n: usize,
    circle_size: usize,
    labels: Vec<Relation>,
    rel: Vec<u8>,
    rows: Vec<Vec<BitSet>>,
}

impl RelationSet {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of non-identity relations.
    pub fn d(&self) -> usize {
        self.labels.len() - 1
    }

    pub fn labels(&self) -> &[Relation] {
        &self.labels
    }

    pub fn index_of(&self, r: Relation) -> Option<usize> {
        self.labels.iter().position(|&x| x == r)
    }

    #[inline]
    pub fn relation(&self, x: usize, y: usize) -> usize {
        self.rel[x * self.n + y] as usize
    }

    /// Row `x` of the adjacency matrix `A_i`.
    #[inline]
    pub fn row(&self, i: usize, x: usize) -> &BitSet {
        &self.rows[i][x]
    }

    pub fn circle_size(&self) -> usize {
        self.circle_size
    }
}

/// Classifies every pair of circles by intersection size.
pub fn relations(g: &CircleGeometry) -> Result<RelationSet> {
    let n = g.num_circles();
    let size = g.circle(0).len();
    let plus = g.kind() == GeometryKind::LaguerrePlus;
    let raw: Vec<Vec<Relation>> = (0..n)
        .into_par_iter()
        .map(|x| {
            (0..n)
                .map(|y| {
                    if x == y {
                        return Ok(Relation::Identity);
                    }
                    match g.meet(x, y) {
                        0 => Ok(Relation::Disjoint),
                        1 if !plus => Ok(Relation::Meet1),
                        2 => Ok(Relation::Meet2),
                        s => Err(Error::UnexpectedIntersectionSize { a: x, b: y, size: s }),
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut present = [false; 4];
    for row in &raw {
        for &r in row {
            present[r as usize] = true;
        }
    }
    let all = [Relation::Identity, Relation::Meet1, Relation::Meet2, Relation::Disjoint];
    let labels: Vec<Relation> = all.iter().copied().filter(|&r| present[r as usize]).collect();
    let pos: Vec<u8> = all
        .iter()
        .map(|r| labels.iter().position(|x| x == r).unwrap_or(0) as u8)
        .collect();
    let mut rel = vec![0u8; n * n];
    let mut rows = vec![vec![BitSet::new(n); n]; labels.len()];
    for (x, row) in raw.iter().enumerate() {
        for (y, &r) in row.iter().enumerate() {
            let i = pos[r as usize];
            rel[x * n + y] = i;
            rows[i as usize][x].insert(y);
        }
    }
    Ok(RelationSet {
        n,
        circle_size: size,
        labels,
        rel,
        rows,
    })
}

/// Two pairs in the same relation with different counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SchemeWitness {
    pub k: usize,
    pub i: usize,
    pub j: usize,
    pub pair_a: (usize, usize),
    pub count_a: u64,
    pub pair_b: (usize, usize),
    pub count_b: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SchemeReport {
    pub n: usize,
    pub is_scheme: bool,
    pub relations: Vec<Relation>,
    pub valencies: Vec<u64>,
    /// `p[k][i][j]`, present when the relations form a scheme.
    pub p: Option<Vec<Vec<Vec<u64>>>>,
    pub witness: Option<SchemeWitness>,
}

impl SchemeReport {
    pub fn p(&self, k: usize, i: usize, j: usize) -> Option<u64> {
        self.p.as_ref().map(|p| p[k][i][j])
    }
}

fn counts_for(r: &RelationSet, x: usize, y: usize) -> Vec<Vec<u64>> {
    let d1 = r.labels.len();
    (0..d1)
        .map(|i| (0..d1).map(|j| r.row(i, x).and_count(r.row(j, y)) as u64).collect())
        .collect()
}

/// Checks every pair of circles: `|R_i(x) ∩ R_j(y)|` must depend only on the
/// relation of `(x, y)`.
pub fn check_scheme(r: &RelationSet) -> SchemeReport {
    let n = r.n;
    let d1 = r.labels.len();
    // reference pair for each relation: the first in row-major order
    let mut reference: Vec<Option<(usize, usize)>> = vec![None; d1];
    for x in 0..n {
        for y in 0..n {
            let k = r.relation(x, y);
            if reference[k].is_none() {
                reference[k] = Some((x, y));
            }
        }
        if reference.iter().all(Option::is_some) {
            break;
        }
    }
    let tables: Vec<Vec<Vec<u64>>> = reference
        .iter()
        .map(|p| {
            let (x, y) = p.expect("every relation occurs");
            counts_for(r, x, y)
        })
        .collect();
    let witness = (0..n).into_par_iter().find_map_first(|x| {
        for y in 0..n {
            let k = r.relation(x, y);
            for i in 0..d1 {
                for j in 0..d1 {
                    let c = r.row(i, x).and_count(r.row(j, y)) as u64;
                    if c != tables[k][i][j] {
                        return Some(SchemeWitness {
                            k,
                            i,
                            j,
                            pair_a: reference[k].unwrap(),
                            count_a: tables[k][i][j],
                            pair_b: (x, y),
                            count_b: c,
                        });
                    }
                }
            }
        }
        None
    });
    let valencies = (0..d1).map(|i| r.row(i, 0).count() as u64).collect();
    let is_scheme = witness.is_none();
    SchemeReport {
        n,
        is_scheme,
        relations: r.labels.clone(),
        valencies,
        p: is_scheme.then_some(tables),
        witness,
    }
}

/// `B_i[k][j] = p^k_{ij}`.
pub fn intersection_matrices(report: &SchemeReport) -> Result<Vec<Vec<Vec<i128>>>> {
    let p = report.p.as_ref().ok_or(Error::NotAScheme)?;
    let d1 = report.relations.len();
    Ok((0..d1)
        .map(|i| (0..d1).map(|k| (0..d1).map(|j| p[k][i][j] as i128).collect()).collect())
        .collect())
}

/// Eigenvalue matrix, dual matrix and multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenData {
    pub n: usize,
    pub relations: Vec<Relation>,
    pub valencies: Vec<i128>,
    /// `p[l][i]`: eigenvalue of `A_i` on eigenspace `V_l`.
    pub p: Vec<Vec<i128>>,
    /// `q = n·p⁻¹`; row 0 holds the multiplicities.
    pub q: Vec<Vec<Rat>>,
    pub multiplicities: Vec<i128>,
}

impl EigenData {
    pub fn d(&self) -> usize {
        self.relations.len() - 1
    }

    pub fn index_of(&self, r: Relation) -> Option<usize> {
        self.relations.iter().position(|&x| x == r)
    }

    /// Eigenvalues of `A_j`, one per eigenspace.
    pub fn column(&self, j: usize) -> Vec<i128> {
        self.p.iter().map(|row| row[j]).collect()
    }

    /// `P·Q = n·I`.
    pub fn pq_is_scaled_identity(&self) -> bool {
        let d1 = self.p.len();
        (0..d1).all(|a| {
            (0..d1).all(|b| {
                let s: Rat = (0..d1).map(|c| rat(self.p[a][c]) * self.q[c][b]).sum();
                s == if a == b { rat(self.n as i128) } else { Rat::zero() }
            })
        })
    }
}

/// Computes P from the intersection matrices. Rows of P are the common left
/// eigenvectors of the `B_i`, normalized to a leading one; they are separated
/// with a generic combination `Σ t^(i-1) B_i` whose eigenvalues are distinct.
pub fn eigendata(report: &SchemeReport) -> Result<EigenData> {
    let b = intersection_matrices(report)?;
    let d1 = b.len();
    let n = report.n as i128;
    let mut found = None;
    for t in 1..64i128 {
        let mut m = vec![vec![0i128; d1]; d1];
        let mut w = 1i128;
        for bi in b.iter().skip(1) {
            for k in 0..d1 {
                for j in 0..d1 {
                    m[k][j] += w * bi[k][j];
                }
            }
            w *= t;
        }
        let bound = m
            .iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<i128>())
            .max()
            .unwrap_or(0);
        let roots = exact::integer_roots(&exact::char_poly(&m), bound.max(1)).ok_or(Error::NonIntegerEigenvalue)?;
        let mut distinct = roots.clone();
        distinct.dedup();
        if distinct.len() == d1 {
            found = Some((m, distinct));
            break;
        }
    }
    let (m, roots) = found.ok_or(Error::NonIntegerEigenvalue)?;

    let mut p_rows: Vec<Vec<i128>> = Vec::with_capacity(d1);
    for &lambda in &roots {
        // left null vector of M − λI
        let shifted_t: Vec<Vec<Rat>> = (0..d1)
            .map(|j| {
                (0..d1)
                    .map(|k| rat(m[k][j] - if k == j { lambda } else { 0 }))
                    .collect()
            })
            .collect();
        let ns = exact::null_space(&shifted_t);
        if ns.len() != 1 || ns[0][0].is_zero() {
            return Err(Error::NotAScheme);
        }
        let lead = ns[0][0];
        let row: Vec<Rat> = ns[0].iter().map(|x| x / lead).collect();
        if row.iter().any(|x| !x.is_integer()) {
            return Err(Error::NonIntegerEigenvalue);
        }
        let row: Vec<i128> = row.iter().map(|x| x.to_integer()).collect();
        // row · B_i = row_i · row
        for (i, bi) in b.iter().enumerate() {
            for j in 0..d1 {
                let lhs: i128 = (0..d1).map(|k| row[k] * bi[k][j]).sum();
                if lhs != row[i] * row[j] {
                    return Err(Error::NotAScheme);
                }
            }
        }
        p_rows.push(row);
    }

    // multiplicities from Σ_l m_l P(l,j) = n·δ_{j0}
    let pt: Vec<Vec<Rat>> = (0..d1).map(|j| (0..d1).map(|l| rat(p_rows[l][j])).collect()).collect();
    let rhs: Vec<Rat> = (0..d1).map(|j| if j == 0 { rat(n) } else { Rat::zero() }).collect();
    let mult = exact::solve(&pt, &rhs).ok_or(Error::NotAScheme)?;
    if mult.iter().any(|m| !m.is_integer() || *m <= Rat::zero()) {
        return Err(Error::NotAScheme);
    }
    let mult: Vec<i128> = mult.iter().map(|m| m.to_integer()).collect();

    let valencies: Vec<i128> = report.valencies.iter().map(|&v| v as i128).collect();
    let mut order: Vec<usize> = (0..d1).collect();
    let key1 = if d1 > 1 { 1 } else { 0 };
    order.sort_by(|&a, &c| {
        let triv = |l: usize| p_rows[l] == valencies;
        triv(c)
            .cmp(&triv(a))
            .then(mult[c].cmp(&mult[a]))
            .then(p_rows[c][key1].cmp(&p_rows[a][key1]))
    });
    let p: Vec<Vec<i128>> = order.iter().map(|&l| p_rows[l].clone()).collect();
    let multiplicities: Vec<i128> = order.iter().map(|&l| mult[l]).collect();
    let prat: Vec<Vec<Rat>> = p.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect();
    let inv = exact::inverse(&prat).ok_or(Error::NotAScheme)?;
    let q: Vec<Vec<Rat>> = inv.iter().map(|r| r.iter().map(|x| x * rat(n)).collect()).collect();
    let e = EigenData {
        n: report.n,
        relations: report.relations.clone(),
        valencies,
        p,
        q,
        multiplicities,
    };
    debug_assert!(e.pq_is_scaled_identity());
    Ok(e)
}

/// Families with closed-form eigenvalue matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KnownFamily {
    MobiusEven,
    LaguerreOdd,
    LaguerrePlusEven,
    MinkowskiEven,
}

impl KnownFamily {
    pub fn name(self) -> &'static str {
        match self {
            KnownFamily::MobiusEven => "mobius_even",
            KnownFamily::LaguerreOdd => "laguerre_odd",
            KnownFamily::LaguerrePlusEven => "laguerre_plus_even",
            KnownFamily::MinkowskiEven => "minkowski_even",
        }
    }

    /// The family a geometry falls into, if it has one.
    pub fn of(g: &CircleGeometry) -> Option<KnownFamily> {
        let even = g.order().is_multiple_of(2);
        match (g.kind(), even) {
            (GeometryKind::Mobius, true) => Some(KnownFamily::MobiusEven),
            (GeometryKind::Laguerre, false) => Some(KnownFamily::LaguerreOdd),
            (GeometryKind::LaguerrePlus, true) => Some(KnownFamily::LaguerrePlusEven),
            (GeometryKind::Minkowski, true) => Some(KnownFamily::MinkowskiEven),
            _ => None,
        }
    }

    pub fn relations(self) -> Vec<Relation> {
        match self {
            KnownFamily::LaguerrePlusEven => vec![Relation::Identity, Relation::Meet2, Relation::Disjoint],
            _ => vec![Relation::Identity, Relation::Meet1, Relation::Meet2, Relation::Disjoint],
        }
    }
}

/// Closed-form P and Q for a family at order q.
pub fn closed_form(family: KnownFamily, q: usize) -> (Vec<Vec<Rat>>, Vec<Vec<Rat>>) {
    let q = rat(q as i128);
    let one = rat(1);
    let two = rat(2);
    let zero = Rat::zero();
    match family {
        KnownFamily::MobiusEven => {
            let p = vec![
                vec![
                    one,
                    q * q - one,
                    q * q * (q + one) / two,
                    q * (q - one) * (q - two) / two,
                ],
                vec![one, q - one, -q, zero],
                vec![one, -two, q * (q - one) / two, -(q + one) * (q - two) / two],
                vec![one, -(q + one), zero, q],
            ];
            let qq = vec![
                vec![one, q * (q * q + one) / two, q * q, (q * q + one) * (q - two) / two],
                vec![
                    one,
                    q * (q * q + one) / (two * (q + one)),
                    -two * q * q / (q * q - one),
                    -(q - two) * (q * q + one) / (two * (q - one)),
                ],
                vec![one, -(q * q + one) / (q + one), q * (q - one) / (q + one), zero],
                vec![one, zero, -q * (q + one) / (q - one), (q * q + one) / (q - one)],
            ];
            (p, qq)
        }
        KnownFamily::LaguerreOdd => {
            let p = vec![
                vec![
                    one,
                    q * q - one,
                    q * (q * q - one) / two,
                    q * (q - one) * (q - one) / two,
                ],
                vec![one, -one, q * (q - one) / two, -q * (q - one) / two],
                vec![one, q - one, -q, zero],
                vec![one, -(q + one), zero, q],
            ];
            (p.clone(), p)
        }
        KnownFamily::MinkowskiEven => {
            let p = vec![
                vec![
                    one,
                    q * q - one,
                    q * (q + one) * (q - two) / two,
                    (q - one) * q * q / two,
                ],
                vec![one, q - one, -q, zero],
                vec![one, -(q + one), zero, q],
                vec![one, zero, (q * q - q - two) / two, -(q - one) * q / two],
            ];
            let qq = vec![
                vec![
                    one,
                    (q + one) * (q + one) * (q - two) / two,
                    (q - one) * (q - one) * q / two,
                    q * q,
                ],
                vec![one, (q + one) * (q - two) / two, -(q - one) * q / two, zero],
                vec![one, -(q + one), zero, q],
                vec![one, zero, q - one, -q],
            ];
            (p, qq)
        }
        KnownFamily::LaguerrePlusEven => {
            let n3 = (q - one) * (q - one) * q / two;
            let n2 = q * q * q - one - n3;
            let p = vec![
                vec![one, n2, n3],
                vec![one, -one - q / two, q / two],
                vec![one, (q + one) * (q - two) / two, -(q - one) * q / two],
            ];
            let m = [one, (q + one) * (q - one) * (q - one), (q - one) * (q + two)];
            let vals = [one, n2, n3];
            // Q(i,j) = m_j P(j,i) / n_i
            let qq = (0..3)
                .map(|i| (0..3).map(|j| m[j] * p[j][i] / vals[i]).collect())
                .collect();
            (p, qq)
        }
    }
}

/// `p^k_{ij} = (1/(n·n_k)) Σ_l m_l P(l,i) P(l,j) P(l,k)`.
pub fn tensor_from_eigenvalues(p: &[Vec<Rat>], q: &[Vec<Rat>]) -> Vec<Vec<Vec<Rat>>> {
    let d1 = p.len();
    let n: Rat = q[0].iter().sum();
    let m = &q[0];
    (0..d1)
        .map(|k| {
            (0..d1)
                .map(|i| {
                    (0..d1)
                        .map(|j| {
                            let s: Rat = (0..d1).map(|l| m[l] * p[l][i] * p[l][j] * p[l][k]).sum();
                            s / (n * p[0][k])
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableDiff {
    pub matrix: String,
    pub row: usize,
    pub col: usize,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableCheck {
    pub family: KnownFamily,
    pub order: usize,
    pub matches: bool,
    pub diffs: Vec<TableDiff>,
}

/// Compares computed P, Q and multiplicities against the closed forms. Rows
/// are matched by eigenvalue content; diffs are reported in the closed form's
/// own row order.
pub fn verify_tables(e: &EigenData, family: KnownFamily, q: usize) -> TableCheck {
    let (ep, eq) = closed_form(family, q);
    let mut diffs = Vec::new();
    if e.relations != family.relations() {
        diffs.push(TableDiff {
            matrix: "relations".to_string(),
            row: 0,
            col: 0,
            expected: format!("{:?}", family.relations()),
            actual: format!("{:?}", e.relations),
        });
        return TableCheck {
            family,
            order: q,
            matches: false,
            diffs,
        };
    }
    let d1 = ep.len();
    let computed: Vec<Vec<Rat>> = e.p.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect();
    for (l, row) in ep.iter().enumerate() {
        match computed.iter().position(|c| c == row) {
            None => {
                for (c, x) in row.iter().enumerate() {
                    diffs.push(TableDiff {
                        matrix: "P".to_string(),
                        row: l,
                        col: c,
                        expected: fmt_rat(x),
                        actual: "no matching eigenspace".to_string(),
                    });
                }
            }
            Some(at) => {
                for i in 0..d1 {
                    if eq[i][l] != e.q[i][at] {
                        diffs.push(TableDiff {
                            matrix: "Q".to_string(),
                            row: i,
                            col: l,
                            expected: fmt_rat(&eq[i][l]),
                            actual: fmt_rat(&e.q[i][at]),
                        });
                    }
                }
            }
        }
    }
    TableCheck {
        family,
        order: q,
        matches: diffs.is_empty(),
        diffs,
    }
}

/// Compares the verified intersection numbers with those implied by the closed-form P and Q.
pub fn tensor_matches_closed_form(report: &SchemeReport, family: KnownFamily, q: usize) -> bool {
    let Some(p) = &report.p else { return false };
    let (ep, eq) = closed_form(family, q);
    let t = tensor_from_eigenvalues(&ep, &eq);
    p.len() == t.len()
        && (0..t.len()).all(|k| (0..t.len()).all(|i| (0..t.len()).all(|j| t[k][i][j] == rat(p[k][i][j] as i128))))
}

/// Verifies `A_i T_x = T_x B_i` for five base circles, and that the columns
/// of Q are eigenvectors of each `B_i` with eigenvalues from P.
pub fn check_intersection_matrices(r: &RelationSet, b: &[Vec<Vec<i128>>], e: &EigenData) -> bool {
    let n = r.n;
    let d1 = r.labels.len();
    let bases: Vec<usize> = (0..5).map(|k| k * n / 5).collect();
    for &x in &bases {
        for (i, bi) in b.iter().enumerate() {
            for y in 0..n {
                let k = r.relation(y, x);
                for j in 0..d1 {
                    let lhs = r.row(i, y).and_count(r.row(j, x)) as i128;
                    if lhs != bi[k][j] {
                        return false;
                    }
                }
            }
        }
    }
    for (i, bi) in b.iter().enumerate() {
        for l in 0..d1 {
            for k in 0..d1 {
                let lhs: Rat = (0..d1).map(|j| rat(bi[k][j]) * e.q[j][l]).sum();
                if lhs != e.q[k][l] * rat(e.p[l][i]) {
                    return false;
                }
            }
        }
    }
    true
}

pub fn intersection_matrix_check(r: &RelationSet, report: &SchemeReport, e: &EigenData) -> Result<bool> {
    Ok(check_intersection_matrices(r, &intersection_matrices(report)?, e))
}

/// `Π_λ (A_j − λI) = 0` over the distinct eigenvalues in column j of P.
pub fn spectral_closure(r: &RelationSet, e: &EigenData, j: usize) -> bool {
    let n = r.n;
    let mut lambdas = e.column(j);
    lambdas.sort_unstable();
    lambdas.dedup();
    let aj: Vec<Vec<usize>> = (0..n).map(|x| r.row(j, x).to_vec()).collect();
    // M = A_j − λ_0 I, then M ← M A_j − λ M
    let mut m: Vec<Vec<i64>> = (0..n)
        .map(|x| {
            let mut row = vec![0i64; n];
            for &y in &aj[x] {
                row[y] = 1;
            }
            row[x] -= lambdas[0] as i64;
            row
        })
        .collect();
    for &lambda in &lambdas[1..] {
        m = m
            .par_iter()
            .map(|row| {
                (0..n)
                    .map(|y| {
                        // A_j is symmetric: column y is row y
                        let s: i64 = aj[y].iter().map(|&z| row[z]).sum();
                        s - lambda as i64 * row[y]
                    })
                    .collect()
            })
            .collect();
    }
    m.iter().all(|row| row.iter().all(|&v| v == 0))
}

/// `Σ_l m_l P(l,j)^s = trace(A_j^s)` for s = 1, 2, 3; traces counted directly.
pub fn trace_power_check(r: &RelationSet, e: &EigenData) -> bool {
    let n = r.n;
    let d1 = r.labels.len();
    (0..d1).all(|j| {
        let t1: i128 = if j == 0 { n as i128 } else { 0 };
        let t2: i128 = (0..n).map(|x| r.row(j, x).count() as i128).sum();
        let t3: i128 = (0..n)
            .into_par_iter()
            .map(|x| {
                r.row(j, x)
                    .iter()
                    .map(|y| r.row(j, x).and_count(r.row(j, y)) as i128)
                    .sum::<i128>()
            })
            .sum();
        let s = |pow: u32| -> i128 { (0..d1).map(|l| e.multiplicities[l] * e.p[l][j].pow(pow)).sum() };
        s(1) == t1 && s(2) == t2 && s(3) == t3
    })
}

/// Hoffman's ratio bound `n(−τ)/(k − τ)` for `Σ w_i A_i` (weights for relations 1..d).
pub fn hoffman_bound(e: &EigenData, weights: &[Rat]) -> Result<Rat> {
    if weights.len() != e.d() {
        return Err(Error::BadArguments(format!(
            "{} weights for {} relations",
            weights.len(),
            e.d()
        )));
    }
    if weights.iter().any(|w| *w < Rat::zero()) || weights.iter().all(|w| w.is_zero()) {
        return Err(Error::BadArguments(
            "weights must be nonnegative and not all zero".to_string(),
        ));
    }
    let theta: Vec<Rat> =
        e.p.iter()
            .map(|row| weights.iter().zip(&row[1..]).map(|(w, &x)| w * rat(x)).sum())
            .collect();
    let k = theta[0];
    let tau = theta.iter().copied().min().unwrap();
    if tau >= Rat::zero() {
        return Err(Error::BadArguments(
            "weighted matrix has no negative eigenvalue".to_string(),
        ));
    }
    Ok(rat(e.n as i128) * -tau / (k - tau))
}

/// Hoffman bound from a scheme report, failing when the relations are not a scheme.
pub fn hoffman_from_report(report: &SchemeReport, weights: &[Rat]) -> Result<Rat> {
    if !report.is_scheme {
        return Err(Error::NotAScheme);
    }
    hoffman_bound(&eigendata(report)?, weights)
}

/// Weights selecting a single relation.
pub fn select(e: &EigenData, r: Relation) -> Vec<Rat> {
    (1..e.relations.len())
        .map(|i| if e.relations[i] == r { rat(1) } else { Rat::zero() })
        .collect()
}

/// `α·ω ≤ n` for vertex-transitive graphs.
pub fn clique_coclique_bound(n: usize, clique_size: usize) -> usize {
    n / clique_size
}

/// Delsarte's linear programming bound: maximize `Σ a_i` subject to `a_0 = 1`,
/// `a_i ≥ 0`, `a_i = 0` outside `allowed`, and `a·Q ≥ 0`. Solved exactly by
/// enumerating the vertices of the feasible region.
pub fn delsarte_lp_bound(e: &EigenData, allowed: &[usize]) -> Result<Rat> {
    if !allowed.contains(&0) || allowed.iter().any(|&i| i > e.d()) {
        return Err(Error::BadArguments(
            "allowed relations must contain 0 and lie in 0..=d".to_string(),
        ));
    }
    let vars: Vec<usize> = {
        let mut v: Vec<usize> = allowed.iter().copied().filter(|&i| i != 0).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let nv = vars.len();
    if nv == 0 {
        return Ok(rat(1));
    }
    // constraints c·a + c0 ≥ 0
    let mut cons: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for k in 0..nv {
        let mut c = vec![Rat::zero(); nv];
        c[k] = rat(1);
        cons.push((c, Rat::zero()));
    }
    for j in 1..=e.d() {
        let c: Vec<Rat> = vars.iter().map(|&i| e.q[i][j]).collect();
        cons.push((c, e.q[0][j]));
    }
    let feasible = |a: &[Rat]| {
        cons.iter()
            .all(|(c, c0)| c.iter().zip(a).map(|(x, y)| x * y).sum::<Rat>() + c0 >= Rat::zero())
    };
    let mut best: Option<Rat> = None;
    for subset in combinations(cons.len(), nv) {
        let m: Vec<Vec<Rat>> = subset.iter().map(|&s| cons[s].0.clone()).collect();
        let rhs: Vec<Rat> = subset.iter().map(|&s| -cons[s].1).collect();
        let Some(a) = exact::solve(&m, &rhs) else { continue };
        if feasible(&a) {
            let v = rat(1) + a.iter().sum::<Rat>();
            if best.is_none_or(|b| v > b) {
                best = Some(v);
            }
        }
    }
    Ok(best.expect("the origin is a vertex"))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    /// Identity name to whether it holds.
    pub identities: BTreeMap<String, bool>,
    pub rank: usize,
    pub expected_rank: Option<usize>,
}

/// Gram identities of the incidence matrix W (rows circles, columns points)
/// and its rank over the rationals.
pub fn incidence_identities(g: &CircleGeometry, r: &RelationSet) -> IdentityReport {
    let q = g.order();
    let n = g.num_circles();
    let v = g.num_points();
    let mut identities = BTreeMap::new();

    // W Wᵗ = Σ_i |meet_i| A_i
    let size = r.circle_size;
    let circle_gram = (0..n)
        .into_par_iter()
        .all(|x| (0..n).all(|y| g.meet(x, y) == r.labels[r.relation(x, y)].meet_size(size)));
    let name = match g.kind() {
        GeometryKind::LaguerrePlus => "W W^t = (q+2) I + 2 A_2",
        _ => "W W^t = (q+1) I + A_1 + 2 A_2",
    };
    identities.insert(name.to_string(), circle_gram);

    // Wᵗ W, points by points
    let mut wtw = vec![vec![0i64; v]; v];
    for c in g.circles() {
        for &a in c {
            for &b in c {
                wtw[a][b] += 1;
            }
        }
    }
    if g.kind() == GeometryKind::Mobius {
        let ok = (0..v).all(|a| {
            (0..v).all(|b| {
                let expect = if a == b {
                    (q * q - 1 + q + 1) as i64
                } else {
                    (q + 1) as i64
                };
                wtw[a][b] == expect
            })
        });
        identities.insert("W^t W = (q^2-1) I + (q+1) J".to_string(), ok);
    }
    let big: Vec<Vec<BigInt>> = wtw
        .iter()
        .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let rank = exact::bareiss_rank(big);
    let expected_rank = match (g.kind(), q % 2) {
        (GeometryKind::Mobius, _) => Some(q * q + 1),
        (GeometryKind::Laguerre, 1) => Some(q * q),
        (GeometryKind::LaguerrePlus, 0) => Some(q * q + q - 1),
        _ => None,
    };
    IdentityReport {
        identities,
        rank,
        expected_rank,
    }
}

/// Degree of the minimal polynomial of `A_j` (its number of distinct
/// eigenvalues, as `A_j` is symmetric) and the integer roots when all are integers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectrumCount {
    pub relation: Relation,
    pub distinct: usize,
    pub integer_roots: Option<Vec<i128>>,
}

pub fn distinct_eigenvalues(r: &RelationSet, j: usize) -> SpectrumCount {
    let n = r.n;
    let adj: Vec<Vec<usize>> = (0..n).map(|x| r.row(j, x).to_vec()).collect();
    let mut powers: Vec<Vec<i128>> = Vec::new();
    let mut cur: Vec<i128> = (0..n * n).map(|i| if i / n == i % n { 1 } else { 0 }).collect();
    let (degree, pivots) = loop {
        powers.push(cur.clone());
        let (rank, pivots) = bareiss_rank_pivots(&powers);
        if rank < powers.len() {
            break (rank, pivots);
        }
        // cur ← cur · A_j
        let mut next = vec![0i128; n * n];
        for x in 0..n {
            for y in 0..n {
                next[x * n + y] = adj[y].iter().map(|&z| cur[x * n + z]).sum();
            }
        }
        cur = next;
    };
    // A^degree = Σ c_i A^i restricted to the pivot entries
    let m: Vec<Vec<BigRational>> = pivots
        .iter()
        .map(|&s| {
            (0..degree)
                .map(|i| BigRational::from_integer(BigInt::from(powers[i][s])))
                .collect()
        })
        .collect();
    let rhs: Vec<BigRational> = pivots
        .iter()
        .map(|&s| BigRational::from_integer(BigInt::from(powers[degree][s])))
        .collect();
    let coeffs = solve_big(m, rhs);
    let mut poly: Vec<i128> = coeffs
        .iter()
        .map(|c| (-c).to_integer().to_i128().unwrap_or(i128::MAX))
        .collect();
    poly.push(1);
    let bound = r.row(j, 0).count() as i128;
    let roots = exact::integer_roots(&poly, bound.max(1));
    SpectrumCount {
        relation: r.labels[j],
        distinct: degree,
        integer_roots: roots,
    }
}

fn bareiss_rank_pivots(rows: &[Vec<i128>]) -> (usize, Vec<usize>) {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let nr = m.len();
    let nc = m[0].len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    let mut pivots = Vec::new();
    for c in 0..nc {
        if rank == nr {
            break;
        }
        let Some(p) = (rank..nr).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for i in rank + 1..nr {
            for j in c + 1..nc {
                m[i][j] = (&m[rank][c] * &m[i][j] - &m[i][c] * &m[rank][j]) / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[rank][c].clone();
        pivots.push(c);
        rank += 1;
    }
    (rank, pivots)
}

fn solve_big(mut m: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>) -> Vec<BigRational> {
    let n = m.len();
    for c in 0..n {
        let p = (c..n)
            .find(|&i| !m[i][c].is_zero())
            .expect("pivot columns are independent");
        m.swap(c, p);
        rhs.swap(c, p);
        let inv = m[c][c].recip();
        for x in m[c].iter_mut() {
            *x = &*x * &inv;
        }
        rhs[c] = &rhs[c] * &inv;
        for i in 0..n {
            if i != c && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..n {
                    let t = &f * &m[c][j];
                    m[i][j] = &m[i][j] - t;
                }
                let t = &f * &rhs[c];
                rhs[i] = &rhs[i] - t;
            }
        }
    }
    rhs
}

/// Serialized scheme report.
#[derive(Clone, Debug, Serialize)]
pub struct SchemeDoc {
    pub is_scheme: bool,
    pub relations: Vec<Relation>,
    pub valencies: Vec<u64>,
    pub p_tensor: Option<Vec<Vec<Vec<u64>>>>,
    #[serde(rename = "P")]
    pub p: Option<Vec<Vec<i128>>>,
    #[serde(rename = "Q")]
    pub q: Option<Vec<Vec<String>>>,
    pub multiplicities: Option<Vec<i128>>,
    pub identities: BTreeMap<String, bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<SchemeWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumCount>,
}

impl SchemeDoc {
    pub fn new(report: &SchemeReport, eig: Option<&EigenData>, identities: BTreeMap<String, bool>) -> SchemeDoc {
        SchemeDoc {
            is_scheme: report.is_scheme,
            relations: report.relations.clone(),
            valencies: report.valencies.clone(),
            p_tensor: report.p.clone(),
            p: eig.map(|e| e.p.clone()),
            q: eig.map(|e| e.q.iter().map(|r| r.iter().map(fmt_rat).collect()).collect()),
            multiplicities: eig.map(|e| e.multiplicities.clone()),
            identities,
            witness: report.witness.clone(),
            spectrum: None,
        }
    }
}

/// Integer matrix rendered with signs, for diagnostics.
pub fn fmt_matrix(m: &[Vec<i128>]) -> String {
    m.iter()
        .map(|r| r.iter().map(|x| format!("{x:>6}")).collect::<Vec<_>>().join(""))
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{from_quadratic_set, laguerre_plus, laguerre_polynomial_model, minkowski_pgl_model};
    use crate::gf::Field;
    use crate::quadset::{elliptic_quadric, quadric_cone};

    fn mobius(q: usize) -> CircleGeometry {
        from_quadratic_set(&elliptic_quadric(&Field::new(q).unwrap()).unwrap()).unwrap()
    }

    fn laguerre(q: usize) -> CircleGeometry {
        laguerre_polynomial_model(&Field::new(q).unwrap())
    }

    #[test]
    fn mobius_4_valencies_and_tensor() {
        let r = relations(&mobius(4)).unwrap();
        let rep = check_scheme(&r);
        assert!(rep.is_scheme);
        assert_eq!(rep.valencies, vec![1, 15, 40, 12]);
        assert_eq!(rep.p(1, 1, 1), Some(2));
        assert!(tensor_matches_closed_form(&rep, KnownFamily::MobiusEven, 4));
    }

    #[test]
    fn laguerre_valencies() {
        let r = relations(&laguerre(3)).unwrap();
        let rep = check_scheme(&r);
        assert!(rep.is_scheme);
        assert_eq!(rep.valencies, vec![1, 8, 12, 6]);
        let rep5 = check_scheme(&relations(&laguerre(5)).unwrap());
        assert_eq!(rep5.p(2, 1, 2), Some(12));
    }

    #[test]
    fn laguerre_plus_valencies_and_spectrum() {
        let lp = laguerre_plus(&laguerre(4)).unwrap();
        let r = relations(&lp).unwrap();
        assert_eq!(r.labels(), &[Relation::Identity, Relation::Meet2, Relation::Disjoint]);
        let rep = check_scheme(&r);
        assert!(rep.is_scheme);
        assert_eq!(rep.valencies, vec![1, 45, 18]);
        let e = eigendata(&rep).unwrap();
        assert_eq!(e.column(2), vec![18, 2, -6]);
        assert_eq!(e.multiplicities, vec![1, 45, 18]);
        assert!(verify_tables(&e, KnownFamily::LaguerrePlusEven, 4).matches);
    }

    #[test]
    fn laguerre_plus_rejects_meet1() {
        // a geometry labelled as the extension but with tangent circles
        let g = laguerre(4);
        let fake = CircleGeometry::from_parts(
            4,
            GeometryKind::LaguerrePlus,
            g.model(),
            g.labels().to_vec(),
            g.circles().to_vec(),
            g.parallel().to_vec(),
            None,
        );
        assert!(matches!(
            relations(&fake),
            Err(Error::UnexpectedIntersectionSize { size: 1, .. })
        ));
    }

    #[test]
    fn mobius_4_eigendata() {
        let rep = check_scheme(&relations(&mobius(4)).unwrap());
        let e = eigendata(&rep).unwrap();
        let mut col = e.column(3);
        col.sort_unstable();
        assert_eq!(col, vec![-5, 0, 4, 12]);
        assert!(e.pq_is_scaled_identity());
        assert_eq!(
            e.q[0].iter().map(|x| x.to_integer()).collect::<Vec<_>>(),
            e.multiplicities
        );
        let check = verify_tables(&e, KnownFamily::MobiusEven, 4);
        assert!(check.matches, "{:?}", check.diffs);
    }

    #[test]
    fn laguerre_3_self_dual() {
        let rep = check_scheme(&relations(&laguerre(3)).unwrap());
        let e = eigendata(&rep).unwrap();
        let mut col = e.column(3);
        col.sort_unstable();
        assert_eq!(col, vec![-3, 0, 3, 6]);
        assert!(verify_tables(&e, KnownFamily::LaguerreOdd, 3).matches);
    }

    #[test]
    fn minkowski_even_tables_and_odd_failure() {
        let f4 = Field::new(4).unwrap();
        let rep = check_scheme(&relations(&minkowski_pgl_model(&f4)).unwrap());
        assert!(rep.is_scheme);
        let e = eigendata(&rep).unwrap();
        let mut col = e.column(3);
        col.sort_unstable();
        assert_eq!(col, vec![-6, 0, 4, 24]);
        assert!(verify_tables(&e, KnownFamily::MinkowskiEven, 4).matches);

        let r5 = relations(&minkowski_pgl_model(&Field::new(5).unwrap())).unwrap();
        let rep5 = check_scheme(&r5);
        assert!(!rep5.is_scheme);
        let w = rep5.witness.unwrap();
        assert_ne!(w.count_a, w.count_b);
        assert_eq!(r5.relation(w.pair_a.0, w.pair_a.1), r5.relation(w.pair_b.0, w.pair_b.1));
    }

    #[test]
    fn perturbed_intersection_matrix_fails() {
        let r = relations(&laguerre(3)).unwrap();
        let rep = check_scheme(&r);
        let e = eigendata(&rep).unwrap();
        let mut b = intersection_matrices(&rep).unwrap();
        assert!(check_intersection_matrices(&r, &b, &e));
        b[1][2][2] += 1;
        assert!(!check_intersection_matrices(&r, &b, &e));
    }

    #[test]
    fn hoffman_values() {
        let e = eigendata(&check_scheme(&relations(&mobius(4)).unwrap())).unwrap();
        assert_eq!(hoffman_bound(&e, &select(&e, Relation::Disjoint)).unwrap(), rat(20));
        assert_eq!(hoffman_bound(&e, &[rat(3), rat(0), rat(1)]).unwrap(), rat(11));
        let l = eigendata(&check_scheme(&relations(&laguerre(3)).unwrap())).unwrap();
        assert_eq!(hoffman_bound(&l, &select(&l, Relation::Disjoint)).unwrap(), rat(9));
        assert!(hoffman_bound(&l, &[rat(0), rat(0), rat(0)]).is_err());
        let bad = check_scheme(&relations(&minkowski_pgl_model(&Field::new(3).unwrap())).unwrap());
        if !bad.is_scheme {
            assert_eq!(
                hoffman_from_report(&bad, &[rat(0), rat(0), rat(1)]),
                Err(Error::NotAScheme)
            );
        }
    }

    #[test]
    fn clique_coclique() {
        assert_eq!(clique_coclique_bound(27, 9), 3);
        assert_eq!(clique_coclique_bound(68, 20), 3);
        assert_eq!(clique_coclique_bound(24, 6), 4);
    }

    #[test]
    fn delsarte() {
        let e = eigendata(&check_scheme(&relations(&laguerre(5)).unwrap())).unwrap();
        let m2 = e.index_of(Relation::Meet2).unwrap();
        assert_eq!(delsarte_lp_bound(&e, &[0, m2]).unwrap(), rat(13));
        assert_eq!(delsarte_lp_bound(&e, &[0, 1, 2, 3]).unwrap(), rat(125));
        assert_eq!(delsarte_lp_bound(&e, &[0]).unwrap(), rat(1));
        assert!(delsarte_lp_bound(&e, &[1]).is_err());
    }

    #[test]
    fn identities() {
        let g = mobius(4);
        let r = relations(&g).unwrap();
        let rep = incidence_identities(&g, &r);
        assert!(rep.identities.values().all(|&b| b));
        assert_eq!(rep.rank, 17);
        let l = laguerre(3);
        let rep = incidence_identities(&l, &relations(&l).unwrap());
        assert_eq!(rep.rank, 9);
        let lp = laguerre_plus(&laguerre(4)).unwrap();
        let rep = incidence_identities(&lp, &relations(&lp).unwrap());
        assert!(rep.identities.values().all(|&b| b));
        assert_eq!(rep.rank, 19);
    }

    #[test]
    fn closure_and_traces() {
        for g in [mobius(2), mobius(4), laguerre(3), laguerre_plus(&laguerre(2)).unwrap()] {
            let r = relations(&g).unwrap();
            let rep = check_scheme(&r);
            let e = eigendata(&rep).unwrap();
            for j in 0..=e.d() {
                assert!(spectral_closure(&r, &e, j));
            }
            assert!(trace_power_check(&r, &e));
            assert!(intersection_matrix_check(&r, &rep, &e).unwrap());
        }
    }

    #[test]
    fn minkowski_odd_spectrum_count() {
        let r = relations(&minkowski_pgl_model(&Field::new(5).unwrap())).unwrap();
        let j = r.index_of(Relation::Disjoint).unwrap();
        let s = distinct_eigenvalues(&r, j);
        assert_eq!(s.distinct, 5);
        let roots = s.integer_roots.unwrap();
        assert_eq!(roots.len(), 5);
        assert!(roots.contains(&(r.row(j, 0).count() as i128)));
    }

    #[test]
    fn cone_and_polynomial_schemes_agree() {
        let f = Field::new(3).unwrap();
        let a = check_scheme(&relations(&from_quadratic_set(&quadric_cone(&f).unwrap()).unwrap()).unwrap());
        let b = check_scheme(&relations(&laguerre(3)).unwrap());
        assert_eq!(a.p, b.p);
    }

    #[test]
    fn tensor_identities() {
        for g in [mobius(4), laguerre(3), laguerre(5)] {
            let rep = check_scheme(&relations(&g).unwrap());
            let p = rep.p.as_ref().unwrap();
            let nv = &rep.valencies;
            let d1 = nv.len();
            for k in 0..d1 {
                for i in 0..d1 {
                    assert_eq!(p[k][i].iter().sum::<u64>(), nv[i]);
                    for j in 0..d1 {
                        assert_eq!(p[k][i][j], p[k][j][i]);
                        assert_eq!(p[k][i][j] * nv[k], p[j][i][k] * nv[j]);
                    }
                }
            }
        }
    }
}
