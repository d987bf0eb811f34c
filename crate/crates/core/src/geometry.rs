//! Circle geometries: Möbius, Laguerre and Minkowski planes, and the
//! extension of an even-order Laguerre plane by its circle nuclei.
//!
//! Points are `0..n`, circles are sorted point lists kept alongside packed
//! bit sets. A parallel relation is a partition of the points into classes;
//! Möbius planes have none, Laguerre planes one, Minkowski planes two.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::gf::{Elem, Field};
use crate::pg::Coords;
use crate::quadset::{QuadKind, QuadraticSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    Mobius,
    Laguerre,
    Minkowski,
    LaguerrePlus,
}

impl GeometryKind {
    pub fn name(self) -> &'static str {
        match self {
            GeometryKind::Mobius => "mobius",
            GeometryKind::Laguerre => "laguerre",
            GeometryKind::Minkowski => "minkowski",
            GeometryKind::LaguerrePlus => "laguerre_plus",
        }
    }
}

/// Where the geometry came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    EllipticQuadric,
    SuzukiTits,
    QuadricCone,
    OvalCone,
    HyperbolicQuadric,
    Polynomial,
    Pgl2,
}

/// Points, circles, classes per parallel relation and circle size for a kind at order q.
pub fn expected_counts(kind: GeometryKind, q: usize) -> (usize, usize, Vec<usize>, usize) {
    match kind {
        GeometryKind::Mobius => (q * q + 1, q * (q * q + 1), vec![], q + 1),
        GeometryKind::Laguerre => (q * (q + 1), q * q * q, vec![q + 1], q + 1),
        GeometryKind::Minkowski => ((q + 1) * (q + 1), (q - 1) * q * (q + 1), vec![q + 1, q + 1], q + 1),
        GeometryKind::LaguerrePlus => (q * (q + 1) + q, q * q * q, vec![q + 2], q + 2),
    }
}

#[derive(Clone, Debug)]
pub struct CircleGeometry {
    order: usize,
    kind: GeometryKind,
    model: Model,
    labels: Vec<String>,
    coords: Option<Vec<Coords>>,
    circles: Vec<Vec<usize>>,
    bits: Vec<BitSet>,
    parallel: Vec<Vec<Vec<usize>>>,
    class_of: Vec<Vec<usize>>,
    nucleus: Option<Vec<usize>>,
    /// Labels and coordinates of the nucleus points, indexed by nucleus id.
    nucleus_points: Option<Vec<(String, Option<Coords>)>>,
}

impl CircleGeometry {
    /// Assembles a geometry from raw parts without checking any axiom.
    pub fn from_parts(
        order: usize,
        kind: GeometryKind,
        model: Model,
        labels: Vec<String>,
        circles: Vec<Vec<usize>>,
        parallel: Vec<Vec<Vec<usize>>>,
        nucleus: Option<Vec<usize>>,
    ) -> CircleGeometry {
        let n = labels.len();
        let circles: Vec<Vec<usize>> = circles
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        let bits = circles
            .iter()
            .map(|c| BitSet::from_indices(n, c.iter().copied()))
            .collect();
        let class_of = parallel
            .iter()
            .map(|classes| {
                let mut of = vec![usize::MAX; n];
                for (k, class) in classes.iter().enumerate() {
                    for &p in class {
                        of[p] = k;
                    }
                }
                of
            })
            .collect();
        CircleGeometry {
            order,
            kind,
            model,
            labels,
            coords: None,
            circles,
            bits,
            parallel,
            class_of,
            nucleus,
            nucleus_points: None,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn num_points(&self) -> usize {
        self.labels.len()
    }

    pub fn num_circles(&self) -> usize {
        self.circles.len()
    }

    pub fn circles(&self) -> &[Vec<usize>] {
        &self.circles
    }

    pub fn circle(&self, i: usize) -> &[usize] {
        &self.circles[i]
    }

    pub fn circle_bits(&self) -> &[BitSet] {
        &self.bits
    }

    pub fn parallel(&self) -> &[Vec<Vec<usize>>] {
        &self.parallel
    }

    pub fn nucleus_map(&self) -> Option<&[usize]> {
        self.nucleus.as_deref()
    }

    pub fn point_label(&self, p: usize) -> &str {
        &self.labels[p]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// PG(3,q) coordinates of the points, when built from a quadratic set.
    pub fn coords(&self) -> Option<&[Coords]> {
        self.coords.as_deref()
    }

    /// `|c ∩ d|` for circle indices.
    #[inline]
    pub fn meet(&self, c: usize, d: usize) -> usize {
        self.bits[c].and_count(&self.bits[d])
    }

    /// Distinct points in a common class of some parallel relation.
    pub fn are_parallel(&self, a: usize, b: usize) -> bool {
        a != b && self.class_of.iter().any(|of| of[a] == of[b])
    }

    pub fn circles_through(&self, p: usize) -> Vec<usize> {
        (0..self.circles.len()).filter(|&c| self.bits[c].contains(p)).collect()
    }

    /// Circle groups act transitively on circles for every model except the
    /// Suzuki–Tits ovoid, where this is not relied upon.
    pub fn is_circle_transitive(&self) -> bool {
        self.model != Model::SuzukiTits
    }

    /// The same geometry with one circle replaced; used to exercise validation.
    pub fn with_circle(&self, i: usize, circle: Vec<usize>) -> CircleGeometry {
        let mut circles = self.circles.clone();
        circles[i] = circle;
        let mut g = CircleGeometry::from_parts(
            self.order,
            self.kind,
            self.model,
            self.labels.clone(),
            circles,
            self.parallel.clone(),
            self.nucleus.clone(),
        );
        g.coords = self.coords.clone();
        g.nucleus_points = self.nucleus_points.clone();
        g
    }

    pub fn to_doc(&self) -> GeometryDoc {
        GeometryDoc {
            order: self.order,
            kind: self.kind,
            model: self.model,
            points: self
                .labels
                .iter()
                .enumerate()
                .map(|(id, label)| PointDoc {
                    id,
                    label: label.clone(),
                })
                .collect(),
            circles: self.circles.clone(),
            parallel: self.parallel.clone(),
            nucleus_map: self.nucleus.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PointDoc {
    pub id: usize,
    pub label: String,
}

/// Serialized form of a geometry.
#[derive(Clone, Debug, Serialize)]
pub struct GeometryDoc {
    pub order: usize,
    pub kind: GeometryKind,
    pub model: Model,
    pub points: Vec<PointDoc>,
    pub circles: Vec<Vec<usize>>,
    pub parallel: Vec<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nucleus_map: Option<Vec<usize>>,
}

/// Points are the non-singular points, circles the oval sections. Circles are
/// listed in lexicographic order of their point lists.
pub fn from_quadratic_set(qs: &QuadraticSet) -> Result<CircleGeometry> {
    let q = qs.order();
    let space = qs.space();
    let pts = qs.nonsingular_points();
    let local: HashMap<usize, usize> = pts.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let to_local = |v: &[usize]| -> Vec<usize> { v.iter().filter_map(|p| local.get(p).copied()).collect() };

    let kind = match qs.kind() {
        QuadKind::Elliptic | QuadKind::SuzukiTits => GeometryKind::Mobius,
        QuadKind::Cone => GeometryKind::Laguerre,
        QuadKind::Hyperbolic => GeometryKind::Minkowski,
    };
    let model = match qs.kind() {
        QuadKind::Elliptic => Model::EllipticQuadric,
        QuadKind::SuzukiTits => Model::SuzukiTits,
        QuadKind::Cone if qs.is_quadric_cone() => Model::QuadricCone,
        QuadKind::Cone => Model::OvalCone,
        QuadKind::Hyperbolic => Model::HyperbolicQuadric,
    };

    let nu_points: Option<Vec<usize>> = qs
        .nucleus_line()
        .map(|l| l.points().iter().copied().filter(|&p| Some(p) != qs.vertex()).collect());

    let mut sections: Vec<(Vec<usize>, Option<usize>)> = qs
        .oval_planes()
        .into_iter()
        .map(|(h, sec)| {
            let nucleus = nu_points.as_ref().map(|nu| {
                let n = qs.plane_nucleus(h).expect("oval plane of an even cone");
                nu.iter().position(|&x| x == n).unwrap()
            });
            (to_local(&sec), nucleus)
        })
        .collect();
    sections.sort();
    let (circles, nuclei): (Vec<Vec<usize>>, Vec<Option<usize>>) = sections.into_iter().unzip();
    let nucleus = nu_points
        .as_ref()
        .map(|_| nuclei.into_iter().map(Option::unwrap).collect());

    let parallel = match qs.kind() {
        QuadKind::Cone => {
            let r = qs.vertex().unwrap();
            let mut classes: Vec<Vec<usize>> = qs
                .base_oval()
                .unwrap()
                .iter()
                .map(|&b| to_local(space.line_through(r, b).unwrap().points()))
                .collect();
            classes.sort();
            vec![classes]
        }
        QuadKind::Hyperbolic => qs
            .rulings()
            .unwrap()
            .iter()
            .map(|reg| {
                let mut classes: Vec<Vec<usize>> = reg.iter().map(|l| to_local(l.points())).collect();
                classes.sort();
                classes
            })
            .collect(),
        _ => vec![],
    };

    let labels = pts.iter().map(|&p| space.label(p)).collect();
    let mut g = CircleGeometry::from_parts(q, kind, model, labels, circles, parallel, nucleus);
    g.coords = Some(pts.iter().map(|&p| *space.point(p)).collect());
    g.nucleus_points = nu_points.map(|nu| nu.iter().map(|&p| (space.label(p), Some(*space.point(p)))).collect());
    let (np, nc, _, _) = expected_counts(kind, q);
    if g.num_points() != np || g.num_circles() != nc {
        return Err(Error::ConstructionInvalid(format!(
            "{} points and {} circles",
            g.num_points(),
            g.num_circles()
        )));
    }
    Ok(g)
}

/// Position of x in F_q ∪ {∞}: element index, with ∞ last.
fn x_label(f: &Field, x: usize) -> String {
    if x == f.order() {
        "inf".to_string()
    } else {
        f.label(Elem::from_index(x))
    }
}

/// Graphs of all polynomials aX² + bX + c over F_q ∪ {∞}, with f(∞) = a.
/// Point (x, y) has index `x·q + y` where x = q stands for ∞; circle `c + bq + aq²`
/// is the graph of aX² + bX + c.
pub fn laguerre_polynomial_model(field: &Field) -> CircleGeometry {
    let q = field.order();
    let f = field;
    let labels = (0..=q)
        .flat_map(|x| (0..q).map(move |y| (x, y)))
        .map(|(x, y)| format!("({},{})", x_label(f, x), f.label(Elem::from_index(y))))
        .collect();
    let mut circles = Vec::with_capacity(q * q * q);
    let mut nucleus = Vec::with_capacity(q * q * q);
    for a in f.elements() {
        for b in f.elements() {
            for c in f.elements() {
                let mut circle: Vec<usize> = f
                    .elements()
                    .map(|x| {
                        let y = f.add(f.mul(f.add(f.mul(a, x), b), x), c);
                        x.index() * q + y.index()
                    })
                    .collect();
                circle.push(q * q + a.index());
                circles.push(circle);
                nucleus.push(b.index());
            }
        }
    }
    let parallel = vec![(0..=q).map(|x| (0..q).map(|y| x * q + y).collect()).collect()];
    let mut g = CircleGeometry::from_parts(
        q,
        GeometryKind::Laguerre,
        Model::Polynomial,
        labels,
        circles,
        parallel,
        field.is_even().then_some(nucleus),
    );
    if field.is_even() {
        g.nucleus_points = Some(f.elements().map(|b| (format!("N({})", f.label(b)), None)).collect());
    }
    g
}

/// Graphs of the maps of PGL(2,q) on PG(1,q) × PG(1,q). PG(1,q) is F_q ∪ {∞}
/// with ∞ last; point (u, v) has index `u·(q+1) + v`. Maps x ↦ (ax+b)/(cx+d) are
/// taken with (a,b,c,d) normalized to a leading one, in lexicographic order.
pub fn minkowski_pgl_model(field: &Field) -> CircleGeometry {
    let q = field.order();
    let f = field;
    let inf = q;
    let labels = (0..=q)
        .flat_map(|u| (0..=q).map(move |v| (u, v)))
        .map(|(u, v)| format!("({},{})", x_label(f, u), x_label(f, v)))
        .collect();
    let ratio = |num: Elem, den: Elem| -> usize {
        if den.is_zero() {
            inf
        } else {
            f.div(num, den).unwrap().index()
        }
    };
    let mut circles = Vec::with_capacity((q - 1) * q * (q + 1));
    for m in 0..q.pow(4) {
        let v: [Elem; 4] = std::array::from_fn(|i| Elem::from_index(m / q.pow(3 - i as u32) % q));
        let lead = v.iter().find(|e| !e.is_zero());
        if lead != Some(&Elem::ONE) {
            continue;
        }
        let [a, b, c, d] = v;
        if f.sub(f.mul(a, d), f.mul(b, c)).is_zero() {
            continue;
        }
        let mut circle: Vec<usize> = f
            .elements()
            .map(|x| {
                let img = ratio(f.add(f.mul(a, x), b), f.add(f.mul(c, x), d));
                x.index() * (q + 1) + img
            })
            .collect();
        circle.push(inf * (q + 1) + ratio(a, c));
        circles.push(circle);
    }
    let rows = (0..=q).map(|u| (0..=q).map(|v| u * (q + 1) + v).collect()).collect();
    let cols = (0..=q).map(|v| (0..=q).map(|u| u * (q + 1) + v).collect()).collect();
    CircleGeometry::from_parts(
        q,
        GeometryKind::Minkowski,
        Model::Pgl2,
        labels,
        circles,
        vec![rows, cols],
        None,
    )
}

/// Adds the nucleus points as a new parallel class and each circle's nucleus
/// to the circle. The new points get indices after the original ones.
pub fn laguerre_plus(g: &CircleGeometry) -> Result<CircleGeometry> {
    if g.kind != GeometryKind::Laguerre {
        return Err(Error::BadArguments(format!(
            "extension needs a Laguerre plane, got {}",
            g.kind.name()
        )));
    }
    if g.order % 2 == 1 {
        return Err(Error::WrongParity(g.order));
    }
    let nucleus = g
        .nucleus
        .as_ref()
        .ok_or_else(|| Error::ConstructionInvalid("no nucleus map".to_string()))?;
    let q = g.order;
    let n = g.num_points();
    let nps = g.nucleus_points.clone().unwrap_or_default();
    let mut labels = g.labels.clone();
    labels.extend((0..q).map(|i| nps.get(i).map_or(format!("N{i}"), |x| x.0.clone())));
    let circles = g
        .circles
        .iter()
        .zip(nucleus)
        .map(|(c, &nu)| {
            let mut c = c.clone();
            c.push(n + nu);
            c
        })
        .collect();
    let mut classes = g.parallel[0].clone();
    classes.push((n..n + q).collect());
    let mut out = CircleGeometry::from_parts(
        q,
        GeometryKind::LaguerrePlus,
        g.model,
        labels,
        circles,
        vec![classes],
        Some(nucleus.clone()),
    );
    out.coords = g.coords.as_ref().map(|cs| {
        let mut cs = cs.clone();
        cs.extend(nps.iter().filter_map(|x| x.1));
        cs
    });
    out.nucleus_points = g.nucleus_points.clone();
    Ok(out)
}

/// Verifies that (s²,s,1,a) ↦ (s,a), (1,0,0,a) ↦ (∞,a) carries the circles of
/// the quadric-cone model onto those of the polynomial model, and returns the
/// point bijection (cone index → polynomial-model index).
pub fn build_isomorphism(cone: &CircleGeometry, poly: &CircleGeometry) -> Result<Vec<usize>> {
    let fail = |m: &str| Error::NotIsomorphicUnderCanonicalMap(m.to_string());
    if cone.model != Model::QuadricCone || poly.model != Model::Polynomial || cone.order != poly.order {
        return Err(fail("needs a quadric-cone model and a polynomial model of equal order"));
    }
    let q = cone.order;
    let f = Field::new(q)?;
    let coords = cone
        .coords
        .as_ref()
        .ok_or_else(|| fail("cone model without coordinates"))?;
    let mut map = Vec::with_capacity(coords.len());
    for v in coords.iter().take(cone.num_points()) {
        let image = if !v[2].is_zero() {
            let s = f.div(v[1], v[2])?;
            let a = f.div(v[3], v[2])?;
            if f.div(v[0], v[2])? != f.mul(s, s) {
                return Err(fail("point off the cone X0X2 = X1^2"));
            }
            s.index() * q + a.index()
        } else if v[0] == Elem::ONE && v[1].is_zero() {
            q * q + v[3].index()
        } else {
            return Err(fail("point off the cone X0X2 = X1^2"));
        };
        map.push(image);
    }
    let distinct: BTreeSet<usize> = map.iter().copied().collect();
    if distinct.len() != poly.num_points() || map.len() != poly.num_points() {
        return Err(fail("point map is not a bijection"));
    }
    let image: BTreeSet<Vec<usize>> = cone
        .circles
        .iter()
        .map(|c| {
            let mut d: Vec<usize> = c.iter().map(|&p| map[p]).collect();
            d.sort_unstable();
            d
        })
        .collect();
    let target: BTreeSet<Vec<usize>> = poly.circles.iter().cloned().collect();
    if image != target {
        return Err(fail("circles are not carried onto circles"));
    }
    Ok(map)
}

/// Result of checking the circle-geometry axioms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub three_points: bool,
    pub tangency: bool,
    pub parallel_transversal: bool,
    pub residues_affine: bool,
    pub witness: Option<String>,
}

impl AxiomReport {
    pub fn all_ok(&self) -> bool {
        self.three_points && self.tangency && self.parallel_transversal && self.residues_affine
    }
}

pub fn validate(g: &CircleGeometry) -> AxiomReport {
    let mut witness = None;
    let mut note = |w: String| {
        if witness.is_none() {
            witness = Some(w);
        }
    };
    let parallel_transversal = check_parallel(g).map_err(&mut note).is_ok();
    let three_points = check_three_points(g).map_err(&mut note).is_ok();
    let tangency = check_tangency(g).map_err(&mut note).is_ok();
    let residues_affine = check_residues(g).map_err(&mut note).is_ok();
    AxiomReport {
        three_points,
        tangency,
        parallel_transversal,
        residues_affine,
        witness,
    }
}

fn check_parallel(g: &CircleGeometry) -> std::result::Result<(), String> {
    let n = g.num_points();
    for (r, classes) in g.parallel.iter().enumerate() {
        let mut seen = vec![0usize; n];
        for class in classes {
            for &p in class {
                seen[p] += 1;
            }
        }
        if let Some(p) = seen.iter().position(|&s| s != 1) {
            return Err(format!("point {p} is in {} classes of relation {r}", seen[p]));
        }
        for ci in 0..g.circles.len() {
            for (k, class) in classes.iter().enumerate() {
                let m = class.iter().filter(|&&p| g.bits[ci].contains(p)).count();
                if m != 1 {
                    return Err(format!("circle {ci} meets class {k} of relation {r} in {m} points"));
                }
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            let k = g.class_of.iter().filter(|of| of[a] == of[b]).count();
            if k > 1 {
                return Err(format!("points {a},{b} are parallel in {k} relations"));
            }
        }
    }
    Ok(())
}

fn check_three_points(g: &CircleGeometry) -> std::result::Result<(), String> {
    let n = g.num_points();
    let mut count = vec![0u16; n * n * n];
    for c in &g.circles {
        for (i, &a) in c.iter().enumerate() {
            for (j, &b) in c.iter().enumerate().skip(i + 1) {
                for &d in &c[j + 1..] {
                    let cell = &mut count[(a * n + b) * n + d];
                    *cell = cell.saturating_add(1);
                }
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            if g.are_parallel(a, b) {
                continue;
            }
            for d in b + 1..n {
                if g.are_parallel(a, d) || g.are_parallel(b, d) {
                    continue;
                }
                let k = count[(a * n + b) * n + d];
                if k != 1 {
                    return Err(format!("points {a},{b},{d} lie on {k} circles"));
                }
            }
        }
    }
    Ok(())
}

fn check_tangency(g: &CircleGeometry) -> std::result::Result<(), String> {
    let n = g.num_points();
    let through: Vec<Vec<usize>> = (0..n).map(|p| g.circles_through(p)).collect();
    let mut cnt = vec![0usize; n];
    for (ci, c) in g.circles.iter().enumerate() {
        for &p in c {
            cnt.iter_mut().for_each(|x| *x = 0);
            for &d in &through[p] {
                if d != ci && g.meet(ci, d) == 1 {
                    for &x in &g.circles[d] {
                        cnt[x] += 1;
                    }
                }
            }
            for x in 0..n {
                if x == p || g.bits[ci].contains(x) || g.are_parallel(p, x) {
                    continue;
                }
                if cnt[x] != 1 {
                    return Err(format!("{} circles through {p} and {x} touch circle {ci}", cnt[x]));
                }
            }
        }
    }
    Ok(())
}

fn check_residues(g: &CircleGeometry) -> std::result::Result<(), String> {
    let q = g.order;
    let n = g.num_points();
    for p in 0..n {
        let pts = BitSet::from_indices(n, (0..n).filter(|&x| x != p && !g.are_parallel(p, x)));
        let mut lines: Vec<BitSet> = Vec::new();
        for c in g.circles_through(p) {
            let mut l = g.bits[c].clone();
            l.remove(p);
            lines.push(l);
        }
        for classes in &g.parallel {
            for class in classes {
                if class.contains(&p) {
                    continue;
                }
                let l = BitSet::from_indices(n, class.iter().copied().filter(|&x| pts.contains(x)));
                lines.push(l);
            }
        }
        if pts.count() != q * q {
            return Err(format!("residue at {p} has {} points", pts.count()));
        }
        if lines.len() != q * q + q {
            return Err(format!("residue at {p} has {} lines", lines.len()));
        }
        if let Some(l) = lines.iter().find(|l| l.count() != q) {
            return Err(format!("residue at {p} has a line of {} points", l.count()));
        }
        let mut pair = vec![0u8; n * n];
        let mut on: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (li, l) in lines.iter().enumerate() {
            let v = l.to_vec();
            for (i, &a) in v.iter().enumerate() {
                on[a].push(li);
                for &b in &v[i + 1..] {
                    pair[a * n + b] = pair[a * n + b].saturating_add(1);
                }
            }
        }
        let rv = pts.to_vec();
        for (i, &a) in rv.iter().enumerate() {
            for &b in &rv[i + 1..] {
                if pair[a * n + b] != 1 {
                    return Err(format!("residue at {p}: points {a},{b} on {} lines", pair[a * n + b]));
                }
            }
        }
        for (li, l) in lines.iter().enumerate() {
            for &x in &rv {
                if l.contains(x) {
                    continue;
                }
                let k = on[x].iter().filter(|&&m| lines[m].and_count(l) == 0).count();
                if k != 1 {
                    return Err(format!("residue at {p}: {k} parallels to line {li} through {x}"));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadset::{elliptic_quadric, hyperbolic_quadric, hyperoval_minus_point, oval_cone, quadric_cone};

    fn field(q: usize) -> Field {
        Field::new(q).unwrap()
    }

    fn check_counts(g: &CircleGeometry) {
        let (np, nc, classes, size) = expected_counts(g.kind(), g.order());
        assert_eq!(g.num_points(), np);
        assert_eq!(g.num_circles(), nc);
        assert_eq!(g.parallel().iter().map(|c| c.len()).collect::<Vec<_>>(), classes);
        assert!(g.circles().iter().all(|c| c.len() == size));
    }

    #[test]
    fn quadset_geometries() {
        let m = from_quadratic_set(&elliptic_quadric(&field(4)).unwrap()).unwrap();
        assert_eq!((m.num_points(), m.num_circles()), (17, 68));
        let l = from_quadratic_set(&quadric_cone(&field(3)).unwrap()).unwrap();
        assert_eq!((l.num_points(), l.num_circles()), (12, 27));
        let k = from_quadratic_set(&hyperbolic_quadric(&field(3)).unwrap()).unwrap();
        assert_eq!((k.num_points(), k.num_circles()), (16, 24));
        for g in [&m, &l, &k] {
            check_counts(g);
        }
    }

    #[test]
    fn algebraic_models() {
        let l = laguerre_polynomial_model(&field(3));
        assert_eq!((l.num_points(), l.num_circles()), (12, 27));
        let l2 = laguerre_polynomial_model(&field(2));
        assert_eq!((l2.num_points(), l2.num_circles()), (6, 8));
        let m3 = minkowski_pgl_model(&field(3));
        assert_eq!((m3.num_points(), m3.num_circles()), (16, 24));
        let m4 = minkowski_pgl_model(&field(4));
        assert_eq!((m4.num_points(), m4.num_circles()), (25, 60));
        for g in [&l, &l2, &m3, &m4] {
            check_counts(g);
        }
    }

    #[test]
    fn polynomial_circle_indexing() {
        let f = field(3);
        let g = laguerre_polynomial_model(&f);
        // circle c + bq + aq² is the graph of aX²+bX+c
        let (a, b, c) = (2usize, 1usize, 0usize);
        let idx = c + b * 3 + a * 9;
        let mut expect: Vec<usize> = (0..3usize).map(|x| x * 3 + (a * x * x + b * x + c) % 3).collect();
        expect.push(9 + a);
        expect.sort_unstable();
        assert_eq!(g.circle(idx), &expect[..]);
    }

    #[test]
    fn f_and_f_plus_one_meet_only_at_infinity() {
        let f = field(5);
        let g = laguerre_polynomial_model(&f);
        for a in 1..5 {
            for b in 0..5 {
                for c in 0..5 {
                    let i = c + 5 * b + 25 * a;
                    let j = (c + 1) % 5 + 5 * b + 25 * a;
                    assert_eq!(g.meet(i, j), 1);
                }
            }
        }
    }

    #[test]
    fn identity_misses_fixed_point_free_maps() {
        let f = field(3);
        let g = minkowski_pgl_model(&f);
        let diag: Vec<usize> = (0..4).map(|u| u * 4 + u).collect();
        let id = g.circles().iter().position(|c| *c == diag).unwrap();
        // x ↦ -1/x: 0 → ∞, 1 → 2, 2 → 1, ∞ → 0
        let sorted = vec![3, 4 + 2, 8 + 1, 12];
        let k = g.circles().iter().position(|c| *c == sorted).unwrap();
        assert_eq!(g.meet(id, k), 0);
    }

    #[test]
    fn per_point_circle_counts() {
        for q in [2, 3, 4, 5] {
            let f = field(q);
            let mut gs = vec![
                from_quadratic_set(&elliptic_quadric(&f).unwrap()).unwrap(),
                laguerre_polynomial_model(&f),
                minkowski_pgl_model(&f),
            ];
            gs.push(from_quadratic_set(&quadric_cone(&f).unwrap()).unwrap());
            for g in &gs {
                let r = g.parallel().len();
                for p in 0..g.num_points() {
                    assert_eq!(g.circles_through(p).len(), q * (q + 1 - r));
                }
            }
        }
    }

    #[test]
    fn validate_small() {
        for q in [2, 3, 4] {
            let f = field(q);
            for g in [
                from_quadratic_set(&elliptic_quadric(&f).unwrap()).unwrap(),
                from_quadratic_set(&quadric_cone(&f).unwrap()).unwrap(),
                laguerre_polynomial_model(&f),
                minkowski_pgl_model(&f),
                from_quadratic_set(&hyperbolic_quadric(&f).unwrap()).unwrap(),
            ] {
                let r = validate(&g);
                assert!(r.all_ok(), "q={q} {:?} {:?}", g.kind(), r);
            }
        }
    }

    #[test]
    fn corrupted_geometry_fails_three_point_axiom() {
        let g = from_quadratic_set(&elliptic_quadric(&field(4)).unwrap()).unwrap();
        let mut c = g.circle(0).to_vec();
        let outside = (0..g.num_points()).find(|p| !c.contains(p)).unwrap();
        c[0] = outside;
        let bad = g.with_circle(0, c);
        let r = validate(&bad);
        assert!(!r.three_points);
        assert!(r.witness.unwrap().contains("circles"));
    }

    #[test]
    fn laguerre_plus_structure() {
        for q in [2, 4, 8] {
            let f = field(q);
            for base in [
                from_quadratic_set(&quadric_cone(&f).unwrap()).unwrap(),
                laguerre_polynomial_model(&f),
            ] {
                let lp = laguerre_plus(&base).unwrap();
                check_counts(&lp);
                assert_eq!(
                    lp.parallel()[0].iter().map(|c| c.len()).collect::<Vec<_>>(),
                    vec![q; q + 2]
                );
                for i in 0..lp.num_circles() {
                    for j in i + 1..lp.num_circles() {
                        let m = lp.meet(i, j);
                        assert!(m == 0 || m == 2, "q={q} circles {i},{j} meet in {m}");
                    }
                }
            }
        }
        let odd = laguerre_polynomial_model(&field(3));
        assert_eq!(laguerre_plus(&odd).unwrap_err(), Error::WrongParity(3));
    }

    #[test]
    fn canonical_isomorphism() {
        for q in [2, 3, 4, 5] {
            let f = field(q);
            let cone = from_quadratic_set(&quadric_cone(&f).unwrap()).unwrap();
            let poly = laguerre_polynomial_model(&f);
            let map = build_isomorphism(&cone, &poly).unwrap();
            assert_eq!(map.len(), q * (q + 1));
            if q % 2 == 0 {
                // nucleus ids agree under the map
                let pn = poly.nucleus_map().unwrap();
                let index: HashMap<Vec<usize>, usize> = poly
                    .circles()
                    .iter()
                    .cloned()
                    .enumerate()
                    .map(|(i, c)| (c, i))
                    .collect();
                for (ci, c) in cone.circles().iter().enumerate() {
                    let mut d: Vec<usize> = c.iter().map(|&p| map[p]).collect();
                    d.sort_unstable();
                    assert_eq!(cone.nucleus_map().unwrap()[ci], pn[index[&d]]);
                }
            }
        }
        let f = field(4);
        let oc = from_quadratic_set(&oval_cone(&f, &hyperoval_minus_point(&f).unwrap()).unwrap()).unwrap();
        assert!(matches!(
            build_isomorphism(&oc, &laguerre_polynomial_model(&f)),
            Err(Error::NotIsomorphicUnderCanonicalMap(_))
        ));
    }

    #[test]
    fn doc_serializes() {
        let g = laguerre_polynomial_model(&field(2));
        let s = serde_json::to_string(&g.to_doc()).unwrap();
        assert!(s.starts_with("{\"order\":2,\"kind\":\"laguerre\""));
        assert!(s.contains("\"nucleus_map\""));
        let m = minkowski_pgl_model(&field(2));
        assert!(!serde_json::to_string(&m.to_doc()).unwrap().contains("nucleus_map"));
    }
}
