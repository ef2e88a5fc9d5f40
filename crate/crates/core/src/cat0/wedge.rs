//! Wedge spaces: model leaves glued at hub points along a tree.

use rand::Rng;

use super::leaf::Leaf;
use crate::error::{invalid, LabError, Result};

type P = [f64; 2];

/// Point of a wedge space: a leaf index and coordinates in that leaf.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointRef {
    pub leaf: usize,
    pub coords: [f64; 2],
}

impl PointRef {
    pub fn new(leaf: usize, x: f64, y: f64) -> Self {
        PointRef { leaf, coords: [x, y] }
    }
}

/// A hub identifies one marked point in each incident leaf.
#[derive(Clone, Debug, PartialEq)]
pub struct Hub {
    pub incidences: Vec<(usize, [f64; 2])>,
}

#[derive(Clone, Debug, PartialEq)]
struct Route {
    /// Marked point where a path leaves the start leaf.
    exit: P,
    /// Hub-to-hub legs `(leaf, from, to)` through intermediate leaves.
    middle: Vec<(usize, P, P)>,
    /// Marked point where the path enters the final leaf.
    entry: P,
    middle_length: f64,
}

/// Leaves glued at hubs; the incidence graph must be a tree.
#[derive(Clone, Debug, PartialEq)]
pub struct WedgeSpace {
    leaves: Vec<Leaf>,
    hubs: Vec<Hub>,
    routes: Vec<Vec<Option<Route>>>,
}

impl WedgeSpace {
    pub fn new(leaves: Vec<Leaf>, hubs: Vec<Hub>) -> Result<Self> {
        if leaves.is_empty() {
            return Err(invalid("a wedge space needs at least one leaf"));
        }
        if let Some(Leaf::Ray { length: Some(l) }) =
            leaves.iter().find(|l| matches!(l, Leaf::Ray { length: Some(x) } if !(*x > 0.0)))
        {
            return Err(invalid(format!("segment length must be positive, got {l}")));
        }
        let nl = leaves.len();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nl];
        let mut edges = 0;
        for (h, hub) in hubs.iter().enumerate() {
            if hub.incidences.len() < 2 {
                return Err(invalid(format!("hub {h} must join at least two leaves")));
            }
            for &(leaf, p) in &hub.incidences {
                let l = leaves
                    .get(leaf)
                    .ok_or_else(|| LabError::InvalidRef(format!("hub {h} refers to leaf {leaf}")))?;
                l.check(p)?;
                if adj[leaf].iter().any(|&(g, _)| g == h) {
                    return Err(invalid(format!("hub {h} meets leaf {leaf} twice")));
                }
                if adj[leaf].iter().any(|&(g, k)| {
                    let q = hubs[g].incidences[k].1;
                    q == p
                }) {
                    return Err(invalid(format!("leaf {leaf} has two hubs at {p:?}")));
                }
                let k = hub.incidences.iter().position(|x| x.0 == leaf && x.1 == p).unwrap_or(0);
                adj[leaf].push((h, k));
                edges += 1;
            }
        }
        if edges + 1 != nl + hubs.len() {
            return Err(invalid("the gluing graph is not a tree"));
        }
        let mut space = WedgeSpace { leaves, hubs, routes: Vec::new() };
        space.routes = (0..nl).map(|i| space.routes_from(i, &adj)).collect::<Result<_>>()?;
        Ok(space)
    }

    fn routes_from(&self, start: usize, adj: &[Vec<(usize, usize)>]) -> Result<Vec<Option<Route>>> {
        let nl = self.leaves.len();
        // Breadth-first search over leaves, remembering the hub and marked points used.
        let mut prev: Vec<Option<(usize, usize, P, P)>> = vec![None; nl];
        let mut seen = vec![false; nl];
        seen[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(l) = queue.pop_front() {
            for &(h, _) in &adj[l] {
                let hub = &self.hubs[h];
                let here = hub.incidences.iter().find(|x| x.0 == l).map(|x| x.1).unwrap_or([0.0; 2]);
                for &(m, p) in &hub.incidences {
                    if !seen[m] {
                        seen[m] = true;
                        prev[m] = Some((l, h, here, p));
                        queue.push_back(m);
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(invalid("the gluing graph is not connected"));
        }
        let mut out = vec![None; nl];
        for (target, slot) in out.iter_mut().enumerate() {
            if target == start {
                continue;
            }
            // Walk back: collect (leaf, arrival point, departure point of previous leaf).
            let mut steps = Vec::new();
            let mut cur = target;
            while let Some((from, _, from_pt, to_pt)) = prev[cur] {
                steps.push((from, from_pt, cur, to_pt));
                cur = from;
            }
            steps.reverse();
            let exit = steps[0].1;
            let entry = steps[steps.len() - 1].3;
            let mut middle = Vec::new();
            for w in steps.windows(2) {
                let (leaf, arrive, depart) = (w[0].2, w[0].3, w[1].1);
                middle.push((leaf, arrive, depart));
            }
            let middle_length = middle.iter().map(|&(l, a, b)| self.leaves[l].distance(a, b)).sum();
            *slot = Some(Route { exit, middle, entry, middle_length });
        }
        Ok(out)
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn hubs(&self) -> &[Hub] {
        &self.hubs
    }

    /// Hub points, one reference per hub (in its first incident leaf).
    pub fn hub_points(&self) -> Vec<PointRef> {
        self.hubs
            .iter()
            .map(|h| PointRef { leaf: h.incidences[0].0, coords: h.incidences[0].1 })
            .collect()
    }

    /// Marked points of `leaf`.
    pub fn marked_points(&self, leaf: usize) -> Vec<P> {
        self.hubs
            .iter()
            .flat_map(|h| h.incidences.iter().filter(|x| x.0 == leaf).map(|x| x.1))
            .collect()
    }

    pub fn check(&self, x: &PointRef) -> Result<()> {
        self.leaves
            .get(x.leaf)
            .ok_or_else(|| LabError::InvalidRef(format!("leaf {} does not exist", x.leaf)))?
            .check(x.coords)
    }

    /// `(a, k)` such that `d(x, z) = d_leaf(x, a) + k` for every `x` in `leaf`.
    pub fn anchor(&self, leaf: usize, z: &PointRef) -> (P, f64) {
        if z.leaf == leaf {
            return (z.coords, 0.0);
        }
        let r = self.routes[leaf][z.leaf].as_ref().expect("routes cover all leaf pairs");
        (r.exit, r.middle_length + self.leaves[z.leaf].distance(r.entry, z.coords))
    }

    pub fn distance(&self, x: &PointRef, y: &PointRef) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        let (a, k) = self.anchor(x.leaf, y);
        Ok(self.leaves[x.leaf].distance(x.coords, a) + k)
    }

    /// Point at fraction `t` of the geodesic from `x` to `y`.
    pub fn geodesic(&self, x: &PointRef, y: &PointRef, t: f64) -> Result<PointRef> {
        self.check(x)?;
        self.check(y)?;
        if !(0.0..=1.0).contains(&t) {
            return Err(invalid(format!("t must lie in [0, 1], got {t}")));
        }
        let legs: Vec<(usize, P, P)> = if x.leaf == y.leaf {
            vec![(x.leaf, x.coords, y.coords)]
        } else {
            let r = self.routes[x.leaf][y.leaf].as_ref().expect("routes cover all leaf pairs");
            let mut v = vec![(x.leaf, x.coords, r.exit)];
            v.extend(r.middle.iter().copied());
            v.push((y.leaf, r.entry, y.coords));
            v
        };
        let lens: Vec<f64> = legs.iter().map(|&(l, a, b)| self.leaves[l].distance(a, b)).collect();
        let total: f64 = lens.iter().sum();
        let mut target = t * total;
        for (i, &(l, a, b)) in legs.iter().enumerate() {
            let last = i + 1 == legs.len();
            if target <= lens[i] || last {
                let f = if lens[i] > 0.0 { (target / lens[i]).min(1.0) } else { 0.0 };
                return Ok(PointRef { leaf: l, coords: self.leaves[l].geodesic(a, b, f) });
            }
            target -= lens[i];
        }
        unreachable!("legs are never empty")
    }

    /// Random point: uniform leaf, then a point within `scale` of the leaf's origin.
    pub fn random_point<R: Rng>(&self, rng: &mut R, scale: f64) -> PointRef {
        let leaf = rng.gen_range(0..self.leaves.len());
        PointRef { leaf, coords: random_in_leaf(&self.leaves[leaf], [0.0, 0.0], rng, scale) }
    }

    /// Random point within distance `scale` of `x`, in any leaf through `x`.
    pub fn perturb<R: Rng>(&self, x: &PointRef, rng: &mut R, scale: f64) -> PointRef {
        let mut options = vec![*x];
        for h in &self.hubs {
            if h.incidences.iter().any(|&(l, p)| l == x.leaf && p == x.coords) {
                options.extend(h.incidences.iter().map(|&(l, p)| PointRef { leaf: l, coords: p }));
            }
        }
        let base = options[rng.gen_range(0..options.len())];
        PointRef {
            leaf: base.leaf,
            coords: random_in_leaf(&self.leaves[base.leaf], base.coords, rng, scale),
        }
    }
}

fn random_in_leaf<R: Rng>(leaf: &Leaf, base: P, rng: &mut R, scale: f64) -> P {
    let r = scale * rng.gen::<f64>();
    let th = std::f64::consts::TAU * rng.gen::<f64>();
    match leaf {
        Leaf::Ray { .. } => {
            let s = if rng.gen::<bool>() { r } else { -r };
            leaf.exp(base, [s, 0.0])
        }
        _ => leaf.exp(base, [r * th.cos(), r * th.sin()]),
    }
}

/// Finite weighted point masses.
#[derive(Clone, Debug, PartialEq)]
pub struct PointedMeasure {
    pub masses: Vec<(PointRef, f64)>,
}

impl PointedMeasure {
    pub fn new(masses: Vec<(PointRef, f64)>) -> Result<Self> {
        if masses.is_empty() {
            return Err(invalid("measure has no masses"));
        }
        if let Some((_, w)) = masses.iter().find(|(_, w)| !(*w > 0.0) || !w.is_finite()) {
            return Err(invalid(format!("weights must be positive, got {w}")));
        }
        Ok(PointedMeasure { masses })
    }

    /// Unit masses at the given points.
    pub fn uniform(points: &[PointRef]) -> Result<Self> {
        Self::new(points.iter().map(|&p| (p, 1.0)).collect())
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().map(|m| m.1).sum()
    }

    /// Parse `leaf,coord1,coord2,weight` rows; a non-numeric first row is a header.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut masses = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if i == 0 && f.first().is_some_and(|s| s.parse::<f64>().is_err()) {
                continue;
            }
            let err = |msg: String| LabError::Parse { line: i + 1, msg };
            if f.len() != 4 {
                return Err(err(format!("expected 4 fields, found {}", f.len())));
            }
            let leaf = f[0].parse::<usize>().map_err(|e| err(e.to_string()))?;
            let num = |s: &str| s.parse::<f64>().map_err(|e| err(e.to_string()));
            masses.push((PointRef::new(leaf, num(f[1])?, num(f[2])?), num(f[3])?));
        }
        Self::new(masses)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("leaf,coord1,coord2,weight\n");
        for (p, w) in &self.masses {
            s.push_str(&format!("{},{:.16e},{:.16e},{:.16e}\n", p.leaf, p.coords[0], p.coords[1], w));
        }
        s
    }
}

/// `B_mu(x) = sum w_i d(x, z_i)^2`.
pub fn leibniz(space: &WedgeSpace, mu: &PointedMeasure, x: &PointRef) -> Result<f64> {
    if mu.masses.is_empty() {
        return Err(invalid("measure has no masses"));
    }
    let mut s = 0.0;
    for (z, w) in &mu.masses {
        let d = space.distance(x, z)?;
        s += w * d * d;
    }
    Ok(s)
}

/// Both sides of the comparison inequality for `m = geodesic(b, c, t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Comparison {
    /// `d(a,m)^2 + d(m,b) d(c,m)`.
    pub lhs: f64,
    /// `d(a,b)^2 d(c,m)/d(b,c) + d(a,c)^2 d(b,m)/d(b,c)`.
    pub rhs: f64,
    pub holds: bool,
}

/// Check `d(a,m)^2 + d(m,b) d(c,m) <= d(a,b)^2 d(c,m)/d(b,c) + d(a,c)^2 d(b,m)/d(b,c) + 1e-9`.
pub fn comparison_check(space: &WedgeSpace, a: &PointRef, b: &PointRef, c: &PointRef, t: f64) -> Result<bool> {
    Ok(comparison_sides(space, a, b, c, t)?.holds)
}

/// Both sides of the comparison inequality; `b = c` is reported as `0 <= 0`.
pub fn comparison_sides(
    space: &WedgeSpace,
    a: &PointRef,
    b: &PointRef,
    c: &PointRef,
    t: f64,
) -> Result<Comparison> {
    let bc = space.distance(b, c)?;
    space.check(a)?;
    if bc == 0.0 {
        return Ok(Comparison { lhs: 0.0, rhs: 0.0, holds: true });
    }
    let m = space.geodesic(b, c, t)?;
    let (am, bm, cm) = (space.distance(a, &m)?, space.distance(&m, b)?, space.distance(c, &m)?);
    let (ab, ac) = (space.distance(a, b)?, space.distance(a, c)?);
    let lhs = am * am + bm * cm;
    let rhs = ab * ab * cm / bc + ac * ac * bm / bc;
    Ok(Comparison { lhs, rhs, holds: lhs <= rhs + 1e-9 })
}

/// `(AM^2 + BM CM, AB^2 CM/BC + AC^2 BM/BC)` for `M` on segment `BC` in the plane.
pub fn euclid_median_identity(a: P, b: P, c: P, m: P) -> Result<(f64, f64)> {
    let d = |p: P, q: P| (p[0] - q[0]).hypot(p[1] - q[1]);
    let bc = d(b, c);
    if !(bc > 0.0) {
        return Err(invalid("B and C coincide"));
    }
    let (bm, cm) = (d(b, m), d(c, m));
    if (bm + cm - bc).abs() > 1e-9 * bc {
        return Err(invalid("M does not lie on segment BC"));
    }
    let (ab, ac, am) = (d(a, b), d(a, c), d(a, m));
    Ok((am * am + bm * cm, ab * ab * cm / bc + ac * ac * bm / bc))
}

/// Named fixtures used by tests and configs.
pub mod fixtures {
    use super::*;

    pub fn euclidean_plane() -> WedgeSpace {
        WedgeSpace::new(vec![Leaf::Euclidean], vec![]).expect("valid fixture")
    }

    pub fn hyperbolic_plane() -> WedgeSpace {
        WedgeSpace::new(vec![Leaf::Hyperbolic], vec![]).expect("valid fixture")
    }

    /// Three copies of `[0, length]` (or rays) glued at 0.
    pub fn tripod(length: Option<f64>) -> WedgeSpace {
        let leg = Leaf::Ray { length };
        WedgeSpace::new(
            vec![leg; 3],
            vec![Hub { incidences: vec![(0, [0.0; 2]), (1, [0.0; 2]), (2, [0.0; 2])] }],
        )
        .expect("valid fixture")
    }

    /// Two Euclidean planes glued at their origins.
    pub fn two_planes() -> WedgeSpace {
        WedgeSpace::new(
            vec![Leaf::Euclidean, Leaf::Euclidean],
            vec![Hub { incidences: vec![(0, [0.0; 2]), (1, [0.0; 2])] }],
        )
        .expect("valid fixture")
    }

    /// Planes `A - B - C`: `A` meets `B` at the origin of both, `C` meets `B` at `(gap, 0)`.
    pub fn chain(gap: f64) -> WedgeSpace {
        WedgeSpace::new(
            vec![Leaf::Euclidean; 3],
            vec![
                Hub { incidences: vec![(0, [0.0; 2]), (1, [0.0; 2])] },
                Hub { incidences: vec![(1, [gap, 0.0]), (2, [0.0; 2])] },
            ],
        )
        .expect("valid fixture")
    }

    /// A Euclidean and a hyperbolic plane glued at their origins.
    pub fn mixed_pair() -> WedgeSpace {
        WedgeSpace::new(
            vec![Leaf::Euclidean, Leaf::Hyperbolic],
            vec![Hub { incidences: vec![(0, [0.0; 2]), (1, [0.0; 2])] }],
        )
        .expect("valid fixture")
    }

    /// Look up a fixture by name.
    pub fn by_name(name: &str) -> Result<WedgeSpace> {
        Ok(match name {
            "euclidean" => euclidean_plane(),
            "hyperbolic" => hyperbolic_plane(),
            "tripod" => tripod(Some(1.0)),
            "tripod_rays" => tripod(None),
            "two_planes" => two_planes(),
            "chain" => chain(2.0),
            "mixed" => mixed_pair(),
            _ => return Err(invalid(format!("unknown wedge fixture {name:?}"))),
        })
    }

    pub const NAMES: [&str; 7] =
        ["euclidean", "hyperbolic", "tripod", "tripod_rays", "two_planes", "chain", "mixed"];
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn distance_examples() {
        let e = euclidean_plane();
        assert_eq!(e.distance(&PointRef::new(0, 0.0, 0.0), &PointRef::new(0, 3.0, 4.0)).unwrap(), 5.0);
        let two = two_planes();
        assert_eq!(two.distance(&PointRef::new(0, 1.0, 0.0), &PointRef::new(1, 1.0, 0.0)).unwrap(), 2.0);
        let ch = chain(2.0);
        let d = ch.distance(&PointRef::new(0, 0.0, 1.0), &PointRef::new(2, -1.0, 0.0)).unwrap();
        assert_eq!(d, 4.0);
        assert_eq!(ch.distance(&PointRef::new(2, -1.0, 0.0), &PointRef::new(0, 0.0, 1.0)).unwrap(), 4.0);
    }

    #[test]
    fn geodesic_examples() {
        let e = euclidean_plane();
        let m = e.geodesic(&PointRef::new(0, -1.0, 0.0), &PointRef::new(0, 1.0, 0.0), 0.5).unwrap();
        assert_eq!(m, PointRef::new(0, 0.0, 0.0));
        let two = two_planes();
        let m = two.geodesic(&PointRef::new(0, 1.0, 0.0), &PointRef::new(1, 0.0, 1.0), 0.5).unwrap();
        assert_eq!(two.distance(&m, &PointRef::new(1, 0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn rejects_cycles_and_bad_refs() {
        let bad = WedgeSpace::new(
            vec![Leaf::Euclidean, Leaf::Euclidean],
            vec![
                Hub { incidences: vec![(0, [0.0; 2]), (1, [0.0; 2])] },
                Hub { incidences: vec![(0, [1.0, 0.0]), (1, [1.0, 0.0])] },
            ],
        );
        assert!(bad.is_err());
        let disconnected = WedgeSpace::new(vec![Leaf::Euclidean, Leaf::Euclidean], vec![]);
        assert!(disconnected.is_err());
        let e = euclidean_plane();
        assert!(matches!(
            e.distance(&PointRef::new(3, 0.0, 0.0), &PointRef::new(0, 0.0, 0.0)),
            Err(LabError::InvalidRef(_))
        ));
    }

    #[test]
    fn median_identity_examples() {
        let (l, r) = euclid_median_identity([0.0, 1.0], [-1.0, 0.0], [1.0, 0.0], [0.0, 0.0]).unwrap();
        assert!((l - 2.0).abs() < 1e-15 && (r - 2.0).abs() < 1e-15);
        let (l, r) = euclid_median_identity([0.3, 2.0], [-1.0, 0.5], [1.0, 0.0], [-1.0, 0.5]).unwrap();
        assert!((l - r).abs() < 1e-14);
        assert!(euclid_median_identity([0.0; 2], [1.0, 1.0], [1.0, 1.0], [1.0, 1.0]).is_err());
    }

    #[test]
    fn comparison_in_one_euclidean_leaf_is_equality() {
        let e = euclidean_plane();
        let c = comparison_sides(
            &e,
            &PointRef::new(0, 0.3, 2.0),
            &PointRef::new(0, -1.0, 0.5),
            &PointRef::new(0, 2.0, -0.1),
            0.37,
        )
        .unwrap();
        assert!((c.lhs - c.rhs).abs() < 1e-12 * c.rhs);
    }

    #[test]
    fn measure_csv_round_trip() {
        let mu = PointedMeasure::new(vec![(PointRef::new(1, 0.25, -3.0), 2.0), (PointRef::new(0, 1e-3, 0.0), 0.5)])
            .unwrap();
        assert_eq!(PointedMeasure::from_csv(&mu.to_csv()).unwrap(), mu);
        assert!(PointedMeasure::from_csv("leaf,a,b,w\n0,1,2\n").is_err());
        assert!(PointedMeasure::new(vec![]).is_err());
    }

    #[test]
    fn leibniz_examples() {
        let e = euclidean_plane();
        let mu = PointedMeasure::uniform(&[PointRef::new(0, 1.0, 0.0), PointRef::new(0, -1.0, 0.0)]).unwrap();
        assert_eq!(leibniz(&e, &mu, &PointRef::new(0, 0.0, 0.0)).unwrap(), 2.0);
        let z = PointRef::new(0, 0.4, 0.1);
        let single = PointedMeasure::new(vec![(z, 3.0)]).unwrap();
        assert_eq!(leibniz(&e, &single, &z).unwrap(), 0.0);
    }
}
