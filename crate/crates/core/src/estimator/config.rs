//! Experiment configuration and the per-sweep observables it names.

use serde::{Deserialize, Serialize};

use crate::connectivity::{link_event_unchecked, ArmProbe, ClusterLabeling};
use crate::error::{Error, Result};
use crate::exact::sha256_hex;
use crate::lattice::{BoundarySpec, DomainSpec, LatticeDomain, Point};
use crate::model::ModelParams;
use crate::patterns::LinkPattern;
use crate::sampler::BondConfiguration;
use crate::unionfind::UnionFind;

use super::stats::{DEFAULT_BATCHES, MIN_BATCHES};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FkParams {
    pub p: f64,
    pub q: f64,
}

/// One measured quantity. Each expands to one or more CSV columns; a
/// column value is the fraction of placements on which the event holds.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservableSpec {
    /// z ↔ ∂B_R(z) for interior centers, one column per radius.
    OneArm { id: String, centers: Vec<Point>, radii: Vec<f64> },
    /// z ↔ ∂B_R(z) for boundary points.
    BoundaryArm { id: String, points: Vec<Point>, radii: Vec<f64> },
    /// z ↔ z + s·d, one column per separation s. With `centered` the pair
    /// is z − ⌊s/2⌋d, z + ⌈s/2⌉d instead.
    TwoPoint {
        id: String,
        bases: Vec<Point>,
        directions: Vec<Point>,
        separations: Vec<i64>,
        #[serde(default)]
        centered: bool,
    },
    /// Exact link pattern at each placement.
    Link { id: String, placements: Vec<Vec<Point>>, pattern: LinkPattern },
    /// Left-right crossing of the box by open edges inside it.
    Crossing { id: String, corners: [Point; 2] },
}

impl ObservableSpec {
    pub fn id(&self) -> &str {
        match self {
            ObservableSpec::OneArm { id, .. }
            | ObservableSpec::BoundaryArm { id, .. }
            | ObservableSpec::TwoPoint { id, .. }
            | ObservableSpec::Link { id, .. }
            | ObservableSpec::Crossing { id, .. } => id,
        }
    }

    /// Column names, `id@scale` for ladders.
    pub fn columns(&self) -> Vec<String> {
        let id = self.id();
        match self {
            ObservableSpec::OneArm { radii, .. } | ObservableSpec::BoundaryArm { radii, .. } => {
                radii.iter().map(|r| format!("{id}@{r}")).collect()
            }
            ObservableSpec::TwoPoint { separations, .. } => separations.iter().map(|s| format!("{id}@{s}")).collect(),
            ObservableSpec::Link { .. } | ObservableSpec::Crossing { .. } => vec![id.to_string()],
        }
    }
}

mod fields {
    use serde::Deserialize;

    use super::ObservableSpec;
    use crate::lattice::Point;
    use crate::patterns::LinkPattern;

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct OneArm {
        id: String,
        centers: Vec<Point>,
        radii: Vec<f64>,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct BoundaryArm {
        id: String,
        points: Vec<Point>,
        radii: Vec<f64>,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct TwoPoint {
        id: String,
        bases: Vec<Point>,
        directions: Vec<Point>,
        separations: Vec<i64>,
        #[serde(default)]
        centered: bool,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Link {
        id: String,
        placements: Vec<Vec<Point>>,
        pattern: LinkPattern,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Crossing {
        id: String,
        corners: [Point; 2],
    }

    impl From<OneArm> for ObservableSpec {
        fn from(f: OneArm) -> Self {
            ObservableSpec::OneArm { id: f.id, centers: f.centers, radii: f.radii }
        }
    }

    impl From<BoundaryArm> for ObservableSpec {
        fn from(f: BoundaryArm) -> Self {
            ObservableSpec::BoundaryArm { id: f.id, points: f.points, radii: f.radii }
        }
    }

    impl From<TwoPoint> for ObservableSpec {
        fn from(f: TwoPoint) -> Self {
            ObservableSpec::TwoPoint { id: f.id, bases: f.bases, directions: f.directions, separations: f.separations, centered: f.centered }
        }
    }

    impl From<Link> for ObservableSpec {
        fn from(f: Link) -> Self {
            ObservableSpec::Link { id: f.id, placements: f.placements, pattern: f.pattern }
        }
    }

    impl From<Crossing> for ObservableSpec {
        fn from(f: Crossing) -> Self {
            ObservableSpec::Crossing { id: f.id, corners: f.corners }
        }
    }
}

const KINDS: &[&str] = &["one_arm", "boundary_arm", "two_point", "link", "crossing"];

fn spec_from<'de, D: serde::Deserializer<'de>>(kind: &str, de: D) -> std::result::Result<ObservableSpec, D::Error> {
    use serde::de::Error as _;
    Ok(match kind {
        "one_arm" => fields::OneArm::deserialize(de)?.into(),
        "boundary_arm" => fields::BoundaryArm::deserialize(de)?.into(),
        "two_point" => fields::TwoPoint::deserialize(de)?.into(),
        "link" => fields::Link::deserialize(de)?.into(),
        "crossing" => fields::Crossing::deserialize(de)?.into(),
        other => return Err(D::Error::unknown_variant(other, KINDS)),
    })
}

// Streams the remaining fields when `kind` comes first so that errors keep
// their position and field name; otherwise buffers the object.
impl<'de> Deserialize<'de> for ObservableSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> serde::de::Visitor<'de> for V {
            type Value = ObservableSpec;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("an observable object with a `kind` field")
            }

            fn visit_map<A: serde::de::MapAccess<'de>>(self, mut map: A) -> std::result::Result<ObservableSpec, A::Error> {
                use serde::de::Error as _;
                let Some(first) = map.next_key::<String>()? else {
                    return Err(A::Error::missing_field("kind"));
                };
                if first == "kind" {
                    let kind: String = map.next_value()?;
                    return spec_from(&kind, serde::de::value::MapAccessDeserializer::new(map));
                }
                let mut obj = serde_json::Map::new();
                obj.insert(first, map.next_value()?);
                while let Some((k, v)) = map.next_entry::<String, serde_json::Value>()? {
                    obj.insert(k, v);
                }
                let kind = match obj.remove("kind") {
                    Some(serde_json::Value::String(k)) => k,
                    Some(_) => return Err(A::Error::custom("`kind` must be a string")),
                    None => return Err(A::Error::missing_field("kind")),
                };
                spec_from(&kind, serde_json::Value::Object(obj)).map_err(A::Error::custom)
            }
        }
        de.deserialize_map(V)
    }
}

/// Split `id@scale` into its parts.
pub fn parse_column(name: &str) -> Option<(&str, f64)> {
    let (id, s) = name.rsplit_once('@')?;
    Some((id, s.parse().ok()?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub domain: DomainSpec,
    #[serde(default = "BoundarySpec::free")]
    pub bc: BoundarySpec,
    /// Critical FK-Ising when absent.
    #[serde(default)]
    pub params: Option<FkParams>,
    pub observables: Vec<ObservableSpec>,
    pub sweeps: u64,
    #[serde(default)]
    pub burn_in: u64,
    #[serde(default = "one")]
    pub thin: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub chains: u64,
    #[serde(default = "default_batches")]
    pub batches: usize,
}

fn one() -> u64 {
    1
}

fn default_batches() -> usize {
    DEFAULT_BATCHES
}

fn check_ladder(id: &str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() || xs.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::Config(format!("{id}: scales must be positive and non-empty")));
    }
    if xs.len() >= 2 {
        let q = xs[1] / xs[0];
        if !(q > 1.0) || xs.windows(2).any(|w| ((w[1] / w[0]) / q - 1.0).abs() > 1e-9) {
            return Err(Error::Config(format!("{id}: scales {xs:?} are not an increasing geometric ladder")));
        }
    }
    Ok(())
}

/// Distances from `p` to the four sides of the domain's bounding box.
fn side_gaps(domain: &LatticeDomain, p: Point) -> [f64; 4] {
    let (lo, hi) = domain.bounds();
    let a = domain.mesh();
    [p[0] - lo[0], hi[0] - p[0], p[1] - lo[1], hi[1] - p[1]].map(|d| d as f64 * a)
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            let (line, col) = (inner.line(), inner.column());
            let msg = inner.to_string();
            let msg = msg.strip_suffix(&format!(" at line {line} column {col}")).unwrap_or(&msg);
            Error::Config(format!("{msg} at line {line} column {col} (field `{}`)", e.path()))
        })?;
        Ok(cfg)
    }

    /// sha256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        match self.params {
            None => Ok(ModelParams::critical()),
            Some(FkParams { p, q }) => ModelParams::fk(p, q),
        }
    }

    pub fn columns(&self) -> Vec<String> {
        self.observables.iter().flat_map(|o| o.columns()).collect()
    }

    /// Check the config against its domain and build the probes.
    pub fn compile(&self) -> Result<(LatticeDomain, Vec<Probe>)> {
        if self.sweeps == 0 || self.thin == 0 || self.chains == 0 {
            return Err(Error::Config("sweeps, thin and chains must be at least 1".into()));
        }
        if self.batches < MIN_BATCHES {
            return Err(Error::Config(format!("batches must be at least {MIN_BATCHES}")));
        }
        if self.sweeps < self.batches as u64 {
            return Err(Error::Config(format!("{} sweeps cannot fill {} batches", self.sweeps, self.batches)));
        }
        if self.observables.is_empty() {
            return Err(Error::Config("no observables".into()));
        }
        let mut ids = std::collections::HashSet::new();
        for o in &self.observables {
            if o.id().is_empty() || o.id().contains([',', '@', '\n']) {
                return Err(Error::Config(format!("bad observable id {:?}", o.id())));
            }
            if !ids.insert(o.id()) {
                return Err(Error::Config(format!("duplicate observable id {}", o.id())));
            }
        }
        self.model_params()?.validate()?;
        let domain = self.domain.build()?;
        self.bc.resolve(&domain)?;
        let probes = self.observables.iter().map(|o| Probe::compile(&domain, o)).collect::<Result<Vec<_>>>()?;
        Ok((domain, probes))
    }
}

/// Compiled observable.
#[derive(Clone, Debug)]
pub enum Probe {
    /// one probe per (column, placement)
    Arms(Vec<Vec<ArmProbe>>),
    Pairs(Vec<Vec<(u32, u32)>>),
    Link(Vec<Vec<u32>>, LinkPattern),
    Crossing(CrossingProbe),
}

impl Probe {
    fn compile(domain: &LatticeDomain, spec: &ObservableSpec) -> Result<Self> {
        let site = |p: Point| {
            domain.index_of(p).ok_or_else(|| Error::InvalidPoint(format!("{}: {p:?} is not a vertex of the domain", spec.id())))
        };
        match spec {
            ObservableSpec::OneArm { id, centers, radii } | ObservableSpec::BoundaryArm { id, points: centers, radii } => {
                check_ladder(id, radii)?;
                let interior = matches!(spec, ObservableSpec::OneArm { .. });
                let rmax = radii[radii.len() - 1];
                for &c in centers {
                    let i = site(c)?;
                    if !interior && !domain.is_boundary(i) {
                        return Err(Error::Config(format!("{id}: {c:?} is not a boundary vertex")));
                    }
                    // sides through the point itself are exempt for boundary arms
                    let gaps = side_gaps(domain, c);
                    if gaps.iter().any(|&g| (interior || g > 0.0) && g < 2.0 * rmax) {
                        return Err(Error::Config(format!("{id}: {c:?} is closer than 2R = {} to the boundary", 2.0 * rmax)));
                    }
                }
                let cols = radii
                    .iter()
                    .map(|&r| centers.iter().map(|&c| ArmProbe::one_arm(domain, c, r)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                Ok(Probe::Arms(cols))
            }
            ObservableSpec::TwoPoint { id, bases, directions, separations, centered } => {
                check_ladder(id, &separations.iter().map(|&s| s as f64).collect::<Vec<_>>())?;
                if bases.is_empty() || directions.is_empty() {
                    return Err(Error::Config(format!("{id}: needs bases and directions")));
                }
                let cols = separations
                    .iter()
                    .map(|&s| {
                        let mut v = Vec::new();
                        for &b in bases {
                            for &d in directions {
                                let back = if *centered { s / 2 } else { 0 };
                                let fwd = s - back;
                                v.push((site([b[0] - back * d[0], b[1] - back * d[1]])?, site([b[0] + fwd * d[0], b[1] + fwd * d[1]])?));
                            }
                        }
                        Ok(v)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Probe::Pairs(cols))
            }
            ObservableSpec::Link { id, placements, pattern } => {
                let pattern = pattern.clone().for_connection()?;
                if placements.is_empty() {
                    return Err(Error::Config(format!("{id}: no placements")));
                }
                let pl = placements
                    .iter()
                    .map(|pts| {
                        if pts.len() != pattern.n() {
                            return Err(Error::Config(format!("{id}: {} points for a pattern on {}", pts.len(), pattern.n())));
                        }
                        pts.iter().map(|&p| site(p)).collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Probe::Link(pl, pattern))
            }
            ObservableSpec::Crossing { corners, .. } => Ok(Probe::Crossing(CrossingProbe::new(domain, *corners)?)),
        }
    }

    pub fn num_columns(&self) -> usize {
        match self {
            Probe::Arms(c) => c.len(),
            Probe::Pairs(c) => c.len(),
            Probe::Link(..) | Probe::Crossing(_) => 1,
        }
    }

    /// Append this probe's column values for one configuration.
    pub fn measure(&self, labels: &ClusterLabeling, bonds: &BondConfiguration, out: &mut Vec<f64>) {
        let frac = |hits: usize, n: usize| hits as f64 / n as f64;
        match self {
            Probe::Arms(cols) => {
                out.extend(cols.iter().map(|c| frac(c.iter().filter(|p| p.eval(labels)).count(), c.len())));
            }
            Probe::Pairs(cols) => {
                out.extend(cols.iter().map(|c| frac(c.iter().filter(|&&(a, b)| labels.connected(a, b)).count(), c.len())));
            }
            Probe::Link(pl, q) => {
                out.push(frac(pl.iter().filter(|p| link_event_unchecked(labels, p, q)).count(), pl.len()));
            }
            Probe::Crossing(c) => out.push(if c.eval(bonds.as_slice()) { 1.0 } else { 0.0 }),
        }
    }
}

/// Left-right crossing of a sub-box using only the edges inside it.
#[derive(Clone, Debug)]
pub struct CrossingProbe {
    /// (global edge index, local endpoints)
    edges: Vec<(usize, u32, u32)>,
    left: Vec<u32>,
    right: Vec<u32>,
    n: usize,
}

impl CrossingProbe {
    pub fn new(domain: &LatticeDomain, corners: [Point; 2]) -> Result<Self> {
        let [lo, hi] = corners;
        if lo[0] >= hi[0] || lo[1] > hi[1] {
            return Err(Error::InvalidGeometry(format!("crossing box {corners:?} is empty")));
        }
        let w = (hi[0] - lo[0] + 1) as usize;
        let local = |p: Point| ((p[1] - lo[1]) as usize * w + (p[0] - lo[0]) as usize) as u32;
        let inside = |p: Point| p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1];
        for y in lo[1]..=hi[1] {
            for x in lo[0]..=hi[0] {
                if domain.index_of([x, y]).is_none() {
                    return Err(Error::InvalidGeometry(format!("crossing box leaves the domain at {:?}", [x, y])));
                }
            }
        }
        let mut edges = Vec::new();
        for (e, &[a, b]) in domain.edges().iter().enumerate() {
            let (pa, pb) = (domain.site(a), domain.site(b));
            if inside(pa) && inside(pb) {
                edges.push((e, local(pa), local(pb)));
            }
        }
        let h = (hi[1] - lo[1] + 1) as usize;
        Ok(Self {
            edges,
            left: (lo[1]..=hi[1]).map(|y| local([lo[0], y])).collect(),
            right: (lo[1]..=hi[1]).map(|y| local([hi[0], y])).collect(),
            n: w * h,
        })
    }

    /// Global edge indices the event depends on.
    pub fn edge_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().map(|e| e.0)
    }

    pub fn eval(&self, open: &[bool]) -> bool {
        let mut uf = UnionFind::new(self.n);
        for &(e, a, b) in &self.edges {
            if open[e] {
                uf.union(a, b);
            }
        }
        let left: std::collections::HashSet<u32> = self.left.iter().map(|&l| uf.find(l)).collect();
        self.right.iter().any(|&r| left.contains(&uf.find(r)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "domain": {"shape_tag": "box", "mesh": 1.0, "corners": [[0, 0], [40, 40]]},
        "observables": [{"kind": "one_arm", "id": "arm", "centers": [[20, 20]], "radii": [2, 4, 8]}],
        "sweeps": 100
    }"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_json(BASE).unwrap();
        assert_eq!((c.thin, c.chains, c.batches), (1, 1, 32));
        assert_eq!(c.columns(), vec!["arm@2", "arm@4", "arm@8"]);
        let (_, probes) = c.compile().unwrap();
        assert_eq!(probes[0].num_columns(), 3);
        assert_eq!(parse_column("arm@8"), Some(("arm", 8.0)));
    }

    #[test]
    fn missing_field_names_path() {
        let err = ExperimentConfig::from_json(r#"{"observables": [], "sweeps": 1}"#).unwrap_err();
        assert!(err.to_string().contains("domain"), "{err}");
        let err = ExperimentConfig::from_json(
            r#"{"domain": {"shape_tag": "box", "mesh": 1.0, "corners": [[0,0],[4,4]]},
                "observables": [{"kind": "one_arm", "id": "a", "centres": [], "radii": []}], "sweeps": 1}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("observables[0]"), "{err}");
    }

    #[test]
    fn observable_errors_keep_field_and_line() {
        let text = BASE.replace(r#""radii": [2, 4, 8]"#, r#""radii": "wide""#);
        let err = ExperimentConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("observables[0].radii") && err.contains("line 3"), "{err}");
        assert_eq!(err.matches("at line").count(), 1, "{err}");
        // kind out of order still parses
        let moved = BASE.replace(r#"{"kind": "one_arm", "id": "arm","#, r#"{"id": "arm", "kind": "one_arm","#);
        assert_eq!(ExperimentConfig::from_json(&moved).unwrap(), ExperimentConfig::from_json(BASE).unwrap());
        let unknown = BASE.replace("one_arm", "three_arm");
        assert!(ExperimentConfig::from_json(&unknown).unwrap_err().to_string().contains("three_arm"));
        let c = ExperimentConfig::from_json(BASE).unwrap();
        assert_eq!(ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap(), c);
    }

    #[test]
    fn ladder_and_margin_rules() {
        let mut c = ExperimentConfig::from_json(BASE).unwrap();
        c.observables[0] = ObservableSpec::OneArm { id: "a".into(), centers: vec![[20, 20]], radii: vec![2.0, 4.0, 7.0] };
        assert!(matches!(c.compile(), Err(Error::Config(_))));
        c.observables[0] = ObservableSpec::OneArm { id: "a".into(), centers: vec![[10, 20]], radii: vec![4.0, 8.0] };
        assert!(matches!(c.compile(), Err(Error::Config(_))));
        c.observables[0] = ObservableSpec::BoundaryArm { id: "a".into(), points: vec![[20, 0]], radii: vec![4.0, 8.0] };
        c.compile().unwrap();
        c.observables[0] = ObservableSpec::BoundaryArm { id: "a".into(), points: vec![[20, 1]], radii: vec![4.0, 8.0] };
        assert!(matches!(c.compile(), Err(Error::Config(_))));
    }

    #[test]
    fn crossing_probe() {
        let d = crate::lattice::build_box(1.0, [[0.0, 0.0], [3.0, 3.0]]).unwrap();
        let p = CrossingProbe::new(&d, [[1, 1], [2, 2]]).unwrap();
        assert_eq!(p.edge_indices().count(), 4);
        let mut open = vec![false; d.num_edges()];
        assert!(!p.eval(&open));
        let e = d.edge_between(d.index_of([1, 2]).unwrap(), d.index_of([2, 2]).unwrap()).unwrap();
        open[e as usize] = true;
        assert!(p.eval(&open));
    }
}
