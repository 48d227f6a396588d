//! Network case data: buses, series branches, injections and the per-unit
//! system, plus the case-file reader/writer and network variants.
//!
//! Case files are TOML with the sections `system`, `buses`, `branches`,
//! `injections` and an optional `regulation` list of Q-V contributions.
//! All electrical quantities are per unit on `system.base_mva`; `omega0`
//! is the nominal angular frequency in rad/s.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const IEEE9_TEXT: &str = include_str!("../../../fixtures/ieee9.case");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BusId(pub u32);

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBase {
    pub base_mva: f64,
    /// Nominal angular frequency, rad/s.
    pub omega0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: BusId,
    #[serde(default = "one")]
    pub v_nominal: f64,
    /// Shunt susceptance (capacitive positive), pu.
    #[serde(default)]
    pub shunt_b: f64,
    #[serde(default)]
    pub shunt_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Branch {
    pub from: BusId,
    pub to: BusId,
    #[serde(default)]
    pub r: f64,
    pub x: f64,
    /// Total line-charging susceptance, split half to each terminal.
    #[serde(default)]
    pub b_line: f64,
    /// Off-nominal turns ratio on the `from` side.
    #[serde(default = "one")]
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InjectionKind {
    #[serde(alias = "Slack", alias = "SLACK")]
    Slack,
    #[serde(alias = "PV")]
    Pv,
    #[serde(alias = "PQ")]
    Pq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Injection {
    pub bus: BusId,
    pub kind: InjectionKind,
    /// Active power injected into the network, pu.
    #[serde(default)]
    pub p: f64,
    #[serde(default)]
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_set: Option<f64>,
}

/// A device contribution `dQ = k_qv * dVn` at one bus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QvContribution {
    pub bus: BusId,
    pub k_qv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkCase {
    pub system: SystemBase,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub injections: Vec<Injection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub regulation: Vec<QvContribution>,
}

fn one() -> f64 {
    1.0
}

/// Network simplifications. `decoupled` only affects Jacobian-level
/// artifacts; it never changes the case or a state-space model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariantFlags {
    pub lossless: bool,
    pub no_shunt_b: bool,
    pub decoupled: bool,
}

impl VariantFlags {
    pub const BASE: VariantFlags = VariantFlags { lossless: false, no_shunt_b: false, decoupled: false };

    pub fn label(&self) -> String {
        let mut parts = vec![if self.lossless { "lossless" } else { "lossy" }];
        parts.push(if self.no_shunt_b { "without B" } else { "with B" });
        if self.decoupled {
            parts.push("decoupled");
        }
        parts.join(", ")
    }
}

/// Solved role of a bus after combining its injections.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BusRole {
    Slack,
    Pv,
    Pq,
}

/// Net injection specification at one bus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusSpec {
    pub role: BusRole,
    pub p: f64,
    pub q: f64,
    pub v_set: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Section {
    System,
    Buses,
    Branches,
    Injections,
    Regulation,
}

#[derive(Debug)]
enum IssueKind {
    Validation,
    Topology,
}

#[derive(Debug)]
struct Issue {
    kind: IssueKind,
    at: Option<(Section, usize)>,
    message: String,
}

impl Issue {
    fn validation(at: Option<(Section, usize)>, message: String) -> Self {
        Issue { kind: IssueKind::Validation, at, message }
    }

    fn topology(at: Option<(Section, usize)>, message: String) -> Self {
        Issue { kind: IssueKind::Topology, at, message }
    }

    fn into_error(self, line: Option<usize>) -> Error {
        match self.kind {
            IssueKind::Validation => Error::Validation { line, message: self.message },
            IssueKind::Topology => Error::Topology { line, message: self.message },
        }
    }
}

// Mirror of NetworkCase that keeps source spans so semantic errors can
// point at a line.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpannedCase {
    system: toml::Spanned<SystemBase>,
    #[serde(default)]
    buses: Vec<toml::Spanned<Bus>>,
    #[serde(default)]
    branches: Vec<toml::Spanned<Branch>>,
    #[serde(default)]
    injections: Vec<toml::Spanned<Injection>>,
    #[serde(default)]
    regulation: Vec<toml::Spanned<QvContribution>>,
}

/// Parses and validates case-file text.
pub fn parse_case(text: &str) -> Result<NetworkCase> {
    let raw: SpannedCase = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;

    let spans: HashMap<Section, Vec<Range<usize>>> = [
        (Section::System, vec![raw.system.span()]),
        (Section::Buses, raw.buses.iter().map(|b| b.span()).collect()),
        (Section::Branches, raw.branches.iter().map(|b| b.span()).collect()),
        (Section::Injections, raw.injections.iter().map(|b| b.span()).collect()),
        (Section::Regulation, raw.regulation.iter().map(|b| b.span()).collect()),
    ]
    .into_iter()
    .collect();

    let case = NetworkCase {
        system: raw.system.into_inner(),
        buses: raw.buses.into_iter().map(|b| b.into_inner()).collect(),
        branches: raw.branches.into_iter().map(|b| b.into_inner()).collect(),
        injections: raw.injections.into_iter().map(|b| b.into_inner()).collect(),
        regulation: raw.regulation.into_iter().map(|b| b.into_inner()).collect(),
    };

    case.check().map_err(|issue| {
        let line = issue
            .at
            .and_then(|(section, idx)| spans.get(&section).and_then(|v| v.get(idx)))
            .map(|span| line_of(text, span.start));
        issue.into_error(line)
    })?;
    Ok(case)
}

/// Writes a case back to the file format.
pub fn serialize_case(case: &NetworkCase) -> String {
    toml::to_string(case).expect("network case is always representable as TOML")
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// The bundled nine-bus, three-machine test system.
pub fn ieee9() -> NetworkCase {
    parse_case(IEEE9_TEXT).expect("bundled fixture is valid")
}

pub fn ieee9_text() -> &'static str {
    IEEE9_TEXT
}

impl NetworkCase {
    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn bus_ids(&self) -> Vec<BusId> {
        self.buses.iter().map(|b| b.id).collect()
    }

    /// Map from bus id to its position in `buses`.
    pub fn bus_index(&self) -> HashMap<BusId, usize> {
        self.buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|issue| issue.into_error(None))
    }

    /// Total shunt susceptance per bus, including half the line charging of
    /// every incident branch.
    pub fn total_shunt_b(&self) -> Vec<f64> {
        let index = self.bus_index();
        let mut b: Vec<f64> = self.buses.iter().map(|bus| bus.shunt_b).collect();
        for br in &self.branches {
            b[index[&br.from]] += 0.5 * br.b_line;
            b[index[&br.to]] += 0.5 * br.b_line;
        }
        b
    }

    /// Net injection specification for every bus, in bus order.
    pub fn bus_specs(&self) -> Vec<BusSpec> {
        let index = self.bus_index();
        let mut specs: Vec<BusSpec> =
            self.buses.iter().map(|_| BusSpec { role: BusRole::Pq, p: 0.0, q: 0.0, v_set: None }).collect();
        for inj in &self.injections {
            let spec = &mut specs[index[&inj.bus]];
            match inj.kind {
                InjectionKind::Slack => {
                    spec.role = BusRole::Slack;
                    spec.v_set = inj.v_set;
                }
                InjectionKind::Pv => {
                    if spec.role != BusRole::Slack {
                        spec.role = BusRole::Pv;
                    }
                    spec.v_set = inj.v_set;
                }
                InjectionKind::Pq => {}
            }
            spec.p += inj.p;
            if inj.kind == InjectionKind::Pq {
                spec.q += inj.q;
            }
        }
        specs
    }

    fn check(&self) -> std::result::Result<(), Issue> {
        let sys = &self.system;
        if !(sys.base_mva > 0.0 && sys.base_mva.is_finite()) {
            return Err(Issue::validation(Some((Section::System, 0)), "system.base_mva must be positive".into()));
        }
        if !(sys.omega0 > 0.0 && sys.omega0.is_finite()) {
            return Err(Issue::validation(Some((Section::System, 0)), "system.omega0 must be positive".into()));
        }
        if self.buses.is_empty() {
            return Err(Issue::validation(None, "case has no buses".into()));
        }

        let mut seen = HashSet::new();
        for (i, bus) in self.buses.iter().enumerate() {
            let at = Some((Section::Buses, i));
            if !seen.insert(bus.id) {
                return Err(Issue::validation(at, format!("duplicate bus id {}", bus.id)));
            }
            if !(bus.v_nominal > 0.0) {
                return Err(Issue::validation(at, format!("buses[{i}].v_nominal must be positive")));
            }
            if !(bus.shunt_b >= 0.0) {
                return Err(Issue::validation(
                    at,
                    format!("buses[{i}].shunt_b must be >= 0 (shunt reactors are not modelled)"),
                ));
            }
            if !(bus.shunt_g >= 0.0) {
                return Err(Issue::validation(at, format!("buses[{i}].shunt_g must be >= 0")));
            }
        }

        for (i, br) in self.branches.iter().enumerate() {
            let at = Some((Section::Branches, i));
            for end in [br.from, br.to] {
                if !seen.contains(&end) {
                    return Err(Issue::topology(at, format!("branches[{i}] references unknown bus {end}")));
                }
            }
            if br.from == br.to {
                return Err(Issue::validation(at, format!("branches[{i}] connects bus {} to itself", br.from)));
            }
            if !(br.r >= 0.0) {
                return Err(Issue::validation(at, format!("branches[{i}].r must be >= 0")));
            }
            if !(br.x >= 0.0) {
                return Err(Issue::validation(at, format!("branches[{i}].x must be >= 0")));
            }
            if br.x == 0.0 && br.r <= 0.0 {
                return Err(Issue::validation(at, format!("branches[{i}] has zero impedance")));
            }
            if !(br.b_line >= 0.0) {
                return Err(Issue::validation(at, format!("branches[{i}].b_line must be >= 0")));
            }
            if !(br.ratio > 0.0 && br.ratio.is_finite()) {
                return Err(Issue::validation(at, format!("branches[{i}].ratio must be positive")));
            }
        }

        let mut slack = 0;
        let mut controlled = HashSet::new();
        for (i, inj) in self.injections.iter().enumerate() {
            let at = Some((Section::Injections, i));
            if !seen.contains(&inj.bus) {
                return Err(Issue::topology(at, format!("injections[{i}] references unknown bus {}", inj.bus)));
            }
            if !(inj.p.is_finite() && inj.q.is_finite()) {
                return Err(Issue::validation(at, format!("injections[{i}] has non-finite power")));
            }
            if matches!(inj.kind, InjectionKind::Slack | InjectionKind::Pv) {
                match inj.v_set {
                    Some(v) if v > 0.0 => {}
                    _ => {
                        return Err(Issue::validation(at, format!("injections[{i}].v_set must be given and positive")))
                    }
                }
                if !controlled.insert(inj.bus) {
                    return Err(Issue::validation(
                        at,
                        format!("bus {} has more than one voltage-controlling injection", inj.bus),
                    ));
                }
            }
            if inj.kind == InjectionKind::Slack {
                slack += 1;
            }
        }
        if slack != 1 {
            return Err(Issue::validation(None, format!("exactly one slack injection required, found {slack}")));
        }

        for (i, reg) in self.regulation.iter().enumerate() {
            let at = Some((Section::Regulation, i));
            if !seen.contains(&reg.bus) {
                return Err(Issue::topology(at, format!("regulation[{i}] references unknown bus {}", reg.bus)));
            }
            if !(reg.k_qv >= 0.0) {
                return Err(Issue::validation(at, format!("regulation[{i}].k_qv must be >= 0")));
            }
        }

        if let Some(isolated) = self.first_disconnected_bus() {
            return Err(Issue::topology(None, format!("network is not connected: bus {isolated} is unreachable")));
        }
        Ok(())
    }

    fn first_disconnected_bus(&self) -> Option<BusId> {
        let index = self.bus_index();
        let mut parent: Vec<usize> = (0..self.buses.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for br in &self.branches {
            let (a, b) = (find(&mut parent, index[&br.from]), find(&mut parent, index[&br.to]));
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        (0..self.buses.len()).find(|&i| find(&mut parent, i) != root).map(|i| self.buses[i].id)
    }
}

/// Applies the network simplifications in `flags` to a copy of `case`.
///
/// `lossless` zeroes the resistance of every branch that has series
/// reactance (a purely resistive branch has nothing left without it and is
/// kept). `no_shunt_b` removes bus shunt susceptance and line charging.
pub fn derive_variant(case: &NetworkCase, flags: VariantFlags) -> NetworkCase {
    let mut out = case.clone();
    if flags.lossless {
        for br in out.branches.iter_mut().filter(|br| br.x > 0.0) {
            br.r = 0.0;
        }
    }
    if flags.no_shunt_b {
        for bus in &mut out.buses {
            bus.shunt_b = 0.0;
        }
        for br in &mut out.branches {
            br.b_line = 0.0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BUS: &str = r#"
[system]
base_mva = 100.0
omega0 = 376.99111843077515

[[buses]]
id = 1
[[buses]]
id = 2

[[branches]]
from = 1
to = 2
r = 0.0
x = 0.1

[[injections]]
bus = 1
kind = "slack"
v_set = 1.0

[[injections]]
bus = 2
kind = "pq"
p = -0.5
q = 0.0
"#;

    #[test]
    fn bundled_fixture_shape() {
        let case = ieee9();
        assert_eq!(case.buses.len(), 9);
        assert_eq!(case.branches.len(), 9);
        let transformers = case.branches.iter().filter(|b| b.b_line == 0.0 && b.r == 0.0).count();
        assert_eq!(transformers, 3);
        let gens = case.injections.iter().filter(|i| i.kind != InjectionKind::Pq).count();
        let loads = case.injections.iter().filter(|i| i.kind == InjectionKind::Pq).count();
        assert_eq!((gens, loads), (3, 3));
        assert!((case.system.omega0 - 2.0 * std::f64::consts::PI * 60.0).abs() < 1e-12);
    }

    #[test]
    fn two_bus_parses() {
        let case = parse_case(TWO_BUS).unwrap();
        assert_eq!(case.n_buses(), 2);
        let specs = case.bus_specs();
        assert_eq!(specs[0].role, BusRole::Slack);
        assert_eq!(specs[1].role, BusRole::Pq);
        assert_eq!(specs[1].p, -0.5);
    }

    #[test]
    fn unknown_bus_is_topology_error_with_line() {
        let text = TWO_BUS.replace("to = 2", "to = 99");
        match parse_case(&text) {
            Err(Error::Topology { line: Some(line), message }) => {
                assert!(message.contains("99"));
                let branch_line = text.lines().position(|l| l.contains("[[branches]]")).unwrap() + 1;
                assert!(line >= branch_line && line <= branch_line + 5, "line {line}");
            }
            other => panic!("expected topology error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_bus_is_validation_error() {
        let text = TWO_BUS.replacen("id = 2", "id = 1", 1);
        assert!(matches!(parse_case(&text), Err(Error::Validation { .. })));
    }

    #[test]
    fn disconnected_graph_rejected() {
        let text = format!("{TWO_BUS}\n[[buses]]\nid = 3\n");
        match parse_case(&text) {
            Err(Error::Topology { message, .. }) => assert!(message.contains("bus 3")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_violation_names_field_and_line() {
        let text = TWO_BUS.replace("x = 0.1", "x = \"oops\"");
        match parse_case(&text) {
            Err(Error::Parse { line: Some(line), message }) => {
                assert_eq!(text.lines().nth(line - 1).unwrap().trim(), "x = \"oops\"");
                assert!(!message.is_empty());
            }
            other => panic!("{other:?}"),
        }
        let missing = TWO_BUS.replace("x = 0.1\n", "");
        match parse_case(&missing) {
            Err(Error::Parse { message, .. }) => assert!(message.contains('x'), "{message}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exactly_one_slack() {
        let text = TWO_BUS.replace("kind = \"slack\"", "kind = \"pv\"");
        assert!(matches!(parse_case(&text), Err(Error::Validation { .. })));
    }

    #[test]
    fn variants() {
        let case = ieee9();
        let ll = derive_variant(&case, VariantFlags { lossless: true, ..Default::default() });
        assert!(ll.branches.iter().all(|b| b.r == 0.0));
        assert_eq!(ll.total_shunt_b(), case.total_shunt_b());

        let nob = derive_variant(&case, VariantFlags { no_shunt_b: true, ..Default::default() });
        assert!(nob.total_shunt_b().iter().all(|&b| b == 0.0));
        assert_eq!(
            nob.branches.iter().map(|b| b.r).collect::<Vec<_>>(),
            case.branches.iter().map(|b| b.r).collect::<Vec<_>>()
        );

        assert_eq!(derive_variant(&case, VariantFlags::default()), case);
        assert_eq!(derive_variant(&case, VariantFlags { decoupled: true, ..Default::default() }), case);
        // original untouched
        assert!(case.branches.iter().any(|b| b.r > 0.0));
    }

    #[test]
    fn variant_idempotent() {
        let case = ieee9();
        for flags in [
            VariantFlags { lossless: true, ..Default::default() },
            VariantFlags { no_shunt_b: true, ..Default::default() },
        ] {
            let once = derive_variant(&case, flags);
            assert_eq!(derive_variant(&once, flags), once);
        }
    }

    #[test]
    fn round_trip_is_fixed_point() {
        let case = ieee9();
        let again = parse_case(&serialize_case(&case)).unwrap();
        assert_eq!(again, case);
        assert_eq!(serialize_case(&again), serialize_case(&case));
    }

    #[test]
    fn regulation_section_parses() {
        let text = format!("{TWO_BUS}\n[[regulation]]\nbus = 2\nk_qv = 0.65\n");
        let case = parse_case(&text).unwrap();
        assert_eq!(case.regulation, vec![QvContribution { bus: BusId(2), k_qv: 0.65 }]);
        let bad = text.replace("bus = 2\nk_qv", "bus = 7\nk_qv");
        assert!(matches!(parse_case(&bad), Err(Error::Topology { .. })));
    }
}
