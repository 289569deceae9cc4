//! Encoded alcove rows for the reductions of the scaled Weyl vector.
//!
//! Each row lists, per printed diagram node, the pairing of the dominant
//! representative with that node's wall root: `Bold(k)` when the reduced
//! point lies on the wall (the value is then the integer k) and `Barred(k)`
//! recording the off-wall value 1/p - k. The entry scale is calibrated
//! against the frozen G2 and F4 rows and asserted on the remaining cases.

use std::sync::OnceLock;

use num::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine::{
    diagram_automorphisms, reduce_to_alcove, wall_incidence, wall_system, AffineError,
    AlcoveReduction,
};
use crate::rat::{dot, rat, rat_int, vec_scale, Rat, RatVec};
use crate::rootsys::{
    adjoint_spec, pairing, twisted_spec, FamilyKind, GroupSpec, Lattice, RootDatum, TwistClass,
};

#[derive(Debug, Error)]
pub enum TableError {
    #[error("no table for {0}")]
    Unsupported(String),
    #[error("entry at printed node {node} fits neither class: value {value} at p={p}")]
    Encoding { node: usize, value: String, p: u64 },
    #[error(transparent)]
    Affine(#[from] AffineError),
}

/// Wall root backing a printed node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeSource {
    Facet,
    Simple(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableEntry {
    Bold(i64),
    /// Stands for the value 1/p - k.
    Barred(i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub p: u64,
    pub entries: Vec<TableEntry>,
    pub asterisk: bool,
}

/// Candidate scalings for the printed pairings; `Coroot` wins calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryScaling {
    /// 2<v,b>/<b,b> against the node root b.
    Coroot,
    /// Plain <v,b> at the realization's normalization.
    Inner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TableCase {
    G2,
    F4,
    E6,
    E7,
    E8,
    D4Cubed,
    E6Squared,
}

impl TableCase {
    pub const ALL: [TableCase; 7] = [
        TableCase::G2,
        TableCase::F4,
        TableCase::E6,
        TableCase::E7,
        TableCase::E8,
        TableCase::D4Cubed,
        TableCase::E6Squared,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            TableCase::G2 => "G2",
            TableCase::F4 => "F4",
            TableCase::E6 => "E6",
            TableCase::E7 => "E7",
            TableCase::E8 => "E8",
            TableCase::D4Cubed => "D4_3",
            TableCase::E6Squared => "E6_2",
        }
    }

    pub fn is_twisted(&self) -> bool {
        matches!(self, TableCase::D4Cubed | TableCase::E6Squared)
    }

    pub fn spec(&self) -> GroupSpec {
        match self {
            TableCase::G2 => adjoint_spec("G2", 2).unwrap(),
            TableCase::F4 => adjoint_spec("F4", 4).unwrap(),
            TableCase::E6 => adjoint_spec("E6", 6).unwrap(),
            TableCase::E7 => adjoint_spec("E7", 7).unwrap(),
            TableCase::E8 => adjoint_spec("E8", 8).unwrap(),
            TableCase::D4Cubed => twisted_spec(TwistClass::D4Fold, 3, false).unwrap(),
            TableCase::E6Squared => twisted_spec(TwistClass::E6Fold, 2, false).unwrap(),
        }
    }

    /// Printed node order; entries name the wall root behind each column.
    pub fn layout(&self) -> Vec<NodeSource> {
        use NodeSource::{Facet, Simple};
        match self {
            TableCase::G2 => vec![Facet, Simple(0), Simple(1)],
            TableCase::F4 => vec![Facet, Simple(3), Simple(2), Simple(1), Simple(0)],
            TableCase::E6 => vec![
                Facet,
                Simple(1),
                Simple(0),
                Simple(2),
                Simple(5),
                Simple(4),
                Simple(3),
            ],
            TableCase::E7 => vec![
                Facet,
                Simple(0),
                Simple(2),
                Simple(3),
                Simple(1),
                Simple(4),
                Simple(5),
                Simple(6),
            ],
            TableCase::E8 => vec![
                Facet,
                Simple(7),
                Simple(6),
                Simple(5),
                Simple(4),
                Simple(3),
                Simple(1),
                Simple(2),
                Simple(0),
            ],
            TableCase::D4Cubed => vec![Facet, Simple(0), Simple(1)],
            TableCase::E6Squared => {
                vec![Facet, Simple(0), Simple(1), Simple(2), Simple(3)]
            }
        }
    }

    pub fn fixture(&self) -> &'static str {
        match self {
            TableCase::G2 => include_str!("../fixtures/g2.txt"),
            TableCase::F4 => include_str!("../fixtures/f4.txt"),
            TableCase::E6 => include_str!("../fixtures/e6.txt"),
            TableCase::E7 => include_str!("../fixtures/e7.txt"),
            TableCase::E8 => include_str!("../fixtures/e8.txt"),
            TableCase::D4Cubed => include_str!("../fixtures/d4_3.txt"),
            TableCase::E6Squared => include_str!("../fixtures/e6_2.txt"),
        }
    }
}

/// Identify which tabulated case a spec is, if any.
pub fn table_case(spec: &GroupSpec) -> Result<TableCase, TableError> {
    if let Some(t) = &spec.twist {
        return match (t.class, t.cycle) {
            (TwistClass::D4Fold, 3) => Ok(TableCase::D4Cubed),
            (TwistClass::E6Fold, 2) => Ok(TableCase::E6Squared),
            _ => Err(TableError::Unsupported(spec.label.clone())),
        };
    }
    let rd = &spec.root_datum;
    if !rd.is_irreducible() || !spec.lattice.same_lattice(&rd.root_lattice) {
        return Err(TableError::Unsupported(spec.label.clone()));
    }
    let f = rd.family[0];
    match (f.kind, f.rank) {
        (FamilyKind::G, 2) => Ok(TableCase::G2),
        (FamilyKind::F, 4) => Ok(TableCase::F4),
        (FamilyKind::E, 6) => Ok(TableCase::E6),
        (FamilyKind::E, 7) => Ok(TableCase::E7),
        (FamilyKind::E, 8) => Ok(TableCase::E8),
        _ => Err(TableError::Unsupported(spec.label.clone())),
    }
}

/// Number of tabulated rows: the first power whose reduction is interior,
/// equal to the pairing of the Weyl vector with the facet coroot plus one.
pub fn row_count(rd: &RootDatum) -> u64 {
    let ws = wall_system(rd);
    let facet = &rd.positive_roots[ws.binding_index];
    let c = pairing(&rd.weyl_vector, facet);
    assert!(c.is_integer());
    c.to_integer().to_u64().expect("row count overflow") + 1
}

/// Lattice whose translation classes supply the asterisk symmetry.
fn star_lattice(case: TableCase, spec: &GroupSpec) -> Lattice {
    if case.is_twisted() {
        spec.lattice.clone()
    } else {
        spec.root_datum.weight_lattice.clone()
    }
}

/// True when a nontrivial alcove symmetry from `lattice` fixes `v_bar`.
pub fn asterisk(
    rd: &RootDatum,
    lattice: &Lattice,
    v_bar: &[Rat],
) -> Result<bool, TableError> {
    let autos = diagram_automorphisms(rd, lattice)?;
    Ok(autos
        .iter()
        .any(|a| !a.is_identity() && a.element.apply(v_bar) == v_bar))
}

/// Classify every printed node of a reduced point. Wall membership decides
/// the class; the value must then fit it exactly.
pub fn encode_row(
    rd: &RootDatum,
    red: &AlcoveReduction,
    p: u64,
    layout: &[NodeSource],
    scaling: EntryScaling,
) -> Result<Vec<TableEntry>, TableError> {
    let ws = wall_system(rd);
    let facet = &rd.positive_roots[ws.binding_index];
    let walls = wall_incidence(rd, &red.v_bar)?;
    let value = |b: &RatVec| -> Rat {
        match scaling {
            EntryScaling::Coroot => pairing(&red.v_tilde, b),
            EntryScaling::Inner => dot(&red.v_tilde, b),
        }
    };
    let mut entries = Vec::with_capacity(layout.len());
    for (node, src) in layout.iter().enumerate() {
        let (c, on_wall) = match src {
            NodeSource::Facet => (-value(facet), walls.contains(&0)),
            NodeSource::Simple(i) => (value(&rd.simple_roots[*i]), walls.contains(&(i + 1))),
        };
        let fail = || TableError::Encoding {
            node,
            value: c.to_string(),
            p,
        };
        let entry = if on_wall {
            if !c.is_integer() || c < rat_int(1) {
                return Err(fail());
            }
            TableEntry::Bold(c.to_integer().to_i64().ok_or_else(fail)?)
        } else {
            let k = rat(1, p as i64) - &c;
            if !k.is_integer() || k.is_negative() {
                return Err(fail());
            }
            TableEntry::Barred(k.to_integer().to_i64().ok_or_else(fail)?)
        };
        entries.push(entry);
    }
    Ok(entries)
}

fn rows_with_scaling(
    case: TableCase,
    spec: &GroupSpec,
    scaling: EntryScaling,
) -> Result<Vec<TableRow>, TableError> {
    let rd = &spec.root_datum;
    let layout = case.layout();
    let star = star_lattice(case, spec);
    (1..=row_count(rd))
        .map(|p| {
            let v = vec_scale(&rd.weyl_vector, &rat(1, p as i64));
            let red = reduce_to_alcove(rd, &v);
            let entries = encode_row(rd, &red, p, &layout, scaling)?;
            let asterisk = asterisk(rd, &star, &red.v_bar)?;
            Ok(TableRow {
                p,
                entries,
                asterisk,
            })
        })
        .collect()
}

/// The scaling that reproduces the frozen G2 and F4 rows. Exactly one
/// candidate may survive; anything else is a normalization bug.
pub fn calibrated_scaling() -> EntryScaling {
    static CAL: OnceLock<EntryScaling> = OnceLock::new();
    *CAL.get_or_init(|| {
        let mut winner = None;
        for s in [EntryScaling::Coroot, EntryScaling::Inner] {
            let ok = [TableCase::G2, TableCase::F4].iter().all(|&c| {
                rows_with_scaling(c, &c.spec(), s)
                    .map(|rows| render_table(&rows, BarStyle::Ascii) == c.fixture())
                    .unwrap_or(false)
            });
            if ok {
                assert!(
                    winner.is_none(),
                    "both scalings reproduce the calibration rows"
                );
                winner = Some(s);
            }
        }
        winner.expect("no scaling reproduces the calibration rows")
    })
}

/// All rows for one of the seven tabulated cases.
pub fn generate_table(spec: &GroupSpec) -> Result<Vec<TableRow>, TableError> {
    let case = table_case(spec)?;
    rows_with_scaling(case, spec, calibrated_scaling())
}

/// How barred entries are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarStyle {
    /// Trailing tilde: `6~`.
    Ascii,
    /// Combining overline on every digit.
    Overline,
}

pub fn render_entry(e: &TableEntry, style: BarStyle) -> String {
    match e {
        TableEntry::Bold(k) => k.to_string(),
        TableEntry::Barred(k) => match style {
            BarStyle::Ascii => format!("{k}~"),
            BarStyle::Overline => k
                .to_string()
                .chars()
                .flat_map(|c| [c, '\u{0305}'])
                .collect(),
        },
    }
}

pub fn render_row(row: &TableRow, style: BarStyle) -> String {
    let body = row
        .entries
        .iter()
        .map(|e| render_entry(e, style))
        .collect::<Vec<_>>()
        .join(", ");
    let star = if row.asterisk { " *" } else { "" };
    format!("p={:>2}: ({}){}", row.p, body, star)
}

pub fn render_table(rows: &[TableRow], style: BarStyle) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&render_row(row, style));
        out.push('\n');
    }
    out
}
