//! Closed-form images of classical eigenvalue distributions under power
//! maps, as symbolic multisets of independent blocks.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClassicalError {
    #[error("symplectic dimension must be even, got {got}")]
    OddSymplectic { got: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ComponentKind {
    U,
    Oplus,
    Ominus,
    ReU,
    Sp,
}

/// One block of a product distribution. `size` is the matrix dimension
/// parameter: U(size), O±(size), ReU(size), Sp(size).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Component {
    pub kind: ComponentKind,
    pub size: u64,
}

impl Component {
    pub fn new(kind: ComponentKind, size: u64) -> Component {
        if kind == ComponentKind::Sp {
            assert!(size % 2 == 0, "symplectic size must be even");
        }
        Component { kind, size }
    }

    /// Matrix dimension: how many eigenvalues a sample carries.
    pub fn matrix_dim(&self) -> u64 {
        match self.kind {
            ComponentKind::U => self.size,
            ComponentKind::Oplus | ComponentKind::Ominus | ComponentKind::Sp => self.size,
            ComponentKind::ReU => 2 * self.size,
        }
    }

    /// Unit eigenvalues every sample is forced to carry.
    pub fn forced_eigenvalues(&self) -> Vec<i8> {
        match self.kind {
            ComponentKind::U | ComponentKind::ReU | ComponentKind::Sp => Vec::new(),
            ComponentKind::Oplus => {
                if self.size % 2 == 1 {
                    vec![1]
                } else {
                    Vec::new()
                }
            }
            ComponentKind::Ominus => {
                if self.size == 0 {
                    Vec::new()
                } else if self.size % 2 == 1 {
                    vec![-1]
                } else {
                    vec![1, -1]
                }
            }
        }
    }

    /// Conjugate pairs that are not pinned to the real axis.
    pub fn free_pairs(&self) -> u64 {
        match self.kind {
            ComponentKind::U => 0,
            ComponentKind::ReU => self.size,
            ComponentKind::Sp => self.size / 2,
            ComponentKind::Oplus | ComponentKind::Ominus => {
                (self.matrix_dim() - self.forced_eigenvalues().len() as u64) / 2
            }
        }
    }

    /// Pair count in the counting convention where the forced pair of an
    /// even negative coset still counts: O±(2m) and O±(2m+1) count m,
    /// ReU(m) counts m.
    pub fn counted_pairs(&self) -> u64 {
        match self.kind {
            ComponentKind::U => 0,
            ComponentKind::ReU => self.size,
            ComponentKind::Sp => self.size / 2,
            ComponentKind::Oplus | ComponentKind::Ominus => self.size / 2,
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ComponentKind::U => write!(f, "U({})", self.size),
            ComponentKind::Oplus => write!(f, "O+({})", self.size),
            ComponentKind::Ominus => write!(f, "O-({})", self.size),
            ComponentKind::ReU => write!(f, "ReU({})", self.size),
            ComponentKind::Sp => write!(f, "Sp({})", self.size),
        }
    }
}

pub fn u(size: u64) -> Component {
    Component::new(ComponentKind::U, size)
}
pub fn oplus(size: u64) -> Component {
    Component::new(ComponentKind::Oplus, size)
}
pub fn ominus(size: u64) -> Component {
    Component::new(ComponentKind::Ominus, size)
}
pub fn reu(size: u64) -> Component {
    Component::new(ComponentKind::ReU, size)
}
pub fn sp(size: u64) -> Component {
    Component::new(ComponentKind::Sp, size)
}

/// Product of independent blocks, plus the forced unit eigenvalues that the
/// identity discards on either side: the powered input's own forced values
/// and the ones the produced components carry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub components: Vec<Component>,
    pub ignored_eigenvalues: Vec<i8>,
}

impl Decomposition {
    pub fn new(components: Vec<Component>, mut ignored: Vec<i8>) -> Decomposition {
        ignored.sort_unstable_by(|a, b| b.cmp(a));
        Decomposition { components, ignored_eigenvalues: ignored }
    }

    /// Multiset view: components in canonical order.
    pub fn sorted_components(&self) -> Vec<Component> {
        let mut c = self.components.clone();
        c.sort_unstable();
        c
    }

    pub fn same_components(&self, other: &Decomposition) -> bool {
        self.sorted_components() == other.sorted_components()
    }

    pub fn counted_pairs(&self) -> u64 {
        self.components.iter().map(|c| c.counted_pairs()).sum()
    }

    pub fn max_free_pairs(&self) -> u64 {
        self.components.iter().map(|c| c.free_pairs()).max().unwrap_or(0)
    }

    pub fn render(&self, elide_zero: bool) -> String {
        let parts: Vec<String> = self
            .components
            .iter()
            .filter(|c| !elide_zero || c.size > 0)
            .map(|c| c.to_string())
            .collect();
        if parts.is_empty() {
            "(empty)".to_string()
        } else {
            parts.join(" (+) ")
        }
    }
}

pub fn render_identity(lhs: &Component, p: u64, d: &Decomposition, elide_zero: bool) -> String {
    format!("{lhs}^{p} ~ {}", d.render(elide_zero))
}

fn ceil_div(a: i64, b: i64) -> i64 {
    assert!(b > 0);
    a.div_euclid(b) + if a.rem_euclid(b) != 0 { 1 } else { 0 }
}

fn size(a: i64) -> u64 {
    assert!(a >= 0, "component size went negative: {a}");
    a as u64
}

/// U(n)^p as p independent unitary blocks of balanced sizes.
pub fn decompose_unitary(n: u64, p: u64) -> Decomposition {
    assert!(n >= 1 && p >= 1);
    let components = (0..p as i64)
        .map(|i| u(size(ceil_div(n as i64 - i, p as i64))))
        .collect();
    Decomposition::new(components, Vec::new())
}

/// Case indices for a coset given as matrix dimension plus determinant sign.
/// Returns (n, dim_even) with N = 2n or N = 2n + 1.
fn orthogonal_case(cap_n: u64) -> (i64, bool) {
    if cap_n % 2 == 0 {
        ((cap_n / 2) as i64, true)
    } else {
        (((cap_n - 1) / 2) as i64, false)
    }
}

/// O^det(N)^p as orthogonal and ReU blocks; the four parity cases.
pub fn decompose_orthogonal(cap_n: u64, det_sign: i8, p: u64) -> Decomposition {
    assert!(cap_n >= 1 && p >= 1);
    assert!(det_sign == 1 || det_sign == -1);
    let (n, dim_even) = orthogonal_case(cap_n);
    let pi = p as i64;
    let n0 = ceil_div(n, pi);
    let n1 = ceil_div(n - pi / 2, pi);
    let lead = |sign: i8, m: i64| {
        if sign == 1 {
            oplus(size(m))
        } else {
            ominus(size(m))
        }
    };

    let mut components = Vec::new();
    match (dim_even, p % 2 == 1) {
        (true, true) => {
            components.push(lead(det_sign, 2 * n0));
            for i in 0..(pi - 1) / 2 {
                components.push(reu(size(ceil_div(2 * (n - n0 - i), pi - 1))));
            }
        }
        (false, true) => {
            for i in 0..(pi - 1) / 2 {
                components.push(reu(size(ceil_div(2 * (n - n1 - i), pi - 1))));
            }
            components.push(lead(det_sign, 2 * n1 + 1));
        }
        (true, false) => {
            components.push(lead(det_sign, 2 * n0));
            for i in 0..(pi - 2) / 2 {
                components.push(reu(size(ceil_div(2 * (n - n0 - n1 - i), pi - 2))));
            }
            components.push(lead(-det_sign, 2 * n1 + 1));
        }
        (false, false) => {
            for i in 0..pi / 2 {
                components.push(reu(size(ceil_div(2 * (n - i), pi))));
            }
        }
    }

    let mut ignored: Vec<i8> = components.iter().flat_map(|c| c.forced_eigenvalues()).collect();
    let input = if det_sign == 1 { oplus(cap_n) } else { ominus(cap_n) };
    for e in input.forced_eigenvalues() {
        ignored.push(if p % 2 == 0 { 1 } else { e });
    }
    Decomposition::new(components, ignored)
}

/// Sp(2n)^p through the negative orthogonal coset two dimensions up.
pub fn decompose_symplectic(two_n: u64, p: u64) -> Result<Decomposition, ClassicalError> {
    if two_n % 2 != 0 {
        return Err(ClassicalError::OddSymplectic { got: two_n });
    }
    assert!(two_n >= 2 && p >= 1);
    let inner = decompose_orthogonal(two_n + 2, -1, p);
    let mut ignored = inner.ignored_eigenvalues.clone();
    // The embedding pair itself, as it comes out of the power map.
    ignored.push(1);
    ignored.push(if p % 2 == 0 { 1 } else { -1 });
    Ok(Decomposition::new(inner.components, ignored))
}

/// ReU(n) as the balanced pair of orthogonal cosets one dimension up.
pub fn reu_split(n: u64) -> Decomposition {
    let components = vec![oplus(n + 1), ominus(n + 1)];
    let ignored: Vec<i8> = components.iter().flat_map(|c| c.forced_eigenvalues()).collect();
    Decomposition::new(components, ignored)
}

/// Power-map image of a single block, routed to the matching identity.
pub fn power_decomposition(c: &Component, p: u64) -> Result<Decomposition, ClassicalError> {
    match c.kind {
        ComponentKind::U => Ok(decompose_unitary(c.size, p)),
        ComponentKind::Oplus => Ok(decompose_orthogonal(c.size, 1, p)),
        ComponentKind::Ominus => Ok(decompose_orthogonal(c.size, -1, p)),
        ComponentKind::Sp => decompose_symplectic(c.size, p),
        ComponentKind::ReU => {
            // ReU powers split through the coset pair first.
            let split = reu_split(c.size);
            let mut components = Vec::new();
            let mut ignored = split.ignored_eigenvalues.clone();
            for part in &split.components {
                let d = power_decomposition(part, p)?;
                components.extend(d.components);
                ignored.extend(d.ignored_eigenvalues);
            }
            Ok(Decomposition::new(components, ignored))
        }
    }
}
