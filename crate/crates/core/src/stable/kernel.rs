use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::tail::{check_alpha, stable_tail_constant};
use crate::error::{Error, Result};
use crate::lattice::{HElement, QuotientStructure};

/// Identifier of a mark `w ∈ W`; JSON accepts integers or strings.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MarkId {
    Int(i64),
    Name(String),
}

impl fmt::Display for MarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkId::Int(i) => write!(f, "{i}"),
            MarkId::Name(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mark {
    pub id: MarkId,
    /// `ν({w})`.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelEntry {
    pub w: MarkId,
    pub u: Vec<i64>,
    pub value: f64,
}

fn yes() -> bool {
    true
}

/// A mixed moving average kernel `h(w, u)` on a finite mark space with
/// finite support in `H`. Entries absent from `h` are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KernelModel {
    pub alpha: f64,
    pub marks: Vec<Mark>,
    pub support: Vec<Vec<i64>>,
    pub h: Vec<KernelEntry>,
    /// Only trivial cocycles on `K` are supported.
    #[serde(default = "yes")]
    pub cocycle_trivial: bool,
}

impl KernelModel {
    /// One mark of weight `weight` and `h(w, 0) = 1`: the field is iid
    /// along `F` and constant along `K`.
    pub fn single_atom(alpha: f64, d: usize, weight: f64) -> Self {
        KernelModel {
            alpha,
            marks: vec![Mark { id: MarkId::Int(0), weight }],
            support: vec![vec![0; d]],
            h: vec![KernelEntry { w: MarkId::Int(0), u: vec![0; d], value: 1.0 }],
            cocycle_trivial: true,
        }
    }

    /// The planar field `X_{(t1,t2)} = ∫ f(x + t1 - t2) M(dx)` with
    /// Lebesgue control measure, for `f` supported in `[0, length)`.
    ///
    /// Writing `x = w + s` with `w ∈ [0,1)`, `s ∈ Z` gives the kernel
    /// `h(w, (s,0)) = f(w + s)`; `W = [0,1)` is discretized by `marks`
    /// midpoints of weight `1/marks`. Exact when `f` is constant on the unit
    /// intervals `[s, s+1)`.
    pub fn translation_example(alpha: f64, f: impl Fn(f64) -> f64, length: usize, marks: usize) -> Self {
        let mut h = Vec::new();
        let ms: Vec<Mark> =
            (0..marks).map(|k| Mark { id: MarkId::Int(k as i64), weight: 1.0 / marks as f64 }).collect();
        for k in 0..marks {
            let w = (k as f64 + 0.5) / marks as f64;
            for s in 0..length {
                let value = f(w + s as f64);
                if value != 0.0 {
                    h.push(KernelEntry { w: MarkId::Int(k as i64), u: vec![s as i64, 0], value });
                }
            }
        }
        KernelModel {
            alpha,
            marks: ms,
            support: (0..length as i64).map(|s| vec![s, 0]).collect(),
            h,
            cocycle_trivial: true,
        }
    }

    /// The worked planar example with `f = 1[0,1)`: a single atom.
    pub fn worked_example(alpha: f64) -> Self {
        Self::translation_example(alpha, |x| if (0.0..1.0).contains(&x) { 1.0 } else { 0.0 }, 1, 1)
    }

    /// The worked planar example with `f = 1[0,1) + 1[1,2)/2`, whose limit
    /// measure has clusters of two atoms.
    pub fn reduced_example(alpha: f64) -> Self {
        let f = |x: f64| {
            if (0.0..1.0).contains(&x) {
                1.0
            } else if (1.0..2.0).contains(&x) {
                0.5
            } else {
                0.0
            }
        };
        Self::translation_example(alpha, f, 2, 1)
    }

    pub fn compile(&self, qs: &QuotientStructure) -> Result<CompiledKernel> {
        if !self.cocycle_trivial {
            return Err(Error::invalid("only kernels with a trivial cocycle on K are supported"));
        }
        check_alpha(self.alpha)?;
        if self.marks.is_empty() {
            return Err(Error::invalid("the mark space is empty"));
        }
        let mut mark_index = HashMap::new();
        for (i, m) in self.marks.iter().enumerate() {
            if !(m.weight > 0.0 && m.weight.is_finite()) {
                return Err(Error::invalid(format!("mark {} has non-positive weight {}", m.id, m.weight)));
            }
            if mark_index.insert(m.id.clone(), i).is_some() {
                return Err(Error::invalid(format!("mark {} is declared twice", m.id)));
            }
        }
        let element = |u: &[i64]| -> Result<HElement> {
            if u.len() != qs.d() {
                return Err(Error::invalid(format!("kernel point {u:?} does not have length d = {}", qs.d())));
            }
            Ok(qs.element(u))
        };
        let mut support = Vec::new();
        for u in &self.support {
            let e = element(u)?;
            if !support.contains(&e) {
                support.push(e);
            }
        }
        let mut entries: Vec<Vec<(HElement, f64)>> = vec![Vec::new(); self.marks.len()];
        for e in &self.h {
            let w = *mark_index
                .get(&e.w)
                .ok_or_else(|| Error::invalid(format!("kernel entry refers to unknown mark {}", e.w)))?;
            let u = element(&e.u)?;
            if !support.contains(&u) {
                return Err(Error::invalid(format!("kernel entry at {:?} lies outside the declared support", e.u)));
            }
            if !e.value.is_finite() {
                return Err(Error::invalid(format!("kernel entry at {:?} is not finite", e.u)));
            }
            if entries[w].iter().any(|(v, _)| *v == u) {
                return Err(Error::invalid(format!("kernel entry ({}, {:?}) is given twice", e.w, e.u)));
            }
            if e.value != 0.0 {
                entries[w].push((u, e.value));
            }
        }
        let weights: Vec<f64> = self.marks.iter().map(|m| m.weight).collect();
        let radius = support.iter().map(|u| qs.norm(u)).max().unwrap_or(0);
        let max_abs_h = entries.iter().flatten().map(|(_, v)| v.abs()).fold(0.0, f64::max);
        let c_alpha = stable_tail_constant(self.alpha)?;
        Ok(CompiledKernel {
            alpha: self.alpha,
            c_alpha,
            scale: c_alpha.powf(1.0 / self.alpha),
            total_weight: weights.iter().sum(),
            weights,
            entries,
            radius,
            max_abs_h,
        })
    }
}

/// A validated kernel with its support reduced to canonical elements.
#[derive(Clone, Debug)]
pub struct CompiledKernel {
    pub alpha: f64,
    /// `C_α`.
    pub c_alpha: f64,
    /// `C_α^{1/α}`, the factor in front of the series.
    pub scale: f64,
    pub weights: Vec<f64>,
    pub total_weight: f64,
    /// Nonzero values `h(w, u)` per mark.
    pub entries: Vec<Vec<(HElement, f64)>>,
    /// `M` with `supp h ⊆ W × H_M`.
    pub radius: u64,
    pub max_abs_h: f64,
}

impl CompiledKernel {
    pub fn is_zero(&self) -> bool {
        self.max_abs_h == 0.0
    }

    /// `∫ |h|^α d(ν ⊗ τ)`, the `α`-th power of the scale of each `X_u`.
    pub fn alpha_norm(&self) -> f64 {
        self.entries
            .iter()
            .zip(&self.weights)
            .map(|(es, w)| w * es.iter().map(|(_, v)| v.abs().powf(self.alpha)).sum::<f64>())
            .sum()
    }

    /// Mark index for a uniform draw `x ∈ [0, total_weight)`.
    pub(crate) fn mark_for(&self, mut x: f64) -> usize {
        for (i, w) in self.weights.iter().enumerate() {
            if x < *w {
                return i;
            }
            x -= w;
        }
        self.weights.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::GroupSpec;

    fn sec6() -> QuotientStructure {
        QuotientStructure::analyze(&GroupSpec::new(2, vec![vec![1, 1]])).unwrap()
    }

    #[test]
    fn json_round_trip() {
        let k = KernelModel::reduced_example(1.5);
        let s = serde_json::to_string(&k).unwrap();
        assert!(s.contains("\"cocycleTrivial\":true"));
        let back: KernelModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, k);
        let named: KernelModel = serde_json::from_str(
            r#"{"alpha":1.2,"marks":[{"id":"a","weight":0.5}],"support":[[0,0]],"h":[{"w":"a","u":[0,0],"value":2.0}]}"#,
        )
        .unwrap();
        assert!(named.compile(&sec6()).is_ok());
    }

    #[test]
    fn reduced_example_compiles() {
        let c = KernelModel::reduced_example(1.5).compile(&sec6()).unwrap();
        assert_eq!(c.radius, 1);
        assert_eq!(c.entries[0].len(), 2);
        assert!((c.alpha_norm() - (1.0 + 0.5f64.powf(1.5))).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        let qs = sec6();
        let mut k = KernelModel::single_atom(1.0, 2, 1.0);
        k.cocycle_trivial = false;
        assert!(k.compile(&qs).unwrap_err().is_input_error());
        let mut k = KernelModel::single_atom(1.97, 2, 1.0);
        assert!(!k.compile(&qs).unwrap_err().is_input_error());
        k.alpha = 1.0;
        k.h[0].w = MarkId::Int(3);
        assert!(k.compile(&qs).is_err());
        let mut k = KernelModel::single_atom(1.0, 2, 1.0);
        k.h[0].u = vec![5, 0];
        assert!(k.compile(&qs).is_err());
        let mut k = KernelModel::single_atom(1.0, 2, 1.0);
        k.marks[0].weight = 0.0;
        assert!(k.compile(&qs).is_err());
        // (2,2) is the zero coset, so this entry duplicates h(0, 0).
        let mut k = KernelModel::single_atom(1.0, 2, 1.0);
        k.h.push(KernelEntry { w: MarkId::Int(0), u: vec![2, 2], value: 1.0 });
        assert!(k.compile(&qs).is_err());
    }
}
