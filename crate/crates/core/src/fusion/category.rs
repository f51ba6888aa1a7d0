use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::FusionError;

/// On-disk form of a fusion table.
///
/// `N` is a nested map `a -> b -> c -> multiplicity`; absent entries are zero.
/// `dual` may be omitted, in which case it is inferred from the unit channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoryDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<BTreeMap<String, String>>,
    #[serde(rename = "N")]
    pub n: BTreeMap<String, BTreeMap<String, BTreeMap<String, u32>>>,
}

/// A validated fusion ring: labels, duals and multiplicities `N^{ab}_c`.
///
/// The unit is always label index 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionCategory {
    name: String,
    labels: Vec<String>,
    dual: Vec<usize>,
    mult: Vec<u32>,
}

impl FusionCategory {
    /// Parse and validate a JSON category document.
    pub fn from_json(text: &str) -> Result<Self, FusionError> {
        let doc: CategoryDocument =
            serde_json::from_str(text).map_err(|e| FusionError::MalformedInput(e.to_string()))?;
        Self::from_document(&doc)
    }

    pub fn from_document(doc: &CategoryDocument) -> Result<Self, FusionError> {
        let labels = doc.labels.clone();
        if labels.is_empty() {
            return Err(FusionError::MalformedInput("`labels` is empty".into()));
        }
        let index_of = |name: &str| -> Result<usize, FusionError> {
            labels
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| FusionError::MalformedInput(format!("unknown label `{name}`")))
        };
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(FusionError::MalformedInput(format!("duplicate label `{l}`")));
            }
        }
        let r = labels.len();
        let mut mult = vec![0u32; r * r * r];
        for (a, row) in &doc.n {
            let a = index_of(a)?;
            for (b, col) in row {
                let b = index_of(b)?;
                for (c, &v) in col {
                    let c = index_of(c)?;
                    mult[(a * r + b) * r + c] = v;
                }
            }
        }
        let dual = match &doc.dual {
            Some(map) => {
                let mut dual = vec![usize::MAX; r];
                for (a, b) in map {
                    dual[index_of(a)?] = index_of(b)?;
                }
                if let Some(missing) = dual.iter().position(|&d| d == usize::MAX) {
                    return Err(FusionError::MalformedInput(format!(
                        "`dual` has no entry for `{}`",
                        labels[missing]
                    )));
                }
                Some(dual)
            }
            None => None,
        };
        let name = doc.name.clone().unwrap_or_else(|| "unnamed".to_string());
        Self::from_parts(name, labels, dual, mult)
    }

    /// Build from a dense multiplicity table indexed `(a * r + b) * r + c`.
    pub fn from_parts(
        name: impl Into<String>,
        labels: Vec<String>,
        dual: Option<Vec<usize>>,
        mult: Vec<u32>,
    ) -> Result<Self, FusionError> {
        let r = labels.len();
        if mult.len() != r * r * r {
            return Err(FusionError::MalformedInput(format!(
                "multiplicity table has {} entries, expected {}",
                mult.len(),
                r * r * r
            )));
        }
        let at = |a: usize, b: usize, c: usize| mult[(a * r + b) * r + c];

        for a in 0..r {
            for b in 0..r {
                let want = u32::from(a == b);
                if at(0, a, b) != want || at(a, 0, b) != want {
                    return Err(FusionError::InvalidCategory(format!(
                        "unit axiom fails: N^{{1,{}}}_{} = {}, N^{{{},1}}_{} = {}, expected {}",
                        labels[a],
                        labels[b],
                        at(0, a, b),
                        labels[a],
                        labels[b],
                        at(a, 0, b),
                        want
                    )));
                }
            }
        }

        let dual = match dual {
            Some(d) => d,
            None => {
                let mut d = Vec::with_capacity(r);
                for (a, label) in labels.iter().enumerate() {
                    let hits: Vec<usize> = (0..r).filter(|&b| at(a, b, 0) == 1).collect();
                    if hits.len() != 1 {
                        return Err(FusionError::InvalidCategory(format!(
                            "cannot infer dual of `{label}`: {} labels b with N^{{{label},b}}_1 = 1",
                            hits.len()
                        )));
                    }
                    d.push(hits[0]);
                }
                d
            }
        };
        if dual.len() != r || dual.iter().any(|&d| d >= r) {
            return Err(FusionError::MalformedInput("dual map out of range".into()));
        }
        if dual[0] != 0 {
            return Err(FusionError::InvalidCategory(format!(
                "dual of the unit is `{}`, expected the unit",
                labels[dual[0]]
            )));
        }
        for a in 0..r {
            if dual[dual[a]] != a {
                return Err(FusionError::InvalidCategory(format!(
                    "dual is not an involution at `{}`",
                    labels[a]
                )));
            }
            for b in 0..r {
                let want = u32::from(b == dual[a]);
                if at(a, b, 0) != want {
                    return Err(FusionError::InvalidCategory(format!(
                        "N^{{{},{}}}_1 = {}, expected {}",
                        labels[a],
                        labels[b],
                        at(a, b, 0),
                        want
                    )));
                }
            }
        }

        let cat = Self { name: name.into(), labels, dual, mult };
        if let Some((a, b, c, d, lhs, rhs)) = cat.first_associativity_defect() {
            return Err(FusionError::InvalidCategory(format!(
                "associativity fails at (a,b,c,d) = ({},{},{},{}): sum_e N^ab_e N^ec_d = {} but sum_f N^bc_f N^af_d = {}",
                cat.labels[a], cat.labels[b], cat.labels[c], cat.labels[d], lhs, rhs
            )));
        }
        Ok(cat)
    }

    /// First quadruple `(a,b,c,d)` where `(a×b)×c` and `a×(b×c)` disagree on channel `d`.
    pub fn first_associativity_defect(&self) -> Option<(usize, usize, usize, usize, u64, u64)> {
        let r = self.rank();
        for a in 0..r {
            for b in 0..r {
                for c in 0..r {
                    for d in 0..r {
                        let lhs: u64 = (0..r)
                            .map(|e| u64::from(self.n(a, b, e)) * u64::from(self.n(e, c, d)))
                            .sum();
                        let rhs: u64 = (0..r)
                            .map(|f| u64::from(self.n(b, c, f)) * u64::from(self.n(a, f, d)))
                            .sum();
                        if lhs != rhs {
                            return Some((a, b, c, d, lhs, rhs));
                        }
                    }
                }
            }
        }
        None
    }

    /// First triple violating `N^{sa}_b = N^{b ā}_s`, if any.
    pub fn first_reciprocity_defect(&self) -> Option<(usize, usize, usize)> {
        let r = self.rank();
        for s in 0..r {
            for a in 0..r {
                for b in 0..r {
                    if self.n(s, a, b) != self.n(b, self.dual[a], s) {
                        return Some((s, a, b));
                    }
                }
            }
        }
        None
    }

    /// Direct product of cyclic groups `Z_{n1} × Z_{n2} × ...` with group fusion.
    ///
    /// Labels are `"1"` for the identity, `"gk"` for a single cyclic factor and
    /// `"(k1,k2,...)"` for products.
    pub fn abelian_group(orders: &[u32]) -> Result<Self, FusionError> {
        if orders.is_empty() || orders.contains(&0) {
            return Err(FusionError::MalformedInput("group orders must be positive".into()));
        }
        let r: usize = orders.iter().map(|&n| n as usize).product();
        let digits = |mut i: usize| -> Vec<u32> {
            let mut out = vec![0; orders.len()];
            for (k, &n) in orders.iter().enumerate().rev() {
                out[k] = (i % n as usize) as u32;
                i /= n as usize;
            }
            out
        };
        let index = |ds: &[u32]| -> usize {
            ds.iter().zip(orders).fold(0usize, |acc, (&d, &n)| acc * n as usize + d as usize)
        };
        let labels: Vec<String> = (0..r)
            .map(|i| {
                let ds = digits(i);
                if i == 0 {
                    "1".to_string()
                } else if ds.len() == 1 {
                    format!("g{}", ds[0])
                } else {
                    let parts: Vec<String> = ds.iter().map(u32::to_string).collect();
                    format!("({})", parts.join(","))
                }
            })
            .collect();
        let mut mult = vec![0u32; r * r * r];
        let mut dual = vec![0usize; r];
        for a in 0..r {
            let da = digits(a);
            let neg: Vec<u32> = da.iter().zip(orders).map(|(&x, &n)| (n - x) % n).collect();
            dual[a] = index(&neg);
            for b in 0..r {
                let db = digits(b);
                let sum: Vec<u32> =
                    da.iter().zip(&db).zip(orders).map(|((&x, &y), &n)| (x + y) % n).collect();
                mult[(a * r + b) * r + index(&sum)] = 1;
            }
        }
        let name = orders.iter().map(|n| format!("Z{n}")).collect::<Vec<_>>().join("x");
        Self::from_parts(name, labels, Some(dual), mult)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn dual(&self, a: usize) -> usize {
        self.dual[a]
    }

    /// Multiplicity `N^{ab}_c`.
    #[inline]
    pub fn n(&self, a: usize, b: usize, c: usize) -> u32 {
        let r = self.labels.len();
        self.mult[(a * r + b) * r + c]
    }

    /// True when every `a × b` has exactly one channel.
    pub fn is_abelian(&self) -> bool {
        let r = self.rank();
        (0..r).all(|a| (0..r).all(|b| (0..r).map(|c| self.n(a, b, c)).sum::<u32>() == 1))
    }

    pub fn to_document(&self) -> CategoryDocument {
        let r = self.rank();
        let mut n = BTreeMap::new();
        for a in 0..r {
            for b in 0..r {
                for c in 0..r {
                    let v = self.n(a, b, c);
                    if v != 0 {
                        n.entry(self.labels[a].clone())
                            .or_insert_with(BTreeMap::new)
                            .entry(self.labels[b].clone())
                            .or_insert_with(BTreeMap::new)
                            .insert(self.labels[c].clone(), v);
                    }
                }
            }
        }
        CategoryDocument {
            name: Some(self.name.clone()),
            labels: self.labels.clone(),
            dual: Some(
                (0..r).map(|a| (self.labels[a].clone(), self.labels[self.dual[a]].clone())).collect(),
            ),
            n,
        }
    }
}

/// Names accepted by [`bundled`].
pub const BUNDLED: &[&str] =
    &["z2", "z3", "z4", "z5", "z6", "z7", "toric_code", "ising", "fibonacci"];

/// Raw JSON for a bundled category.
pub fn bundled_json(name: &str) -> Option<&'static str> {
    Some(match name {
        "z2" => include_str!("../../data/categories/z2.json"),
        "z3" => include_str!("../../data/categories/z3.json"),
        "z4" => include_str!("../../data/categories/z4.json"),
        "z5" => include_str!("../../data/categories/z5.json"),
        "z6" => include_str!("../../data/categories/z6.json"),
        "z7" => include_str!("../../data/categories/z7.json"),
        "toric_code" => include_str!("../../data/categories/toric_code.json"),
        "ising" => include_str!("../../data/categories/ising.json"),
        "fibonacci" => include_str!("../../data/categories/fibonacci.json"),
        _ => return None,
    })
}

/// Load one of the bundled categories by name.
pub fn bundled(name: &str) -> Result<FusionCategory, FusionError> {
    let text = bundled_json(name)
        .ok_or_else(|| FusionError::MalformedInput(format!("no bundled category `{name}`")))?;
    FusionCategory::from_json(text)
}
